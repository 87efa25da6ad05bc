"""Wind-integration toolkit bindings.

Thin re-export of the compiled extension module.
"""

from ._windgrid import *  # noqa: F401,F403
from ._windgrid import __all__  # noqa: F401
