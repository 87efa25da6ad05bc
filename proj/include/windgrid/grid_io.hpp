#pragma once

#include <iosfwd>
#include <string>

#include "windgrid/grid.hpp"

namespace windgrid {

// Loads a grid from the JSON document format: top-level arrays `buses`,
// `branches`, `generators`, `storage`, `wind_farms` and scalar `horizon`.
// Unknown fields produce a warning on `warnings` (stderr by default);
// missing required fields raise ParseError. The result is validated.
GridModel load_grid_json(const std::string& path,
                         std::ostream* warnings = nullptr);
GridModel parse_grid_json(const std::string& text,
                          std::ostream* warnings = nullptr);

std::string grid_to_json(const GridModel& grid);

}  // namespace windgrid
