#pragma once

#include <stdexcept>
#include <string>

namespace windgrid {

// Base for every error the library raises deliberately.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WINDGRID_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& msg) : Error(msg) {}        \
  }

WINDGRID_DEFINE_ERROR(InvalidArgument);

// grid-model
WINDGRID_DEFINE_ERROR(NonPositiveReactance);
WINDGRID_DEFINE_ERROR(UnbalancedInjections);
WINDGRID_DEFINE_ERROR(SingularNetwork);
WINDGRID_DEFINE_ERROR(PlanMismatch);

// scheduler
WINDGRID_DEFINE_ERROR(DimensionMismatch);
WINDGRID_DEFINE_ERROR(Infeasible);
WINDGRID_DEFINE_ERROR(BudgetExceeded);
WINDGRID_DEFINE_ERROR(NegativeCurtailment);

// ddm
WINDGRID_DEFINE_ERROR(DegenerateAttack);
WINDGRID_DEFINE_ERROR(NegativeIncrement);

// neural
WINDGRID_DEFINE_ERROR(ShapeMismatch);
WINDGRID_DEFINE_ERROR(NonFiniteValue);
WINDGRID_DEFINE_ERROR(ZeroYMax);
WINDGRID_DEFINE_ERROR(LengthMismatch);

// scenario-engine
WINDGRID_DEFINE_ERROR(InsufficientHistory);
WINDGRID_DEFINE_ERROR(ModelMissing);

// data-io
WINDGRID_DEFINE_ERROR(InsufficientData);
WINDGRID_DEFINE_ERROR(MissingModel);
WINDGRID_DEFINE_ERROR(CircularMissing);
WINDGRID_DEFINE_ERROR(FileNotFound);
WINDGRID_DEFINE_ERROR(HeaderMismatch);
WINDGRID_DEFINE_ERROR(ParseError);

#undef WINDGRID_DEFINE_ERROR

}  // namespace windgrid
