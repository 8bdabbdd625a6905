#pragma once

#include <stdexcept>
#include <string>

namespace sinn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SINN_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

SINN_DEFINE_ERROR(InvalidGridError);
SINN_DEFINE_ERROR(NumericError);
SINN_DEFINE_ERROR(UnsupportedDimensionError);
SINN_DEFINE_ERROR(ConfigError);
SINN_DEFINE_ERROR(ShapeError);
SINN_DEFINE_ERROR(TrainingDivergedError);
SINN_DEFINE_ERROR(WrongEntryPointError);
SINN_DEFINE_ERROR(InvalidStrategyError);
SINN_DEFINE_ERROR(UndefinedDensityError);
SINN_DEFINE_ERROR(DegenerateGridError);
SINN_DEFINE_ERROR(ContractViolation);
SINN_DEFINE_ERROR(InstabilityError);
SINN_DEFINE_ERROR(UndefinedMetricError);
SINN_DEFINE_ERROR(IoError);

#undef SINN_DEFINE_ERROR

}  // namespace sinn
