#pragma once

#include <stdexcept>
#include <string>

namespace til {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define TIL_DEFINE_ERROR(Name) \
  struct Name : Error {        \
    using Error::Error;        \
  }

TIL_DEFINE_ERROR(OracleError);
TIL_DEFINE_ERROR(InputError);
TIL_DEFINE_ERROR(ConfigError);
TIL_DEFINE_ERROR(GridError);
TIL_DEFINE_ERROR(AlignmentError);
TIL_DEFINE_ERROR(TruncationError);
TIL_DEFINE_ERROR(TruncationWarning);
TIL_DEFINE_ERROR(PerturbationError);
TIL_DEFINE_ERROR(DomainError);
TIL_DEFINE_ERROR(SizeError);
TIL_DEFINE_ERROR(MarginalError);
TIL_DEFINE_ERROR(ConvergenceError);
TIL_DEFINE_ERROR(DimensionError);
TIL_DEFINE_ERROR(MapDegeneracyError);
TIL_DEFINE_ERROR(DegenerateRemainderError);
TIL_DEFINE_ERROR(NumericalError);
TIL_DEFINE_ERROR(SingularHessianError);

#undef TIL_DEFINE_ERROR

}  // namespace til
