#pragma once

#include <stdexcept>
#include <string>

namespace cvqft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CVQFT_DEFINE_ERROR(Name)                 \
  class Name : public Error {                    \
   public:                                       \
    explicit Name(const std::string& what_arg)   \
        : Error(std::string(#Name ": ") + what_arg) {} \
  }

CVQFT_DEFINE_ERROR(ValidationError);
CVQFT_DEFINE_ERROR(PoleProximity);
CVQFT_DEFINE_ERROR(NotOrthogonal);
CVQFT_DEFINE_ERROR(SynthesisMismatch);
CVQFT_DEFINE_ERROR(MemoryGuard);
CVQFT_DEFINE_ERROR(PhaseGuard);
CVQFT_DEFINE_ERROR(CutoffSaturated);
CVQFT_DEFINE_ERROR(ParameterOrder);
CVQFT_DEFINE_ERROR(ShapeMismatch);
CVQFT_DEFINE_ERROR(DimensionUnsupported);
CVQFT_DEFINE_ERROR(QuadratureNotConverged);
CVQFT_DEFINE_ERROR(BadInterval);
CVQFT_DEFINE_ERROR(ConfigError);

#undef CVQFT_DEFINE_ERROR

}  // namespace cvqft
