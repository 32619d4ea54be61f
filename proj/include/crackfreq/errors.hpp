#pragma once

#include <stdexcept>
#include <string>

namespace crackfreq {

/// Base class of every error raised by the library. `code()` is a stable
/// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define CRACKFREQ_DECLARE_ERROR(Name)                                     \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(#Name, what) {}        \
  };

CRACKFREQ_DECLARE_ERROR(InvalidArgument)
CRACKFREQ_DECLARE_ERROR(MeshQualityError)
CRACKFREQ_DECLARE_ERROR(MeshFormatError)
CRACKFREQ_DECLARE_ERROR(OutsideMesh)
CRACKFREQ_DECLARE_ERROR(GradientSingular)
CRACKFREQ_DECLARE_ERROR(IndefiniteSystem)
CRACKFREQ_DECLARE_ERROR(UnsupportedQuadrature)
CRACKFREQ_DECLARE_ERROR(RadiusTooSmall)
CRACKFREQ_DECLARE_ERROR(HeightNotPositive)
CRACKFREQ_DECLARE_ERROR(HalfIntegerMismatch)
CRACKFREQ_DECLARE_ERROR(NonPositiveLimit)
CRACKFREQ_DECLARE_ERROR(SolverFail)
CRACKFREQ_DECLARE_ERROR(SingularQuadrature)
CRACKFREQ_DECLARE_ERROR(SpreadTooLarge)
CRACKFREQ_DECLARE_ERROR(NonDecreasingError)
CRACKFREQ_DECLARE_ERROR(ScenarioMismatch)
CRACKFREQ_DECLARE_ERROR(ConfigError)

#undef CRACKFREQ_DECLARE_ERROR

}  // namespace crackfreq
