#pragma once

#include <stdexcept>
#include <string>

namespace moi {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the CLI; `what()` carries the context.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& context)
      : std::runtime_error(name + ": " + context), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define MOI_DEFINE_ERROR(Type)                                      \
  class Type : public Error {                                       \
   public:                                                          \
    explicit Type(const std::string& context) : Error(#Type, context) {} \
  }

// system_core
MOI_DEFINE_ERROR(DimensionMismatch);
MOI_DEFINE_ERROR(NonFiniteOutput);
// integrator
MOI_DEFINE_ERROR(NewtonDivergence);
MOI_DEFINE_ERROR(InvalidConfig);
// spectral
MOI_DEFINE_ERROR(ConvergenceFailure);
MOI_DEFINE_ERROR(NoUnstableEigenvalue);
MOI_DEFINE_ERROR(MultipleUnstableEigenvalues);
MOI_DEFINE_ERROR(ComplexUnstableEigenvalue);
// instability_mode
MOI_DEFINE_ERROR(NeverUnstable);
MOI_DEFINE_ERROR(NotRecovered);
// recovery_boundary
MOI_DEFINE_ERROR(NotStable);
MOI_DEFINE_ERROR(NoBracket);
MOI_DEFINE_ERROR(UndeterminedAtBisection);
// model_zoo
MOI_DEFINE_ERROR(ParamOutOfRange);
MOI_DEFINE_ERROR(DataFormatError);
// cli_reporting
MOI_DEFINE_ERROR(IoError);

#undef MOI_DEFINE_ERROR

}  // namespace moi
