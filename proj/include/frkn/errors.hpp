#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace frkn {

/// Base class for all library errors. Carries a short machine-readable code
/// and the subsystem that raised it so front ends can emit structured
/// "ERROR <code> <module> <detail>" lines.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string module, std::string detail)
      : std::runtime_error(code + " [" + module + "] " + detail),
        code_(std::move(code)),
        module_(std::move(module)),
        detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string module_;
  std::string detail_;
};

struct InvalidInput : Error {
  InvalidInput(std::string module, std::string detail)
      : Error("InvalidInput", std::move(module), std::move(detail)) {}
};

struct SingularMatrix : Error {
  explicit SingularMatrix(std::string detail)
      : Error("SingularMatrix", "numeric", std::move(detail)) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(std::string detail)
      : Error("NoConvergence", "numeric", std::move(detail)) {}
};

struct InvalidParams : Error {
  explicit InvalidParams(std::string detail)
      : Error("InvalidParams", "basis", std::move(detail)) {}
};

struct MissingCertificate : Error {
  explicit MissingCertificate(std::string detail)
      : Error("MissingCertificate", "basis", std::move(detail)) {}
};

struct CollocationFailure : Error {
  explicit CollocationFailure(std::string detail)
      : Error("CollocationFailure", "tableau", std::move(detail)) {}
};

struct DenominatorVanishes : Error {
  explicit DenominatorVanishes(std::string detail)
      : Error("DenominatorVanishes", "tableau", std::move(detail)) {}
};

struct AugmentedSingular : Error {
  explicit AugmentedSingular(std::string detail)
      : Error("AugmentedSingular", "tableau", std::move(detail)) {}
};

struct StageNoConvergence : Error {
  explicit StageNoConvergence(std::string detail)
      : Error("StageNoConvergence", "integrator", std::move(detail)) {}
};

struct ResolventSingular : Error {
  explicit ResolventSingular(std::string detail)
      : Error("ResolventSingular", "stability", std::move(detail)) {}
};

struct WSingular : Error {
  explicit WSingular(std::string detail)
      : Error("WSingular", "stability", std::move(detail)) {}
};

struct OriginSingularity : Error {
  explicit OriginSingularity(std::string detail)
      : Error("OriginSingularity", "problems", std::move(detail)) {}
};

struct InsufficientRows : Error {
  explicit InsufficientRows(std::string detail)
      : Error("InsufficientRows", "harness", std::move(detail)) {}
};

struct IoError : Error {
  explicit IoError(std::string detail)
      : Error("IoError", "harness", std::move(detail)) {}
};

}  // namespace frkn
