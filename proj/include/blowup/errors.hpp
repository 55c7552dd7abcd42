#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

// Error kinds map onto CLI exit codes: config problems -> 2,
// numerical failures -> 3, invariant violations -> 1.
enum class ErrorKind {
  Config,
  Numerical,
  Invariant,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string tag, const std::string& what)
      : std::runtime_error(tag + ": " + what), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& tag() const noexcept { return tag_; }

private:
  ErrorKind kind_;
  std::string tag_;
};

inline Error no_root_found(const std::string& w) { return {ErrorKind::Numerical, "NoRootFound", w}; }
inline Error step_underflow(const std::string& w) { return {ErrorKind::Numerical, "StepUnderflow", w}; }
inline Error non_positive_denominator(const std::string& w) {
  return {ErrorKind::Numerical, "NonPositiveDenominator", w};
}
inline Error insufficient_tail(const std::string& w) { return {ErrorKind::Numerical, "InsufficientTail", w}; }
inline Error non_monotone_input(const std::string& w) { return {ErrorKind::Numerical, "NonMonotoneInput", w}; }
inline Error domain_exit(const std::string& w) { return {ErrorKind::Numerical, "DomainExit", w}; }
inline Error unsupported_parameters(const std::string& w) {
  return {ErrorKind::Config, "UnsupportedParameters", w};
}
inline Error certification_failure(const std::string& w) {
  return {ErrorKind::Invariant, "CertificationFailure", w};
}
inline Error branch_mismatch(const std::string& w) { return {ErrorKind::Numerical, "BranchMismatch", w}; }
inline Error minor_negative(const std::string& w) { return {ErrorKind::Invariant, "MinorNegative", w}; }
inline Error inequality_violated(const std::string& w) { return {ErrorKind::Invariant, "InequalityViolated", w}; }
inline Error cfl_violation(const std::string& w) { return {ErrorKind::Numerical, "CflViolation", w}; }
inline Error positivity_loss(const std::string& w) { return {ErrorKind::Numerical, "PositivityLoss", w}; }
inline Error domain_too_small(const std::string& w) { return {ErrorKind::Config, "DomainTooSmall", w}; }
inline Error config_error(const std::string& w) { return {ErrorKind::Config, "ConfigError", w}; }

}  // namespace blowup
