#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glfr {

enum class ErrorCode {
  invalid_params,
  invalid_probability,
  saturated_cdf,
  domain,
  no_sign_change,
  max_iter,
  singular_jacobian,
  non_convergence,
  degenerate_sample,
  boundary_collapse,
  singular_matrix,
  not_positive_definite,
  unsorted_input,
  invalid_scheme,
  too_many_failures,
  io,
  parse,
  empty_file,
  nonpositive_value,
  invalid_config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::invalid_probability: return "invalid-probability";
    case ErrorCode::saturated_cdf: return "saturated-cdf";
    case ErrorCode::domain: return "domain";
    case ErrorCode::no_sign_change: return "no-sign-change";
    case ErrorCode::max_iter: return "max-iter";
    case ErrorCode::singular_jacobian: return "singular-jacobian";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::boundary_collapse: return "boundary-collapse";
    case ErrorCode::singular_matrix: return "singular-matrix";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::unsorted_input: return "unsorted-input";
    case ErrorCode::invalid_scheme: return "invalid-scheme";
    case ErrorCode::too_many_failures: return "too-many-failures";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::empty_file: return "empty-file";
    case ErrorCode::nonpositive_value: return "nonpositive-value";
    case ErrorCode::invalid_config: return "invalid-config";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glfr
