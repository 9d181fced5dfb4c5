#pragma once

#include <stdexcept>
#include <string>

namespace unml {

enum class Errc {
  invalid_input,
  insufficient_data,
  domain,              // argument outside a function's mathematical domain
  singular_covariance,
  domain_violation,    // data MLE outside the restricted domain Y
  infeasible_k,
  invalid_assignment,
  degenerate_estimate,
  budget_exceeded,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace unml
