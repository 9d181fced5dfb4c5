#include "unml/error.hpp"

namespace unml {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_input: return "invalid input";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::domain: return "domain error";
    case Errc::singular_covariance: return "singular covariance";
    case Errc::domain_violation: return "domain violation";
    case Errc::infeasible_k: return "infeasible K";
    case Errc::invalid_assignment: return "invalid assignment";
    case Errc::degenerate_estimate: return "degenerate estimate";
    case Errc::budget_exceeded: return "budget exceeded";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace unml
