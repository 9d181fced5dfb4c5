#include "unml/genlogistic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "unml/error.hpp"
#include "unml/gaussian_nml.hpp"
#include "unml/random.hpp"

namespace unml::genlog {

GenLogisticSpec::GenLogisticSpec(double theta_min, double theta_max)
    : theta_min_(theta_min), theta_max_(theta_max) {
  if (!(std::isfinite(theta_min) && std::isfinite(theta_max) && theta_min > 0.0 &&
        theta_min < theta_max)) {
    std::ostringstream msg;
    msg << "need 0 < theta_min < theta_max < inf; got " << theta_min << ", " << theta_max;
    throw Error(Errc::invalid_input, msg.str());
  }
}

double softplus_neg(double x) noexcept {
  // log(1 + e^{-x}); the branches at |x| > 35 avoid exp overflow and keep
  // full relative precision in the tails.
  if (x > 35.0) return std::exp(-x);
  if (x < -35.0) return -x + std::exp(x);
  return std::log1p(std::exp(-x));
}

double log_pdf(double x, double theta) {
  if (!(theta > 0.0 && std::isfinite(theta)))
    throw Error(Errc::domain, "generalized logistic needs theta > 0");
  if (!std::isfinite(x)) throw Error(Errc::invalid_input, "x must be finite");
  // For x < 0, -x - (theta+1) log(1 + e^{-x}) = theta x - (theta+1) log(1 + e^{x});
  // this form avoids cancelling two terms of size |x| in the left tail.
  if (x < 0.0) return std::log(theta) + theta * x - (theta + 1.0) * std::log1p(std::exp(x));
  return std::log(theta) - x - (theta + 1.0) * softplus_neg(x);
}

double mle(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::insufficient_data, "genlog_mle needs at least one value");
  double sum = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(Errc::invalid_input, "x must be finite");
    sum += softplus_neg(v);
  }
  const double theta = static_cast<double>(x.size()) / sum;
  if (!(sum > 0.0) || !std::isfinite(theta))
    throw Error(Errc::domain, "sum of log(1 + e^{-x}) underflows; theta_hat is unbounded");
  return theta;
}

namespace {

// n log n - n - log Gamma(n). The three terms cancel to O(log n), so for
// large n use the Stirling series, whose first omitted term is below
// 1/(1680 n^7) < 1e-17 at n >= 100.
double log_stirling_ratio(double n) {
  if (n < 100.0) return n * std::log(n) - n - gaussian::log_gamma(n);
  const double inv = 1.0 / n, inv2 = inv * inv;
  const double series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
  return 0.5 * std::log(n / (2.0 * std::numbers::pi)) - series;
}

}  // namespace

double log_norm(std::int64_t n, const GenLogisticSpec& spec) {
  if (n < 1) throw Error(Errc::invalid_input, "n must be >= 1");
  const double nd = static_cast<double>(n);
  // log(theta_max / theta_min) without cancellation near 1.
  const double log_ratio =
      std::log1p((spec.theta_max() - spec.theta_min()) / spec.theta_min());
  return log_stirling_ratio(nd) + std::log(log_ratio);
}

double codelength(std::span<const double> x, const GenLogisticSpec& spec) {
  const double theta = mle(x);
  if (theta < spec.theta_min() || theta > spec.theta_max()) {
    std::ostringstream msg;
    msg << "theta_hat = " << theta << " outside [" << spec.theta_min() << ", "
        << spec.theta_max() << "]";
    throw Error(Errc::domain_violation, msg.str());
  }
  double neg_log_lik = 0.0;
  for (double v : x) neg_log_lik -= log_pdf(v, theta);
  return neg_log_lik + log_norm(static_cast<std::int64_t>(x.size()), spec);
}

double quantile(double u, double theta) {
  if (!(u > 0.0 && u < 1.0)) throw Error(Errc::domain, "quantile needs u in (0, 1)");
  if (!(theta > 0.0)) throw Error(Errc::domain, "generalized logistic needs theta > 0");
  // u^{-1/theta} - 1 = expm1(-log(u) / theta)
  return -std::log(std::expm1(-std::log(u) / theta));
}

double cdf(double x, double theta) {
  if (!(theta > 0.0)) throw Error(Errc::domain, "generalized logistic needs theta > 0");
  return std::exp(-theta * softplus_neg(x));
}

std::vector<double> sample(std::size_t count, double theta, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = quantile(uniform_open01(rng), theta);
  return out;
}

}  // namespace unml::genlog
