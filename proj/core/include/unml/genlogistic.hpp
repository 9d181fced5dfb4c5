#pragma once

// NML code-length for the one-parameter generalized logistic family
// f(x; theta) = theta e^{-x} / (1 + e^{-x})^{theta+1}, with the
// normalization restricted to theta_min <= theta_hat <= theta_max.

#include <cstdint>
#include <span>
#include <vector>

namespace unml::genlog {

class GenLogisticSpec {
 public:
  GenLogisticSpec(double theta_min, double theta_max);

  double theta_min() const noexcept { return theta_min_; }
  double theta_max() const noexcept { return theta_max_; }

 private:
  double theta_min_;
  double theta_max_;
};

/// log(1 + e^{-x}) without overflow or cancellation.
double softplus_neg(double x) noexcept;

double log_pdf(double x, double theta);

/// theta_hat = n / sum_i log(1 + e^{-x_i}).
double mle(std::span<const double> x);

/// log C = n log n - n - log Gamma(n) + log log(theta_max / theta_min).
double log_norm(std::int64_t n, const GenLogisticSpec& spec);

/// -sum_i log f(x_i; theta_hat) + log_norm(n, spec). Throws
/// domain_violation when theta_hat is outside [theta_min, theta_max].
double codelength(std::span<const double> x, const GenLogisticSpec& spec);

/// Inverse CDF of F(x) = (1 + e^{-x})^{-theta}: x = -log(u^{-1/theta} - 1).
double quantile(double u, double theta);

double cdf(double x, double theta);

std::vector<double> sample(std::size_t count, double theta, std::uint64_t seed);

}  // namespace unml::genlog
