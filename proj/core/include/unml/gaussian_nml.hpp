#pragma once

// Closed-form upper-bound NML (uNML) quantities for a single multivariate
// Gaussian over the restricted domain Y(R, eps1, eps2). All values are in
// nats and computed in the log domain; (n/2e)^{mn/2} alone overflows a
// double near n = 300.

#include <cstdint>
#include <span>

#include "unml/core_stats.hpp"

namespace unml::gaussian {

/// log Gamma(a), Lanczos approximation (boost::math::lgamma, ~1e-15
/// relative for a > 0). Thread-safe, unlike ::lgamma.
double log_gamma(double a);

/// log Gamma_m(a) = m(m-1)/4 log pi + sum_{j=1}^m log Gamma(a + (1-j)/2).
/// Requires a > (m-1)/2.
double log_multivariate_gamma(int m, double a);

/// log B(m, R, eps1) with B = 2^{m+1} R^{m/2} prod_j eps1_j^{-m/2} / (m^{m+1} Gamma(m/2)).
/// Independent of n. This overload only requires R > 0 and eps1_j > 0.
double log_B(int m, double R, std::span<const double> eps1);
double log_B(const DomainSpec& spec);

/// log C_u(M, n) = log B + (mn/2) log(n / 2e) - log Gamma_m((n-1)/2).
/// Requires n >= m + 1.
double log_Cu(int m, std::int64_t n, const DomainSpec& spec);

/// Same as log_Cu, for callers that already hold log B.
double log_Cu_given_log_B(int m, std::int64_t n, double log_b);

/// -log f(x^n; mu_hat, Sigma_hat) = (mn/2) log 2 pi e + (n/2) sum_j log lambda_j.
double gaussian_data_term(const GaussianMle& mle, std::int64_t n);

struct GaussianCodeLength {
  double data_term = 0.0;
  double log_norm = 0.0;
  double total = 0.0;
};

/// uNML code-length of `data`; throws domain_violation (naming the failed
/// constraints) when the MLE is outside `spec`. Rescale first.
GaussianCodeLength unml_codelength_gaussian(const Dataset& data, const DomainSpec& spec);

/// Exact log normalizer for m = 1, where the eigenvalue integral has no
/// Vandermonde factor:
///   C = 2 sqrt(R) * 2 (eps1^{-1/2} - eps2^{-1/2}) * n^{n/2}
///       / (2^{n/2} pi^{1/2} e^{n/2} Gamma((n-1)/2)).
/// -infinity when eps1 == eps2.
double exact_log_C_m1(std::int64_t n, const DomainSpec& spec);

/// log g(lambda): the sufficient-statistic density evaluated at its own
/// parameters, n^{mn/2} / (2^{mn/2} pi^{m/2} e^{mn/2} Gamma_m((n-1)/2))
/// * prod_j lambda_j^{-m/2-1}.
double log_g_lambda(int m, std::int64_t n, std::span<const double> eigenvalues);

}  // namespace unml::gaussian
