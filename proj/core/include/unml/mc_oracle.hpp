#pragma once

// Independent numerical routes to quantities that gaussian_nml and
// mixture_select compute in closed form: Monte Carlo over data space,
// adaptive quadrature of the reduced integrand, brute-force composition
// enumeration, and KS checks of the generalized-logistic Gamma law.

#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "unml/core_stats.hpp"

namespace unml::oracle {

struct McEstimate {
  double log_value = 0.0;
  double std_error_log = 0.0;  // delta method: sd(w) / (sqrt(N) mean(w))
  std::int64_t samples = 0;
  std::int64_t accepted = 0;
  std::uint64_t seed = 0;
  double log_volume = 0.0;     // log volume of the sampling region
};

/// Sample count handled by one RNG stream in mc_log_C_dataspace.
inline constexpr std::int64_t kMcChunk = 1 << 14;

/// The integrand depends on y^n only through (mu_hat, Sigma_hat). In
/// Helmert coordinates (an orthonormal change of basis of each column of
/// y^n, Jacobian 1) the data split into sqrt(n) mu_hat and an (n-1) x m
/// residual block Z with Z^T Z = n Sigma_hat. Y(R, eps1, eps2) then lies in
/// the product of [-sqrt R, sqrt R]^m for mu_hat and the Frobenius ball
/// ||Z||^2 <= n sum_j eps2[j] for Z.
/// Radius of that ball.
double residual_radius(std::int64_t n, const DomainSpec& spec);
/// log of n^{m/2} (2 sqrt R)^m Vol(Ball_{(n-1)m}(residual_radius)).
double sampling_log_volume(std::int64_t n, const DomainSpec& spec);

/// Estimates log C(M, n) = log int_Y f(y^n; theta_hat(y^n)) dy^n by sampling
/// uniformly over the enclosing region above (uniform in data space up to
/// the isometry). Requires m*n <= 12 and samples >= 10^4. Chunk c of
/// kMcChunk samples always draws from derive_seed(seed, {c}), so the result
/// does not depend on `workers`.
McEstimate mc_log_C_dataspace(int m, std::int64_t n, const DomainSpec& spec,
                              std::int64_t samples, std::uint64_t seed,
                              unsigned workers = 1);

/// m = 1: adaptive Gauss-Kronrod over mu in [-sqrt(R), sqrt(R)] and
/// lambda in [eps1, eps2] of exp(log_g_lambda).
double quad_log_C_m1(std::int64_t n, const DomainSpec& spec);

/// Enumerates every composition (h_1..h_K) of n and log-sum-exps the
/// multinomial-weighted product of cluster normalizers.
double brute_mixture_norm(int K, std::int64_t n, int m, const DomainSpec& spec,
                          std::int64_t max_compositions = 1'000'000);

/// log g1(mu_hat; mu, Sigma): density of the sample mean.
double log_g1(const Eigen::VectorXd& mu_hat, const Eigen::VectorXd& mu,
              const Eigen::MatrixXd& sigma, std::int64_t n);

/// log g2(Sigma_hat; Sigma): density of the 1/n sample covariance (Wishart
/// with n-1 degrees of freedom, rescaled).
double log_g2(const Eigen::MatrixXd& sigma_hat, const Eigen::MatrixXd& sigma, std::int64_t n);

/// -sum_i log N(x_i; mu, Sigma) evaluated row by row via a Cholesky factor.
double neg_log_density_direct(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma);

struct KsReport {
  double statistic = 0.0;  // sup |F_emp - F|
  double p_value = 1.0;
  int replications = 0;
  bool pass = true;        // p_value >= 0.01
};

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda) noexcept;

/// One-sample KS test of `sample` (sorted in place) against `cdf`, using
/// Stephens' correction (sqrt(N) + 0.12 + 0.11/sqrt(N)) D.
KsReport ks_test(std::span<double> sample, const std::function<double(double)>& cdf,
                 double level = 0.01);

/// Draws `replications` samples of n / theta_hat from generalized-logistic
/// data with parameter `theta` and tests them against Gamma(n, 1/null_theta).
KsReport ks_gamma_check(std::int64_t n, double theta, int replications, std::uint64_t seed,
                        double null_theta);

inline KsReport ks_gamma_check(std::int64_t n, double theta, int replications,
                               std::uint64_t seed) {
  return ks_gamma_check(n, theta, replications, seed, theta);
}

}  // namespace unml::oracle
