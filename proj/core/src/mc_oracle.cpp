#include "unml/mc_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "unml/error.hpp"
#include "unml/gaussian_nml.hpp"
#include "unml/genlogistic.hpp"
#include "unml/mixture_select.hpp"
#include "unml/parallel.hpp"
#include "unml/random.hpp"

namespace unml::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2PiE = 2.8378770664093454836;
constexpr int kMaxCells = 12;

struct ChunkSums {
  double sum = 0.0;     // of w / w_max
  double sum_sq = 0.0;
  std::int64_t accepted = 0;
};

// Eigenvalues of a small symmetric covariance, ascending.
void small_eigenvalues(int m, const double* cov, double* out) {
  if (m == 1) {
    out[0] = cov[0];
    return;
  }
  if (m == 2) {
    const double a = cov[0], b = cov[1], d = cov[3];
    const double mid = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), b);
    out[0] = mid - rad;
    out[1] = mid + rad;
    return;
  }
  Eigen::Map<const Eigen::MatrixXd> map(cov, m, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(map, Eigen::EigenvaluesOnly);
  for (int j = 0; j < m; ++j) out[j] = solver.eigenvalues()[j];
}

// Standard normal pair by Box-Muller on the portable uniform.
std::pair<double, double> normal_pair(Rng& rng) {
  const double r = std::sqrt(-2.0 * std::log(uniform_open01(rng)));
  const double t = 2.0 * std::numbers::pi * uniform01(rng);
  return {r * std::cos(t), r * std::sin(t)};
}

// Samples (y_bar, Z) uniformly on [-sqrt R, sqrt R]^m x Ball_d(radius), with
// Z the (n-1) x m Helmert residual block and d = (n-1) m.
ChunkSums run_chunk(int m, std::int64_t n, const DomainSpec& spec, double radius,
                    double log_w_max, std::int64_t count, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(m);
  std::array<double, kMaxCells> z{};
  std::array<double, kMaxCells * kMaxCells> cov{};
  std::array<double, kMaxCells> eig{};
  const double nd = static_cast<double>(n);
  const double sqrt_r = std::sqrt(spec.R());
  const double const_term = -0.5 * static_cast<double>(m) * nd * kLog2PiE;
  const double inv_d = 1.0 / static_cast<double>(d);

  ChunkSums out;
  for (std::int64_t s = 0; s < count; ++s) {
    double norm2 = 0.0;
    for (int j = 0; j < m; ++j) {
      const double mu = sqrt_r * (2.0 * uniform01(rng) - 1.0);
      norm2 += mu * mu;
    }
    double z2 = 0.0;
    for (std::size_t c = 0; c < d; c += 2) {
      const auto [a, b] = normal_pair(rng);
      z[c] = a;
      if (c + 1 < d) z[c + 1] = b;
    }
    for (std::size_t c = 0; c < d; ++c) z2 += z[c] * z[c];
    const double scale = radius * std::pow(uniform_open01(rng), inv_d) / std::sqrt(z2);
    if (norm2 > spec.R()) continue;

    // Sigma_hat = Z^T Z / n; Z is stored row-major as (n-1) x m.
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        double acc = 0.0;
        for (std::int64_t i = 0; i + 1 < n; ++i)
          acc += z[static_cast<std::size_t>(i * m + a)] * z[static_cast<std::size_t>(i * m + b)];
        cov[static_cast<std::size_t>(a * m + b)] = cov[static_cast<std::size_t>(b * m + a)] =
            acc * scale * scale / nd;
      }
    }
    small_eigenvalues(m, cov.data(), eig.data());

    bool inside = true;
    double sum_log = 0.0;
    for (int j = 0; j < m && inside; ++j) {
      const double lam = eig[static_cast<std::size_t>(j)];
      inside = lam >= spec.eps1()[j] && lam <= spec.eps2()[j];
      if (inside) sum_log += std::log(lam);
    }
    if (!inside) continue;

    const double w = std::exp(const_term - 0.5 * nd * sum_log - log_w_max);
    out.sum += w;
    out.sum_sq += w * w;
    ++out.accepted;
  }
  return out;
}

double log_sum_exp(const std::vector<double>& terms) {
  double hi = kNegInf;
  for (double t : terms) hi = std::max(hi, t);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

double log_det_spd(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::singular_covariance, std::string(what) + " is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

double residual_radius(std::int64_t n, const DomainSpec& spec) {
  double trace_max = 0.0;
  for (double e : spec.eps2()) trace_max += e;
  return std::sqrt(static_cast<double>(n) * trace_max);
}

double sampling_log_volume(std::int64_t n, const DomainSpec& spec) {
  const double md = spec.dim();
  const double d = static_cast<double>(n - 1) * md;
  const double log_ball = 0.5 * d * std::log(std::numbers::pi) +
                          d * std::log(residual_radius(n, spec)) - gaussian::log_gamma(0.5 * d + 1.0);
  return 0.5 * md * std::log(static_cast<double>(n)) + md * std::log(2.0 * std::sqrt(spec.R())) + log_ball;
}

McEstimate mc_log_C_dataspace(int m, std::int64_t n, const DomainSpec& spec,
                              std::int64_t samples, std::uint64_t seed, unsigned workers) {
  if (m < 1 || m != spec.dim()) throw Error(Errc::invalid_input, "m does not match the domain spec");
  if (n < m + 1) throw Error(Errc::domain, "n must be >= m + 1");
  if (static_cast<std::int64_t>(m) * n > kMaxCells) {
    std::ostringstream msg;
    msg << "m*n = " << m * n << " exceeds the desk-scale limit of " << kMaxCells;
    throw Error(Errc::invalid_input, msg.str());
  }
  if (samples < 10'000) throw Error(Errc::invalid_input, "samples must be >= 10^4");

  const double radius = residual_radius(n, spec);
  const double nd = static_cast<double>(n);
  double sum_log_eps1 = 0.0;
  for (double e : spec.eps1()) sum_log_eps1 += std::log(e);
  // Largest value f(y; theta_hat(y)) can take on Y; weights are scaled by it.
  const double log_w_max = -0.5 * static_cast<double>(m) * nd * kLog2PiE - 0.5 * nd * sum_log_eps1;

  const auto chunks = static_cast<std::size_t>((samples + kMcChunk - 1) / kMcChunk);
  std::vector<ChunkSums> partial(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto begin = static_cast<std::int64_t>(c) * kMcChunk;
    const auto count = std::min(kMcChunk, samples - begin);
    partial[c] = run_chunk(m, n, spec, radius, log_w_max, count,
                           derive_seed(seed, {static_cast<std::uint64_t>(c)}));
  });

  long double sum = 0.0L, sum_sq = 0.0L;
  std::int64_t accepted = 0;
  for (const auto& p : partial) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    accepted += p.accepted;
  }
  if (accepted == 0)
    throw Error(Errc::degenerate_estimate,
                "no sample fell inside the domain; use more samples or a wider eps interval");

  const long double N = static_cast<long double>(samples);
  const long double mean = sum / N;
  const long double var = std::max(0.0L, sum_sq / N - mean * mean);

  McEstimate out;
  out.samples = samples;
  out.accepted = accepted;
  out.seed = seed;
  out.log_volume = sampling_log_volume(n, spec);
  out.log_value = static_cast<double>(std::log(mean)) + log_w_max + out.log_volume;
  out.std_error_log = static_cast<double>(std::sqrt(var / N) / mean);
  return out;
}

double quad_log_C_m1(std::int64_t n, const DomainSpec& spec) {
  if (spec.dim() != 1) throw Error(Errc::invalid_input, "quad_log_C_m1 needs m = 1");
  if (n < 2) throw Error(Errc::domain, "quad_log_C_m1 needs n >= 2");
  const double e1 = spec.eps1()[0];
  const double e2 = spec.eps2()[0];
  if (!(e1 < e2)) return kNegInf;

  using boost::math::quadrature::gauss_kronrod;
  const std::array<double, 1> at_e1{e1};
  const double shift = gaussian::log_g_lambda(1, n, at_e1);
  auto g = [&](double lam) {
    const std::array<double, 1> l{lam};
    return std::exp(gaussian::log_g_lambda(1, n, l) - shift);
  };
  // The integrand does not depend on mu, but both integrals are taken
  // numerically so nothing here leans on the closed form.
  auto inner = [&](double) { return gauss_kronrod<double, 61>::integrate(g, e1, e2, 10, 1e-12); };
  const double root_r = std::sqrt(spec.R());
  const double value = gauss_kronrod<double, 31>::integrate(inner, -root_r, root_r, 5, 1e-12);
  return std::log(value) + shift;
}

double brute_mixture_norm(int K, std::int64_t n, int m, const DomainSpec& spec,
                          std::int64_t max_compositions) {
  if (K < 1 || n < 0) throw Error(Errc::invalid_input, "need K >= 1 and n >= 0");
  if (m != spec.dim()) throw Error(Errc::invalid_input, "m does not match the domain spec");

  // Number of compositions binom(n + K - 1, K - 1), counted in floating point.
  double count = 1.0;
  for (int i = 1; i < K; ++i) count *= static_cast<double>(n + i) / static_cast<double>(i);
  if (count > static_cast<double>(max_compositions)) {
    std::ostringstream msg;
    msg << count << " compositions exceed the budget of " << max_compositions;
    throw Error(Errc::budget_exceeded, msg.str());
  }

  const double log_b = gaussian::log_B(spec);
  const double nd = static_cast<double>(n);
  std::vector<double> log_fact(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t h = 1; h < log_fact.size(); ++h)
    log_fact[h] = log_fact[h - 1] + std::log(static_cast<double>(h));

  std::vector<double> terms;
  std::vector<std::int64_t> parts(static_cast<std::size_t>(K), 0);
  auto visit = [&](auto&& self, int k, std::int64_t left) -> void {
    if (k == K - 1) {
      parts[static_cast<std::size_t>(k)] = left;
      double t = log_fact[static_cast<std::size_t>(n)];
      for (auto h : parts) {
        t -= log_fact[static_cast<std::size_t>(h)];
        if (h > 0) t += static_cast<double>(h) * std::log(static_cast<double>(h) / nd);
        t += mixture::log_cluster_norm(h, m, log_b);
      }
      terms.push_back(t);
      return;
    }
    for (std::int64_t h = 0; h <= left; ++h) {
      parts[static_cast<std::size_t>(k)] = h;
      self(self, k + 1, left - h);
    }
  };
  visit(visit, 0, n);
  return log_sum_exp(terms);
}

double log_g1(const Eigen::VectorXd& mu_hat, const Eigen::VectorXd& mu,
              const Eigen::MatrixXd& sigma, std::int64_t n) {
  const double md = static_cast<double>(mu.size());
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd d = mu_hat - mu;
  const double quad = d.dot(sigma.llt().solve(d));
  return -0.5 * md * (kLog2Pi - std::log(nd)) - 0.5 * log_det_spd(sigma, "Sigma") -
         0.5 * nd * quad;
}

double log_g2(const Eigen::MatrixXd& sigma_hat, const Eigen::MatrixXd& sigma, std::int64_t n) {
  const int m = static_cast<int>(sigma.rows());
  const double md = m;
  const double nd = static_cast<double>(n);
  const double a = 0.5 * (nd - 1.0);
  if (!(a > 0.5 * (md - 1.0))) throw Error(Errc::domain, "log_g2 needs n >= m + 1");
  double log_gamma_m = 0.25 * md * (md - 1.0) * std::log(std::numbers::pi);
  for (int j = 1; j <= m; ++j) log_gamma_m += boost::math::lgamma(a + 0.5 * (1.0 - j));
  const double trace = nd * sigma.llt().solve(sigma_hat).trace();
  const double log_det_scaled = log_det_spd(sigma, "Sigma") - md * std::log(nd);
  return 0.5 * (nd - md - 2.0) * log_det_spd(sigma_hat, "Sigma_hat") -
         0.5 * md * (nd - 1.0) * std::numbers::ln2 - 0.5 * (nd - 1.0) * log_det_scaled -
         log_gamma_m - 0.5 * trace;
}

double neg_log_density_direct(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::singular_covariance, "Sigma is not positive definite");
  const double half_log_det = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double md = static_cast<double>(mu.size());
  double out = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd d = rows.row(i).transpose() - mu;
    const Eigen::VectorXd z = llt.matrixL().solve(d);
    out += 0.5 * md * kLog2Pi + half_log_det + 0.5 * z.squaredNorm();
  }
  return out;
}

double kolmogorov_survival(double lambda) noexcept {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= l) = sqrt(2 pi)/l sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 l^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(c * odd * odd);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsReport ks_test(std::span<double> sample, const std::function<double(double)>& cdf,
                 double level) {
  if (sample.empty()) throw Error(Errc::invalid_input, "KS test needs a sample");
  std::sort(sample.begin(), sample.end());
  const double N = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / N - f, f - static_cast<double>(i) / N});
  }
  KsReport out;
  out.statistic = d;
  out.replications = static_cast<int>(sample.size());
  const double root_n = std::sqrt(N);
  out.p_value = kolmogorov_survival((root_n + 0.12 + 0.11 / root_n) * d);
  out.pass = out.p_value >= level;
  return out;
}

KsReport ks_gamma_check(std::int64_t n, double theta, int replications, std::uint64_t seed,
                        double null_theta) {
  if (n < 1) throw Error(Errc::invalid_input, "n must be >= 1");
  if (replications < 100) throw Error(Errc::invalid_input, "replications must be >= 100");
  if (!(theta > 0.0 && null_theta > 0.0)) throw Error(Errc::domain, "theta must be positive");
  std::vector<double> stats(static_cast<std::size_t>(replications));
  for (int r = 0; r < replications; ++r) {
    const auto x = genlog::sample(static_cast<std::size_t>(n), theta,
                                  derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    double s = 0.0;
    for (double v : x) s += genlog::softplus_neg(v);  // = n / theta_hat
    stats[static_cast<std::size_t>(r)] = s;
  }
  const double shape = static_cast<double>(n);
  return ks_test(stats, [&](double t) {
    return t <= 0.0 ? 0.0 : boost::math::gamma_p(shape, null_theta * t);
  });
}

}  // namespace unml::oracle
