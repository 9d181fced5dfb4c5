#include "unml/gaussian_nml.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "unml/error.hpp"

namespace unml::gaussian {

namespace {

constexpr double kLogPi = 1.1447298858494001741;          // log(pi)
constexpr double kLog2PiE = 2.8378770664093454836;        // log(2 pi e)
constexpr double kLog2 = std::numbers::ln2;

void require_dim(int m) {
  if (m < 1) throw Error(Errc::invalid_input, "dimension must be >= 1");
}

void require_sample_size(int m, std::int64_t n) {
  if (n < static_cast<std::int64_t>(m) + 1) {
    std::ostringstream msg;
    msg << "n = " << n << " is too small for dimension m = " << m << " (need n >= m + 1)";
    throw Error(Errc::domain, msg.str());
  }
}

}  // namespace

double log_gamma(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(Errc::domain, "log_gamma needs a > 0");
  return boost::math::lgamma(a);
}

double log_multivariate_gamma(int m, double a) {
  require_dim(m);
  const double md = m;
  if (!(a > 0.5 * (md - 1.0))) {
    std::ostringstream msg;
    msg << "multivariate gamma needs a > (m-1)/2; got a = " << a << ", m = " << m;
    throw Error(Errc::domain, msg.str());
  }
  double out = 0.25 * md * (md - 1.0) * kLogPi;
  for (int j = 1; j <= m; ++j) out += log_gamma(a + 0.5 * (1.0 - j));
  return out;
}

double log_B(int m, double R, std::span<const double> eps1) {
  require_dim(m);
  if (!(R > 0.0 && std::isfinite(R))) throw Error(Errc::invalid_input, "R must be positive");
  if (eps1.size() != static_cast<std::size_t>(m))
    throw Error(Errc::invalid_input, "eps1 must have m entries");
  const double md = m;
  double sum_log_eps = 0.0;
  for (double e : eps1) {
    if (!(e > 0.0 && std::isfinite(e))) throw Error(Errc::invalid_input, "eps1 must be positive");
    sum_log_eps += std::log(e);
  }
  return (md + 1.0) * kLog2 + 0.5 * md * std::log(R) - 0.5 * md * sum_log_eps -
         (md + 1.0) * std::log(md) - log_gamma(0.5 * md);
}

double log_B(const DomainSpec& spec) { return log_B(spec.dim(), spec.R(), spec.eps1()); }

double log_Cu_given_log_B(int m, std::int64_t n, double log_b) {
  require_dim(m);
  require_sample_size(m, n);
  const double md = m;
  const double nd = static_cast<double>(n);
  return log_b + 0.5 * md * nd * (std::log(nd) - kLog2 - 1.0) -
         log_multivariate_gamma(m, 0.5 * (nd - 1.0));
}

double log_Cu(int m, std::int64_t n, const DomainSpec& spec) {
  if (m != spec.dim()) throw Error(Errc::invalid_input, "m does not match the domain spec");
  return log_Cu_given_log_B(m, n, log_B(spec));
}

double gaussian_data_term(const GaussianMle& mle, std::int64_t n) {
  if (n < 1) throw Error(Errc::invalid_input, "n must be >= 1");
  double sum_log = 0.0;
  for (double lam : mle.eigenvalues) {
    if (!(lam > 0.0)) throw Error(Errc::singular_covariance, "covariance has a zero eigenvalue");
    sum_log += std::log(lam);
  }
  const double nd = static_cast<double>(n);
  return 0.5 * static_cast<double>(mle.m()) * nd * kLog2PiE + 0.5 * nd * sum_log;
}

GaussianCodeLength unml_codelength_gaussian(const Dataset& data, const DomainSpec& spec) {
  const int m = static_cast<int>(data.m());
  require_sample_size(m, data.n());
  const auto mle = compute_mle(data);
  const auto report = check_domain(mle, spec);
  if (!report.inside) throw Error(Errc::domain_violation, report.describe_violations());
  GaussianCodeLength out;
  out.data_term = gaussian_data_term(mle, data.n());
  out.log_norm = log_Cu(m, data.n(), spec);
  out.total = out.data_term + out.log_norm;
  return out;
}

double exact_log_C_m1(std::int64_t n, const DomainSpec& spec) {
  if (spec.dim() != 1) throw Error(Errc::invalid_input, "exact_log_C_m1 needs m = 1");
  if (n < 2) throw Error(Errc::domain, "exact_log_C_m1 needs n >= 2");
  const double e1 = spec.eps1()[0];
  const double e2 = spec.eps2()[0];
  if (!(e1 < e2)) return -std::numeric_limits<double>::infinity();
  // eps1^{-1/2} - eps2^{-1/2} = eps1^{-1/2} (1 - sqrt(eps1/eps2))
  const double width = -0.5 * std::log(e1) + std::log1p(-std::sqrt(e1 / e2));
  const double nd = static_cast<double>(n);
  return std::log(4.0) + 0.5 * std::log(spec.R()) + width +
         0.5 * nd * (std::log(nd) - kLog2 - 1.0) - 0.5 * kLogPi - log_gamma(0.5 * (nd - 1.0));
}

double log_g_lambda(int m, std::int64_t n, std::span<const double> eigenvalues) {
  require_dim(m);
  require_sample_size(m, n);
  if (eigenvalues.size() != static_cast<std::size_t>(m))
    throw Error(Errc::invalid_input, "log_g_lambda needs m eigenvalues");
  const double md = m;
  const double nd = static_cast<double>(n);
  double sum_log = 0.0;
  for (double lam : eigenvalues) {
    if (!(lam > 0.0)) throw Error(Errc::singular_covariance, "eigenvalue must be positive");
    sum_log += std::log(lam);
  }
  return 0.5 * md * nd * (std::log(nd) - kLog2 - 1.0) - 0.5 * md * kLogPi -
         log_multivariate_gamma(m, 0.5 * (nd - 1.0)) - (0.5 * md + 1.0) * sum_log;
}

}  // namespace unml::gaussian
