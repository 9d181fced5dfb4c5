#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "unml/error.hpp"
#include "unml/genlogistic.hpp"

namespace unml::genlog {
namespace {

template <class Fn>
void expect_errc(Errc code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

double neg_log_lik(const std::vector<double>& x, double theta) {
  double s = 0.0;
  for (double v : x) s -= log_pdf(v, theta);
  return s;
}

// Golden-section search on the negative log-likelihood; no closed form used.
double golden_section_mle(const std::vector<double>& x, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (neg_log_lik(x, c) < neg_log_lik(x, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

TEST(GenLogistic, SpecValidation) {
  EXPECT_NO_THROW(GenLogisticSpec(0.5, 2.0));
  expect_errc(Errc::invalid_input, [] { GenLogisticSpec(0.0, 2.0); });
  expect_errc(Errc::invalid_input, [] { GenLogisticSpec(2.0, 2.0); });
  expect_errc(Errc::invalid_input, [] { GenLogisticSpec(1.0, INFINITY); });
}

TEST(GenLogistic, LogPdfFrozenValues) {
  EXPECT_NEAR(log_pdf(0.0, 1.0), -2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(log_pdf(-745.0, 1.0), -745.0, 1e-12);
  EXPECT_NEAR(log_pdf(-745.0, 3.0), -2233.901387711332, 1e-10);
  EXPECT_NEAR(log_pdf(40.0, 2.5), -39.08370926812584, 1e-12);
  expect_errc(Errc::domain, [] { log_pdf(0.0, 0.0); });
  expect_errc(Errc::invalid_input, [] { log_pdf(NAN, 1.0); });
}

TEST(GenLogistic, LogPdfMatchesExtendedPrecision) {
  using big = boost::multiprecision::cpp_bin_float_50;
  for (double x : {-745.0, -100.0, -36.0, -34.0, -1.0, 0.0, 0.5, 20.0, 34.9, 35.1, 300.0}) {
    for (double theta : {0.1, 1.0, 3.0, 50.0}) {
      const big bx = x, bt = theta;
      const big expect = log(bt) - bx - (bt + 1) * log1p(exp(-bx));
      const double e = static_cast<double>(expect);
      EXPECT_LE(std::abs(log_pdf(x, theta) - e), 4e-16 * std::max(1.0, std::abs(e))) << x << " " << theta;
    }
  }
}

TEST(GenLogistic, DensityIntegratesToOne) {
  using boost::math::quadrature::gauss_kronrod;
  for (double theta : {0.3, 1.0, 4.0}) {
    const double mass = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(log_pdf(x, theta)); }, -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 15, 1e-12);
    EXPECT_NEAR(mass, 1.0, 1e-9) << theta;
  }
}

TEST(GenLogistic, MleExamples) {
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(mle(zero), 1.442695040888963, 1e-14);
  expect_errc(Errc::insufficient_data, [] { mle({}); });
  const std::vector<double> huge{800.0, 900.0};
  expect_errc(Errc::domain, [&] { mle(huge); });
}

TEST(GenLogistic, MleMatchesNumericalOptimum) {
  for (double theta : {0.4, 1.0, 2.5, 7.0}) {
    const auto x = sample(300, theta, 11);
    const double closed = mle(x);
    EXPECT_NEAR(closed, golden_section_mle(x, 0.01, 100.0), 1e-6 * closed);
    EXPECT_LT(neg_log_lik(x, closed), neg_log_lik(x, closed * 1.001));
    EXPECT_LT(neg_log_lik(x, closed), neg_log_lik(x, closed * 0.999));
  }
}

TEST(GenLogistic, LogNormFrozenValue) {
  const GenLogisticSpec spec(1.0, std::numbers::e);
  EXPECT_NEAR(log_norm(2, spec), -0.6137056388801094, 1e-14);
  EXPECT_NEAR(log_norm(1, spec), -1.0, 1e-14);
  // The range enters only through log log(theta_max / theta_min).
  EXPECT_NEAR(log_norm(50, GenLogisticSpec(2.0, 2.0 * std::numbers::e)), log_norm(50, spec), 1e-12);
  expect_errc(Errc::invalid_input, [&] { log_norm(0, spec); });
}

TEST(GenLogistic, LogNormFiniteAndSlowlyGrowing) {
  const GenLogisticSpec spec(0.1, 10.0);
  double prev = log_norm(1, spec);
  for (std::int64_t n : {10LL, 100LL, 10'000LL, 1'000'000LL, 100'000'000LL}) {
    const double cur = log_norm(n, spec);
    EXPECT_TRUE(std::isfinite(cur));
    EXPECT_GT(cur, prev);
    // Stirling: n log n - n - log Gamma(n) -> (1/2) log(n / 2 pi).
    EXPECT_NEAR(cur - std::log(std::log(100.0)), 0.5 * std::log(n / (2 * std::numbers::pi)),
                1.0 / static_cast<double>(n));
    prev = cur;
  }
}

TEST(GenLogistic, CodelengthSumsTerms) {
  const GenLogisticSpec spec(0.1, 10.0);
  const auto x = sample(100, 2.0, 3);
  const double theta = mle(x);
  EXPECT_NEAR(codelength(x, spec), neg_log_lik(x, theta) + log_norm(100, spec), 1e-10);
  const GenLogisticSpec narrow(5.0, 6.0);
  expect_errc(Errc::domain_violation, [&] { codelength(x, narrow); });
}

TEST(GenLogistic, QuantileAndCdf) {
  EXPECT_NEAR(quantile(0.25, 1.0), -1.0986122886681098, 1e-15);
  for (double theta : {0.2, 1.0, 5.0})
    for (double u : {1e-12, 0.01, 0.5, 0.99, 1 - 1e-9}) {
      const double x = quantile(u, theta);
      EXPECT_NEAR(cdf(x, theta), u, 1e-12 * std::max(u, 1e-3)) << theta << " " << u;
    }
  expect_errc(Errc::domain, [] { quantile(0.0, 1.0); });
  expect_errc(Errc::domain, [] { quantile(1.0, 1.0); });
}

TEST(GenLogistic, SampleIsDeterministic) {
  EXPECT_EQ(sample(50, 1.5, 9), sample(50, 1.5, 9));
  EXPECT_NE(sample(50, 1.5, 9), sample(50, 1.5, 10));
  for (double v : sample(1000, 0.05, 1)) EXPECT_TRUE(std::isfinite(v));
}

}  // namespace
}  // namespace unml::genlog
