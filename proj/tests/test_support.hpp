#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "unml/core_stats.hpp"

namespace unml::test {

// Test-only generator; std::normal_distribution is fine here since expected
// values never depend on the exact draws.
inline Eigen::MatrixXd normal_rows(Eigen::Index n, const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& chol, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd out(n, mean.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v(mean.size());
    for (auto& c : v) c = z(rng);
    out.row(i) = (mean + chol * v).transpose();
  }
  return out;
}

inline Dataset gaussian_blob(Eigen::Index n, const Eigen::VectorXd& mean, double sd,
                             std::uint64_t seed) {
  const auto m = mean.size();
  return Dataset(normal_rows(n, mean, sd * Eigen::MatrixXd::Identity(m, m), seed));
}

/// Random dataset with a random full covariance whose Cholesky factor has
/// diagonal in [0.5, 2], so the condition number stays moderate.
inline Dataset random_dataset(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::uniform_real_distribution<double> u(-3.0, 3.0), diag(0.5, 2.0), off(-1.0, 1.0);
  Eigen::VectorXd mean(m);
  for (auto& c : mean) c = u(rng);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    chol(i, i) = diag(rng);
    for (Eigen::Index j = 0; j < i; ++j) chol(i, j) = off(rng);
  }
  return Dataset(normal_rows(n, mean, chol, seed));
}

/// Two spherical blobs, first half around -offset, second half around +offset.
inline Dataset two_blobs(Eigen::Index n, Eigen::Index m, double offset, double sd,
                         std::uint64_t seed) {
  const Eigen::Index half = n / 2;
  Eigen::MatrixXd out(n, m);
  out.topRows(half) = normal_rows(half, Eigen::VectorXd::Constant(m, -offset),
                                  sd * Eigen::MatrixXd::Identity(m, m), seed);
  out.bottomRows(n - half) = normal_rows(n - half, Eigen::VectorXd::Constant(m, offset),
                                         sd * Eigen::MatrixXd::Identity(m, m), seed + 1);
  return Dataset(std::move(out));
}

/// Labels 0..K-1 with every cluster >= min_size; remaining rows random.
inline std::vector<int> random_labels(std::int64_t n, int K, int min_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::int64_t i = 0;
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < min_size; ++c) labels[static_cast<std::size_t>(i++)] = k;
  std::uniform_int_distribution<int> pick(0, K - 1);
  for (; i < n; ++i) labels[static_cast<std::size_t>(i)] = pick(rng);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace unml::test
