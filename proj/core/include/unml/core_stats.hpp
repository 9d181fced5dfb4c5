#pragma once

// Sufficient statistics of a Gaussian sample, the restricted parameter
// domain Y(R, eps1, eps2) and the rescaling that moves data into it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace unml {

/// n x m sample, one observation per row. Always n >= 1, m >= 1, finite.
class Dataset {
 public:
  explicit Dataset(Eigen::MatrixXd rows);

  static Dataset from_rows(const std::vector<std::vector<double>>& rows);

  Eigen::Index n() const noexcept { return rows_.rows(); }
  Eigen::Index m() const noexcept { return rows_.cols(); }
  const Eigen::MatrixXd& rows() const noexcept { return rows_; }
  auto row(Eigen::Index i) const { return rows_.row(i); }

 private:
  Eigen::MatrixXd rows_;
};

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column j pairs with values[j]
};

struct GaussianMle {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // 1/n normalization
  Eigen::VectorXd eigenvalues; // ascending, clamped at 0
  Eigen::MatrixXd eigenbasis;  // orthonormal columns

  Eigen::Index m() const noexcept { return mean.size(); }
};

/// Eigen decomposition of a symmetric matrix with a deterministic basis:
/// eigenvalues ascending, and the largest-magnitude entry of every
/// eigenvector is nonnegative (first such entry on ties).
SymmetricEigen eigen_sym(const Eigen::MatrixXd& matrix);

GaussianMle compute_mle(const Dataset& data);

/// MLE of the rows selected by `index` (cluster statistics without copying).
GaussianMle compute_mle(const Eigen::MatrixXd& rows, std::span<const Eigen::Index> index);

/// Every entry divided by alpha.
Dataset scale_dataset(const Dataset& data, double alpha);

/// Largest eps2 cap with Vol(O(m))/2^m * cap^{m(m-1)/2} <= 1, where
/// Vol(O(m)) = 2^m pi^{m^2/2} / Gamma_m(m/2). Infinite for m = 1.
double max_eps2_cap(int m);

/// 0.99 * min(1, max_eps2_cap(m)).
double default_eps2_cap(int m);

/// log of Vol(O(m))/2^m * cap^{m(m-1)/2}; must be <= 0 for a valid domain.
double log_orthogonal_volume_factor(int m, double eps2_cap);

/// Restricted domain Y(R, eps1, eps2): ||mu||^2 <= R and
/// eps1[j] <= lambda_j <= eps2[j] <= eps2_cap < 1 (eigenvalues ascending).
class DomainSpec {
 public:
  DomainSpec(double R, std::vector<double> eps1, std::vector<double> eps2, double eps2_cap);

  /// Same bounds in every coordinate.
  static DomainSpec uniform(int m, double R, double eps1, double eps2, double eps2_cap);

  int dim() const noexcept { return static_cast<int>(eps1_.size()); }
  double R() const noexcept { return R_; }
  std::span<const double> eps1() const noexcept { return eps1_; }
  std::span<const double> eps2() const noexcept { return eps2_; }
  double eps2_cap() const noexcept { return eps2_cap_; }

  DomainSpec with_eps1(std::vector<double> eps1) const;

 private:
  double R_;
  std::vector<double> eps1_;
  std::vector<double> eps2_;
  double eps2_cap_;
};

struct ConstraintCheck {
  std::string name;   // "mean_norm", "eigenvalue_lower[j]", "eigenvalue_upper[j]"
  double value = 0.0;
  double bound = 0.0;
  double slack = 0.0; // >= 0 when satisfied
  bool satisfied = true;
};

struct DomainReport {
  bool inside = true;
  std::vector<ConstraintCheck> checks;

  std::vector<ConstraintCheck> violations() const;
  /// "eigenvalue_lower[0]: value 0.001 < bound 0.01; ..." or empty.
  std::string describe_violations() const;
};

DomainReport check_domain(const GaussianMle& mle, const DomainSpec& spec);

struct ScaleChoice {
  double alpha = 1.0;
  bool degenerate = false; // all eigenvalues zero; alpha from the mean alone
};

/// alpha = margin * max(||mu|| / sqrt(R), max_j sqrt(lambda_j / eps2[j]), 1).
/// After scaling by 1/alpha the upper constraints of the domain hold; the
/// lower bounds eps1 are not enforced by alpha.
ScaleChoice choose_scale(const Dataset& data, const DomainSpec& spec, double margin);

}  // namespace unml
