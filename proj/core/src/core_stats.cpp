#include "unml/core_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "unml/error.hpp"
#include "unml/gaussian_nml.hpp"

namespace unml {

namespace {

void require_finite(const Eigen::MatrixXd& rows) {
  if (!rows.allFinite()) throw Error(Errc::invalid_input, "dataset contains a non-finite entry");
}

GaussianMle mle_from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  // Exact symmetry; the accumulation is symmetric up to rounding only.
  cov = 0.5 * (cov + cov.transpose()).eval();
  auto eig = eigen_sym(cov);
  for (auto& v : eig.values) v = std::max(v, 0.0);
  return GaussianMle{std::move(mean), std::move(cov), std::move(eig.values), std::move(eig.vectors)};
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1)
    throw Error(Errc::invalid_input, "dataset needs n >= 1 rows and m >= 1 columns");
  require_finite(rows_);
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty())
    throw Error(Errc::invalid_input, "dataset needs n >= 1 rows and m >= 1 columns");
  const auto m = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m) {
      std::ostringstream msg;
      msg << "row " << i << " has " << rows[i].size() << " columns, expected " << m;
      throw Error(Errc::invalid_input, msg.str());
    }
    for (Eigen::Index j = 0; j < m; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return Dataset(std::move(out));
}

SymmetricEigen eigen_sym(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw Error(Errc::invalid_input, "eigen_sym needs a non-empty square matrix");
  if (!matrix.allFinite()) throw Error(Errc::invalid_input, "eigen_sym: non-finite entry");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(Errc::invalid_input, "eigen_sym: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::invalid_input, "eigen_sym: decomposition did not converge");

  SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    auto col = out.vectors.col(c);
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < col.size(); ++r)
      if (std::abs(col(r)) > std::abs(col(arg))) arg = r;
    if (col(arg) < 0) col = -col;
  }
  return out;
}

GaussianMle compute_mle(const Dataset& data) {
  if (data.n() < 2) throw Error(Errc::insufficient_data, "covariance needs n >= 2 rows");
  const auto& x = data.rows();
  Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(data.n());
  return mle_from_moments(std::move(mean), std::move(cov));
}

GaussianMle compute_mle(const Eigen::MatrixXd& rows, std::span<const Eigen::Index> index) {
  if (index.size() < 2) throw Error(Errc::insufficient_data, "covariance needs n >= 2 rows");
  const Eigen::Index m = rows.cols();
  const double n = static_cast<double>(index.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (auto i : index) mean += rows.row(i).transpose();
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (auto i : index) {
    const Eigen::VectorXd d = rows.row(i).transpose() - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= n;
  return mle_from_moments(std::move(mean), std::move(cov));
}

Dataset scale_dataset(const Dataset& data, double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0)
    throw Error(Errc::invalid_input, "scale factor alpha must be positive and finite");
  return Dataset(data.rows() / alpha);
}

double log_orthogonal_volume_factor(int m, double eps2_cap) {
  // Vol(O(m)) / 2^m = pi^{m^2/2} / Gamma_m(m/2).
  const double md = m;
  return 0.5 * md * md * std::log(std::numbers::pi) -
         gaussian::log_multivariate_gamma(m, 0.5 * md) +
         0.5 * md * (md - 1.0) * std::log(eps2_cap);
}

double max_eps2_cap(int m) {
  if (m < 1) throw Error(Errc::invalid_input, "dimension must be >= 1");
  if (m == 1) return std::numeric_limits<double>::infinity();
  const double md = m;
  const double log_vol = 0.5 * md * md * std::log(std::numbers::pi) -
                         gaussian::log_multivariate_gamma(m, 0.5 * md);
  return std::exp(-log_vol / (0.5 * md * (md - 1.0)));
}

double default_eps2_cap(int m) { return 0.99 * std::min(1.0, max_eps2_cap(m)); }

DomainSpec::DomainSpec(double R, std::vector<double> eps1, std::vector<double> eps2,
                       double eps2_cap)
    : R_(R), eps1_(std::move(eps1)), eps2_(std::move(eps2)), eps2_cap_(eps2_cap) {
  if (!(std::isfinite(R_) && R_ > 0.0)) throw Error(Errc::invalid_input, "R must be positive");
  if (eps1_.empty() || eps1_.size() != eps2_.size())
    throw Error(Errc::invalid_input, "eps1 and eps2 need the same nonzero length");
  if (!(eps2_cap_ > 0.0 && eps2_cap_ < 1.0))
    throw Error(Errc::invalid_input, "eps2_cap must lie in (0, 1)");
  for (std::size_t j = 0; j < eps1_.size(); ++j) {
    if (!(std::isfinite(eps1_[j]) && eps1_[j] > 0.0 && eps1_[j] <= eps2_[j] &&
          eps2_[j] <= eps2_cap_)) {
      std::ostringstream msg;
      msg << "need 0 < eps1[" << j << "] <= eps2[" << j << "] <= eps2_cap; got " << eps1_[j]
          << ", " << eps2_[j] << ", " << eps2_cap_;
      throw Error(Errc::invalid_input, msg.str());
    }
  }
  if (log_orthogonal_volume_factor(dim(), eps2_cap_) > 0.0) {
    std::ostringstream msg;
    msg << "eps2_cap " << eps2_cap_ << " violates the orthogonal-volume constraint (max "
        << max_eps2_cap(dim()) << " for m=" << dim() << ")";
    throw Error(Errc::invalid_input, msg.str());
  }
}

DomainSpec DomainSpec::uniform(int m, double R, double eps1, double eps2, double eps2_cap) {
  if (m < 1) throw Error(Errc::invalid_input, "dimension must be >= 1");
  return DomainSpec(R, std::vector<double>(static_cast<std::size_t>(m), eps1),
                    std::vector<double>(static_cast<std::size_t>(m), eps2), eps2_cap);
}

DomainSpec DomainSpec::with_eps1(std::vector<double> eps1) const {
  return DomainSpec(R_, std::move(eps1), eps2_, eps2_cap_);
}

std::vector<ConstraintCheck> DomainReport::violations() const {
  std::vector<ConstraintCheck> out;
  std::copy_if(checks.begin(), checks.end(), std::back_inserter(out),
               [](const ConstraintCheck& c) { return !c.satisfied; });
  return out;
}

std::string DomainReport::describe_violations() const {
  std::ostringstream msg;
  bool first = true;
  for (const auto& c : checks) {
    if (c.satisfied) continue;
    if (!first) msg << "; ";
    first = false;
    const bool lower = c.name.starts_with("eigenvalue_lower");
    msg << c.name << ": value " << c.value << (lower ? " < bound " : " > bound ") << c.bound;
  }
  return msg.str();
}

DomainReport check_domain(const GaussianMle& mle, const DomainSpec& spec) {
  if (mle.m() != spec.dim() || mle.eigenvalues.size() != spec.dim())
    throw Error(Errc::invalid_input, "MLE dimension does not match the domain spec");

  DomainReport report;
  auto add = [&](std::string name, double value, double bound, double slack) {
    const bool ok = slack >= 0.0;
    report.inside = report.inside && ok;
    report.checks.push_back({std::move(name), value, bound, slack, ok});
  };

  const double norm2 = mle.mean.squaredNorm();
  add("mean_norm", norm2, spec.R(), spec.R() - norm2);
  for (int j = 0; j < spec.dim(); ++j) {
    const double lam = mle.eigenvalues[j];
    const auto tag = "[" + std::to_string(j) + "]";
    add("eigenvalue_lower" + tag, lam, spec.eps1()[j], lam - spec.eps1()[j]);
    add("eigenvalue_upper" + tag, lam, spec.eps2()[j], spec.eps2()[j] - lam);
  }
  return report;
}

ScaleChoice choose_scale(const Dataset& data, const DomainSpec& spec, double margin) {
  if (!(std::isfinite(margin) && margin >= 1.0))
    throw Error(Errc::invalid_input, "margin must be >= 1");
  const auto mle = compute_mle(data);
  if (mle.m() != spec.dim())
    throw Error(Errc::invalid_input, "dataset dimension does not match the domain spec");

  ScaleChoice out;
  out.degenerate = (mle.eigenvalues.array() == 0.0).all();
  double need = std::max(1.0, std::sqrt(mle.mean.squaredNorm() / spec.R()));
  for (int j = 0; j < spec.dim(); ++j)
    need = std::max(need, std::sqrt(mle.eigenvalues[j] / spec.eps2()[j]));
  out.alpha = margin * need;

  // At margin 1 the formula sits exactly on the boundary; nudge by a few ulps
  // until the rescaled statistics clear the upper constraints.
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto scaled = compute_mle(scale_dataset(data, out.alpha));
    bool ok = scaled.mean.squaredNorm() <= spec.R();
    for (int j = 0; j < spec.dim(); ++j) ok = ok && scaled.eigenvalues[j] <= spec.eps2()[j];
    if (ok) break;
    out.alpha *= 1.0 + 0x1.0p-50;
  }
  return out;
}

}  // namespace unml
