#include "unml/mixture_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "unml/error.hpp"
#include "unml/gaussian_nml.hpp"
#include "unml/parallel.hpp"
#include "unml/random.hpp"

namespace unml::mixture {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// x log(x / n), with 0 log 0 = 0.
double xlogx_over(double x, double n) { return x == 0.0 ? 0.0 : x * std::log(x / n); }

struct ClusterFit {
  double log_weight = 0.0;     // log(h_k / n)
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
  double half_log_det = 0.0;   // 0.5 sum_j log lambda_j
};

class Descent {
 public:
  Descent(const Dataset& data, int K, std::uint64_t seed, const ClusterOptions& options)
      : x_(data.rows()),
        n_(data.n()),
        m_(static_cast<int>(data.m())),
        K_(K),
        options_(options),
        rng_(seed) {
    const auto total = compute_mle(data);
    singular_floor_ = 1e-12 * total.eigenvalues.maxCoeff();
  }

  std::vector<int> run() {
    labels_ = initial_labels();
    repair_sizes();

    std::vector<int> best = labels_;
    double best_objective = std::numeric_limits<double>::infinity();
    double previous = std::numeric_limits<double>::infinity();

    for (int round = 0; round < options_.max_rounds; ++round) {
      fit_with_repairs();
      const double objective = current_objective();
      if (objective < best_objective) {
        best_objective = objective;
        best = labels_;
      }
      if (previous - objective < options_.tolerance) break;
      previous = objective;
      if (!reassign()) break;
      repair_sizes();
    }
    return best;
  }

 private:
  std::vector<Eigen::Index> members(int k) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < n_; ++i)
      if (labels_[static_cast<std::size_t>(i)] == k) out.push_back(i);
    return out;
  }

  std::vector<std::int64_t> counts() const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(K_), 0);
    for (int l : labels_) ++c[static_cast<std::size_t>(l)];
    return c;
  }

  double sq_dist(Eigen::Index i, const Eigen::VectorXd& p) const {
    return (x_.row(i).transpose() - p).squaredNorm();
  }

  Eigen::VectorXd centroid(const std::vector<Eigen::Index>& idx) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m_);
    for (auto i : idx) c += x_.row(i).transpose();
    return c / static_cast<double>(idx.size());
  }

  // k-means++ over row indices; distances scale with the data so the drawn
  // indices do not depend on the data's unit.
  std::vector<int> initial_labels() {
    std::vector<Eigen::Index> centers;
    centers.push_back(static_cast<Eigen::Index>(uniform01(rng_) * static_cast<double>(n_)));
    std::vector<double> d2(static_cast<std::size_t>(n_), std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < K_) {
      const Eigen::VectorXd last = x_.row(centers.back()).transpose();
      double total = 0.0;
      for (Eigen::Index i = 0; i < n_; ++i) {
        auto& d = d2[static_cast<std::size_t>(i)];
        d = std::min(d, sq_dist(i, last));
        total += d;
      }
      Eigen::Index pick = -1;
      if (total > 0.0) {
        const double r = uniform01(rng_) * total;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
          acc += d2[static_cast<std::size_t>(i)];
          if (acc > r && d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
      if (pick < 0) {
        // Every point coincides with a center: take any unused index.
        pick = static_cast<Eigen::Index>(uniform01(rng_) * static_cast<double>(n_));
        while (std::find(centers.begin(), centers.end(), pick) != centers.end())
          pick = (pick + 1) % n_;
      }
      centers.push_back(pick);
    }

    std::vector<int> labels(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index i = 0; i < n_; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K_; ++k) {
        const double d = sq_dist(i, x_.row(centers[static_cast<std::size_t>(k)]).transpose());
        if (d < best) {
          best = d;
          labels[static_cast<std::size_t>(i)] = k;
        }
      }
    }
    return labels;
  }

  int largest_cluster(int exclude) const {
    const auto c = counts();
    int arg = -1;
    for (int k = 0; k < K_; ++k) {
      if (k == exclude) continue;
      if (arg < 0 || c[static_cast<std::size_t>(k)] > c[static_cast<std::size_t>(arg)]) arg = k;
    }
    return arg;
  }

  // Moves the donor member nearest to `anchor` into cluster k.
  void pull_nearest(int k, int donor, const Eigen::VectorXd& anchor) {
    Eigen::Index pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (labels_[static_cast<std::size_t>(i)] != donor) continue;
      const double d = sq_dist(i, anchor);
      if (d < best) {
        best = d;
        pick = i;
      }
    }
    labels_[static_cast<std::size_t>(pick)] = k;
  }

  // Every cluster gets at least m + 1 members, taken from the largest one.
  void repair_sizes() {
    const auto need = static_cast<std::int64_t>(m_) + 1;
    for (int k = 0; k < K_; ++k) {
      auto c = counts();
      if (c[static_cast<std::size_t>(k)] >= need) continue;
      Eigen::VectorXd anchor;
      if (c[static_cast<std::size_t>(k)] > 0) {
        anchor = centroid(members(k));
      } else {
        // Seed an empty cluster with the donor's outermost point.
        const int donor = largest_cluster(k);
        const auto idx = members(donor);
        const Eigen::VectorXd mid = centroid(idx);
        Eigen::Index far = idx.front();
        for (auto i : idx)
          if (sq_dist(i, mid) > sq_dist(far, mid)) far = i;
        anchor = x_.row(far).transpose();
      }
      while (c[static_cast<std::size_t>(k)] < need) {
        pull_nearest(k, largest_cluster(k), anchor);
        c = counts();
      }
    }
  }

  bool try_fit() {
    fits_.assign(static_cast<std::size_t>(K_), ClusterFit{});
    for (int k = 0; k < K_; ++k) {
      const auto idx = members(k);
      auto mle = compute_mle(x_, idx);
      if (!(mle.eigenvalues[0] > singular_floor_)) {
        singular_cluster_ = k;
        return false;
      }
      auto& f = fits_[static_cast<std::size_t>(k)];
      f.log_weight = std::log(static_cast<double>(idx.size()) / static_cast<double>(n_));
      f.half_log_det = 0.5 * mle.eigenvalues.array().log().sum();
      f.mean = std::move(mle.mean);
      f.basis = std::move(mle.eigenbasis);
      f.eigenvalues = std::move(mle.eigenvalues);
    }
    return true;
  }

  void fit_with_repairs() {
    for (int attempt = 0; !try_fit(); ++attempt) {
      if (attempt >= options_.max_repairs) {
        std::ostringstream msg;
        msg << "cluster " << singular_cluster_ + 1 << " stays singular after "
            << options_.max_repairs << " repairs";
        throw Error(Errc::singular_covariance, msg.str());
      }
      const int k = singular_cluster_;
      const int donor = largest_cluster(k);
      if (counts()[static_cast<std::size_t>(donor)] <= m_ + 1)
        throw Error(Errc::singular_covariance, "no donor cluster can spare a point");
      pull_nearest(k, donor, centroid(members(k)));
    }
  }

  // Per-point contribution to -log f(x, z; theta) up to the constant (m/2) log 2 pi.
  double cost(const ClusterFit& f, Eigen::Index i) const {
    const Eigen::VectorXd proj = f.basis.transpose() * (x_.row(i).transpose() - f.mean);
    return -f.log_weight + f.half_log_det + 0.5 * (proj.array().square() / f.eigenvalues.array()).sum();
  }

  double current_objective() const {
    double out = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i)
      out += cost(fits_[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])], i);
    return out;
  }

  bool reassign() {
    bool changed = false;
    for (Eigen::Index i = 0; i < n_; ++i) {
      int arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K_; ++k) {
        const double c = cost(fits_[static_cast<std::size_t>(k)], i);
        if (c < best) {
          best = c;
          arg = k;
        }
      }
      auto& l = labels_[static_cast<std::size_t>(i)];
      changed = changed || l != arg;
      l = arg;
    }
    return changed;
  }

  const Eigen::MatrixXd& x_;
  Eigen::Index n_;
  int m_;
  int K_;
  ClusterOptions options_;
  Rng rng_;
  double singular_floor_ = 0.0;
  int singular_cluster_ = -1;
  std::vector<int> labels_;
  std::vector<ClusterFit> fits_;
};

struct RestartResult {
  bool ok = false;
  Assignment assignment;
  double data_term = 0.0;
};

void require_feasible(std::int64_t n, int m, int K) {
  if (K < 1) throw Error(Errc::invalid_input, "K must be >= 1");
  if (n < static_cast<std::int64_t>(K) * (m + 1)) {
    std::ostringstream msg;
    msg << "K = " << K << " needs n >= " << static_cast<std::int64_t>(K) * (m + 1)
        << " rows for m = " << m << "; have " << n;
    throw Error(Errc::infeasible_k, msg.str());
  }
}

}  // namespace

const char* to_string(KStatus status) noexcept {
  switch (status) {
    case KStatus::ok: return "ok";
    case KStatus::infeasible: return "infeasible";
    case KStatus::failed: return "failed";
  }
  return "unknown";
}

Assignment::Assignment(std::vector<int> labels, int K)
    : labels_(std::move(labels)), counts_(static_cast<std::size_t>(std::max(K, 0)), 0) {
  if (K < 1) throw Error(Errc::invalid_assignment, "K must be >= 1");
  for (int l : labels_) {
    if (l < 0 || l >= K) {
      std::ostringstream msg;
      msg << "label " << l << " outside [0, " << K << ")";
      throw Error(Errc::invalid_assignment, msg.str());
    }
    ++counts_[static_cast<std::size_t>(l)];
  }
}

std::vector<Eigen::Index> Assignment::members(int k) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == k) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

bool Assignment::valid_for(int m) const noexcept {
  return std::all_of(counts_.begin(), counts_.end(),
                     [m](std::int64_t h) { return h == 0 || h >= m + 1; });
}

double complete_data_term(const Dataset& data, const Assignment& z) {
  const int m = static_cast<int>(data.m());
  if (z.n() != data.n()) throw Error(Errc::invalid_assignment, "label count differs from n");
  if (!z.valid_for(m)) {
    std::ostringstream msg;
    msg << "every cluster needs 0 or >= " << m + 1 << " members";
    throw Error(Errc::invalid_assignment, msg.str());
  }
  const double n = static_cast<double>(data.n());
  double out = 0.0;
  for (int k = 0; k < z.K(); ++k) {
    const auto h = z.counts()[static_cast<std::size_t>(k)];
    if (h == 0) continue;
    const auto idx = z.members(k);
    const auto mle = compute_mle(data.rows(), idx);
    try {
      out += -xlogx_over(static_cast<double>(h), n) + gaussian::gaussian_data_term(mle, h);
    } catch (const Error& e) {
      if (e.code() != Errc::singular_covariance) throw;
      throw Error(Errc::singular_covariance, "cluster " + std::to_string(k + 1) + " is singular");
    }
  }
  return out;
}

double codelength_difference(const Dataset& data, const Assignment& z1, const Assignment& z2) {
  return complete_data_term(data, z1) - complete_data_term(data, z2);
}

double log_cluster_norm(std::int64_t h, int m, double log_b) {
  if (h == 0) return 0.0;
  if (h <= m) return kNegInf;
  return gaussian::log_Cu_given_log_B(m, h, log_b);
}

double log_mixture_norm(int K, std::int64_t n, int m, const DomainSpec& spec) {
  if (K < 1) throw Error(Errc::invalid_input, "K must be >= 1");
  if (n < 0) throw Error(Errc::invalid_input, "n must be >= 0");
  if (m != spec.dim()) throw Error(Errc::invalid_input, "m does not match the domain spec");
  const double log_b = gaussian::log_B(spec);
  const auto size = static_cast<std::size_t>(n) + 1;

  std::vector<double> cu(size), log_fact(size, 0.0);
  for (std::size_t h = 0; h < size; ++h) {
    cu[h] = log_cluster_norm(static_cast<std::int64_t>(h), m, log_b);
    if (h > 0) log_fact[h] = log_fact[h - 1] + std::log(static_cast<double>(h));
  }

  // level[t] = log C_k(t) for t = 0..n.
  std::vector<double> level = cu;
  for (int k = 2; k <= K; ++k) {
    std::vector<double> next(size, kNegInf);
    const std::size_t t_begin = (k == K) ? size - 1 : 0;
    for (std::size_t t = t_begin; t < size; ++t) {
      if (t == 0) {
        next[0] = level[0] + cu[0];
        continue;
      }
      const double td = static_cast<double>(t);
      double acc = kNegInf;
      for (std::size_t s = 0; s <= t; ++s) {
        const double a = level[s];
        const double b = cu[t - s];
        if (a == kNegInf || b == kNegInf) continue;
        const double sd = static_cast<double>(s);
        const double log_w = log_fact[t] - log_fact[s] - log_fact[t - s] + xlogx_over(sd, td) +
                             xlogx_over(td - sd, td);
        acc = log_add(acc, log_w + a + b);
      }
      next[t] = acc;
    }
    level = std::move(next);
  }
  return level[size - 1];
}

Assignment cluster(const Dataset& data, int K, std::uint64_t seed, const ClusterOptions& options) {
  const int m = static_cast<int>(data.m());
  require_feasible(data.n(), m, K);
  if (K == 1) return Assignment(std::vector<int>(static_cast<std::size_t>(data.n()), 0), 1);
  Descent descent(data, K, seed, options);
  return Assignment(descent.run(), K);
}

double derived_eps1(double min_cluster_eigenvalue, double eps2_floor) {
  return std::min(std::max(min_cluster_eigenvalue / 10.0, 1e-8), eps2_floor);
}

ModelSelectionReport select_K(const Dataset& data, KRange range, const DomainSpec& spec,
                              std::uint64_t seed, const SelectOptions& options) {
  const int m = static_cast<int>(data.m());
  if (range.lo < 1 || range.hi < range.lo) throw Error(Errc::invalid_input, "empty K range");
  if (options.restarts < 1) throw Error(Errc::invalid_input, "restarts must be >= 1");
  if (spec.dim() != m) throw Error(Errc::invalid_input, "dataset dimension does not match spec");

  ModelSelectionReport report;
  report.seed = seed;
  report.restarts = options.restarts;

  struct Job {
    int K;
    int restart;
  };
  std::vector<Job> jobs;
  for (int K = range.lo; K <= range.hi; ++K) {
    KEntry entry;
    entry.K = K;
    const bool feasible = data.n() >= static_cast<std::int64_t>(K) * (m + 1);
    entry.status = feasible ? KStatus::ok : KStatus::infeasible;
    report.entries.push_back(std::move(entry));
    if (!feasible) continue;
    // A single cluster has only one labelling.
    const int restarts = (K == 1) ? 1 : options.restarts;
    for (int r = 0; r < restarts; ++r) jobs.push_back({K, r});
  }
  if (jobs.empty()) throw Error(Errc::infeasible_k, "no K in range fits n = " + std::to_string(data.n()));

  std::vector<RestartResult> results(jobs.size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto [K, r] = jobs[j];
    auto& out = results[j];
    try {
      out.assignment = cluster(data, K, derive_seed(seed, {static_cast<std::uint64_t>(K),
                                                           static_cast<std::uint64_t>(r)}),
                               options.cluster);
      out.data_term = complete_data_term(data, out.assignment);
      out.ok = true;
    } catch (const Error& e) {
      if (e.code() != Errc::singular_covariance) throw;
    }
  });

  // Reduce in job order: lowest data term, ties to the earlier restart.
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto& entry = report.entries[static_cast<std::size_t>(jobs[j].K - range.lo)];
    const auto& res = results[j];
    if (!res.ok) continue;
    if (entry.best_restart < 0 || res.data_term < entry.data_term) {
      entry.best_restart = jobs[j].restart;
      entry.data_term = res.data_term;
      entry.assignment = res.assignment;
    }
  }
  for (auto& entry : report.entries)
    if (entry.status == KStatus::ok && entry.best_restart < 0) entry.status = KStatus::failed;

  std::vector<std::vector<GaussianMle>> cluster_mles(report.entries.size());
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < report.entries.size(); ++e) {
    const auto& entry = report.entries[e];
    if (entry.status != KStatus::ok) continue;
    for (int k = 0; k < entry.K; ++k) {
      if (entry.assignment.counts()[static_cast<std::size_t>(k)] == 0) continue;
      cluster_mles[e].push_back(compute_mle(data.rows(), entry.assignment.members(k)));
      min_eig = std::min(min_eig, cluster_mles[e].back().eigenvalues[0]);
    }
  }
  if (!std::isfinite(min_eig))
    throw Error(Errc::singular_covariance, "every K failed with a singular cluster");

  DomainSpec used = spec;
  if (options.eps1_mode == Eps1Mode::derived) {
    const double floor = *std::min_element(spec.eps2().begin(), spec.eps2().end());
    used = spec.with_eps1(std::vector<double>(static_cast<std::size_t>(m), derived_eps1(min_eig, floor)));
  }

  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < report.entries.size(); ++e) {
    auto& entry = report.entries[e];
    if (entry.status != KStatus::ok) continue;
    entry.log_norm = log_mixture_norm(entry.K, data.n(), m, used);
    entry.total = entry.data_term + entry.log_norm;
    entry.in_domain = std::all_of(cluster_mles[e].begin(), cluster_mles[e].end(),
                                  [&](const GaussianMle& g) { return check_domain(g, used).inside; });
    if (entry.total < best_total) {
      best_total = entry.total;
      report.selected_K = entry.K;
    }
  }
  report.spec = used;
  return report;
}

}  // namespace unml::mixture
