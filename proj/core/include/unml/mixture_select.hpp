#pragma once

// Complete-data code-length of a Gaussian mixture with hard labels, the
// mixture normalization term, classification-EM clustering and selection
// of K by minimizing the total uNML code-length.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "unml/core_stats.hpp"

namespace unml::mixture {

/// Hard labels z^n. Stored 0-based; serialized 1-based.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::vector<int> labels, int K);

  int K() const noexcept { return static_cast<int>(counts_.size()); }
  std::int64_t n() const noexcept { return static_cast<std::int64_t>(labels_.size()); }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }

  /// Row indices carrying label k.
  std::vector<Eigen::Index> members(int k) const;

  /// True when every count is 0 or >= m + 1.
  bool valid_for(int m) const noexcept;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<int> labels_;
  std::vector<std::int64_t> counts_;
};

/// -log f(x^n, z^n; theta_hat) =
///   -sum_k h_k log(h_k/n) + sum_k (m h_k / 2) log 2 pi e + sum_k sum_j (h_k/2) log lambda_j^{(k)}.
/// Empty clusters contribute nothing.
double complete_data_term(const Dataset& data, const Assignment& z);

/// complete_data_term(data, z1) - complete_data_term(data, z2). Invariant
/// under x -> x/alpha since both sides carry the same -nm log alpha shift.
double codelength_difference(const Dataset& data, const Assignment& z1, const Assignment& z2);

/// log C_K(n): the sum over label sequences of the maximized complete-data
/// likelihood, factorized over cluster sizes,
///   C_K(n) = sum_{h_1+..+h_K=n} n!/prod h_k! * prod (h_k/n)^{h_k} * prod C_u(m, h_k),
/// evaluated by the O(K n^2) recursion
///   C_K(n) = sum_s binom(n,s) (s/n)^s ((n-s)/n)^{n-s} C_{K-1}(s) C_u(n-s).
/// C_u(h) is taken as 1 for h = 0 and 0 for 1 <= h <= m (no MLE there).
double log_mixture_norm(int K, std::int64_t n, int m, const DomainSpec& spec);

/// log C_u term for a cluster of size h under the conventions above
/// (-infinity for 1 <= h <= m).
double log_cluster_norm(std::int64_t h, int m, double log_b);

struct ClusterOptions {
  int max_rounds = 500;
  double tolerance = 1e-9;  // nats
  int max_repairs = 10;
};

/// Hard-assignment descent on complete_data_term. Seeded k-means++ style
/// initialization over row indices, so rescaled data yields the same
/// initial centers (scaled). Every cluster ends with >= m + 1 members.
/// Deterministic in (data, K, seed).
Assignment cluster(const Dataset& data, int K, std::uint64_t seed,
                   const ClusterOptions& options = {});

struct KRange {
  int lo = 1;
  int hi = 1;
};

enum class Eps1Mode {
  fixed,    // use spec.eps1 as given
  derived,  // min cluster eigenvalue over the run / 10, floored at 1e-8
};

struct SelectOptions {
  int restarts = 8;
  unsigned workers = 1;  // 0 = hardware concurrency
  Eps1Mode eps1_mode = Eps1Mode::fixed;
  ClusterOptions cluster;
};

enum class KStatus {
  ok,
  infeasible,  // n < K (m + 1)
  failed,      // every restart hit a persistent singular cluster
};

const char* to_string(KStatus status) noexcept;

struct KEntry {
  int K = 0;
  KStatus status = KStatus::infeasible;
  double data_term = 0.0;
  double log_norm = 0.0;
  double total = 0.0;
  int best_restart = -1;
  bool in_domain = false;  // every nonempty cluster's MLE inside spec
  Assignment assignment;
};

struct ModelSelectionReport {
  std::vector<KEntry> entries;
  int selected_K = 0;
  double alpha = 1.0;  // filled in by pipelines that rescale
  std::optional<DomainSpec> spec;  // the spec actually used
  std::uint64_t seed = 0;
  int restarts = 0;
};

/// Evaluates every K in the range: best-of-restarts clustering (by data
/// term), total = complete_data_term + log_mixture_norm. selected_K is the
/// argmin of total with ties going to the smaller K. Data must already be
/// scaled into the domain. Throws infeasible_k if no K in range fits.
ModelSelectionReport select_K(const Dataset& data, KRange range, const DomainSpec& spec,
                              std::uint64_t seed, const SelectOptions& options = {});

/// The eps1 that Eps1Mode::derived picks given the smallest eigenvalue seen.
double derived_eps1(double min_cluster_eigenvalue, double eps2_floor);

}  // namespace unml::mixture
