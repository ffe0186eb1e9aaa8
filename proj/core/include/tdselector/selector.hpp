#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdselector/corpus.hpp"
#include "tdselector/similarity.hpp"

namespace tdselector {

enum class NormalizationKind { Linear, Logistic, SquareRoot, Logarithmic, InverseCotangent };

std::string_view to_string(NormalizationKind kind);
/// Accepts "linear", "logistic", "sqrt", "log", "arctan" and the long names.
NormalizationKind parse_normalization(std::string_view text);

/// Minimum and maximum defect count over a candidate pool; only Linear uses it.
struct DefectRange {
  std::uint32_t min = 0;
  std::uint32_t max = 0;

  static DefectRange of(std::span<const Instance> pool);
};

double normalize_defect_count(NormalizationKind kind, std::uint32_t defects, DefectRange range,
                              bool clip_logarithmic = false);

struct SelectorConfig {
  SimilarityKind similarity = SimilarityKind::Euclidean;
  DistanceTransform distance_transform = DistanceTransform::Reciprocal;
  NormalizationKind normalization = NormalizationKind::Linear;
  double alpha = 1.0;
  std::size_t k = 10;
  /// Instances with at least this many defects are selected unconditionally.
  std::optional<std::uint32_t> bug_threshold;
  double alpha_step = 0.1;
  bool clip_logarithmic = false;

  /// Throws ConfigError.
  void validate() const;
};

struct ScoredCandidate {
  InstanceId id;
  double sim = 0.0;
  double norm_defects = 0.0;
  double score = 0.0;
};

/// A candidate in a per-test ranking. `rank` is dense and 1-based: candidates
/// with equal scores share a rank.
struct RankedCandidate : ScoredCandidate {
  std::size_t rank = 0;
};

ScoredCandidate score_pair(const Instance& candidate, const Instance& test, const SelectorConfig& cfg,
                           DefectRange range);

/// Every pool instance ranked against `test`, best first, ties ordered by id.
std::vector<RankedCandidate> rank_candidates(std::span<const Instance> pool, const Instance& test,
                                             const SelectorConfig& cfg);

struct TestRanking {
  InstanceId test;
  std::vector<RankedCandidate> top_k;
};

struct SelectionResult {
  /// Final training set, duplicate-free, ordered by id.
  std::vector<Instance> selected;
  /// One entry per test instance, in test-set order.
  std::vector<TestRanking> per_test_topk;
  /// Ids taken directly because of the bug threshold, ordered by id.
  std::vector<InstanceId> forced;
  double alpha_used = 1.0;
  std::vector<std::string> warnings;

  bool is_forced(const InstanceId& id) const;
};

/// Pairwise similarities between a candidate pool and a test set, computed
/// once and reused for every alpha, k and normalization. Holds views of both
/// inputs; they must outlive this object.
class PreparedSelection {
 public:
  PreparedSelection(std::span<const Instance> pool, std::span<const Instance> tests,
                    SimilarityKind kind, DistanceTransform transform = DistanceTransform::Reciprocal,
                    unsigned threads = 1);

  std::span<const Instance> pool() const noexcept { return pool_; }
  std::span<const Instance> tests() const noexcept { return tests_; }
  SimilarityKind similarity() const noexcept { return kind_; }
  DistanceTransform distance_transform() const noexcept { return transform_; }

  double similarity(std::size_t test, std::size_t candidate) const {
    return sims_[test * pool_.size() + candidate];
  }

  /// Dispatches on `cfg.bug_threshold`. `cfg.similarity` and
  /// `cfg.distance_transform` must match the prepared ones.
  SelectionResult select(const SelectorConfig& cfg) const;

 private:
  SelectionResult select_ranked(const SelectorConfig& cfg, const std::vector<bool>* excluded) const;

  std::span<const Instance> pool_;
  std::span<const Instance> tests_;
  SimilarityKind kind_;
  DistanceTransform transform_;
  std::vector<double> sims_;
  std::vector<std::size_t> by_id_;  // pool indices sorted by id
  unsigned threads_;
};

/// Top-k per test instance by descending score, tie-inclusive at the k-th
/// rank, merged and deduplicated. k larger than the pool selects everything.
/// Ignores `cfg.bug_threshold`. Throws EmptyPoolError on an empty pool.
SelectionResult select_training_set(std::span<const Instance> pool, std::span<const Instance> tests,
                                    const SelectorConfig& cfg);

/// Forces every instance with at least `*cfg.bug_threshold` defects into the
/// result, then runs select_training_set on the remainder. An empty remainder
/// skips the ranking stage and records a warning.
SelectionResult select_with_bug_threshold(std::span<const Instance> pool,
                                          std::span<const Instance> tests, const SelectorConfig& cfg);

/// select_with_bug_threshold when a threshold is configured, otherwise
/// select_training_set.
SelectionResult select(std::span<const Instance> pool, std::span<const Instance> tests,
                       const SelectorConfig& cfg);

/// Grid {0, step, 2*step, ..., 1}. Throws ConfigError if step does not divide 1.
std::vector<double> alpha_grid(double step);

struct AlphaPoint {
  double alpha = 0.0;
  double auc = 0.0;
};

struct AlphaSearch {
  double alpha = 0.0;
  double best_auc = 0.0;
  /// Ascending alpha.
  std::vector<AlphaPoint> trace;
};

/// Maps a selection to the AUC it achieves.
using AucOracle = std::function<double(const SelectionResult&)>;

/// Scans the alpha grid upward and keeps the first maximum. Any exception
/// from the oracle is rethrown as OracleError carrying the failing alpha.
AlphaSearch optimize_alpha(const PreparedSelection& prepared, const SelectorConfig& cfg,
                           const AucOracle& oracle);
AlphaSearch optimize_alpha(std::span<const Instance> pool, std::span<const Instance> tests,
                           const SelectorConfig& cfg, const AucOracle& oracle);

}  // namespace tdselector
