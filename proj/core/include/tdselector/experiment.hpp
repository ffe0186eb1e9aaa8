#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdselector/corpus.hpp"
#include "tdselector/learner.hpp"
#include "tdselector/selector.hpp"
#include "tdselector/stats.hpp"

namespace tdselector {

inline constexpr const char* kToolVersion = "0.1.0";

struct DatasetEntry {
  std::string project;
  std::string version;
  std::filesystem::path file;
};

struct RepositoryConfig {
  std::string name;
  /// Shared column layout; project/version/repository are filled per entry.
  ColumnMapping mapping;
  std::vector<DatasetEntry> datasets;
};

/// Where alpha is tuned. TestSet scores each grid point on the target's own
/// labels; HeldOut tunes on a random slice of the pool instead.
enum class AlphaObjective { TestSet, HeldOut };

struct ExperimentConfig {
  std::vector<RepositoryConfig> repositories;
  /// Project names or dataset ids; "all" expands to every dataset.
  std::vector<std::string> targets{"all"};
  SelectorConfig selector;
  bool optimize_alpha = true;
  AlphaObjective alpha_objective = AlphaObjective::TestSet;
  double holdout_fraction = 0.2;
  ZScoreScope zscore = ZScoreScope::PerProject;
  LogisticHyper learner;
  std::filesystem::path output_dir = "runs";
  std::optional<std::uint64_t> seed;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Reads the JSON config; relative dataset paths resolve against the config
/// file's directory. Throws ConfigError.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir);
std::string to_json(const ExperimentConfig& cfg);

/// Loads every configured dataset. Load errors carry the file name.
std::vector<Dataset> load_repositories(const ExperimentConfig& cfg);

/// Indices into `datasets` for the configured targets, in config order.
/// Unknown names are returned in `missing`.
struct TargetSelection {
  std::vector<std::size_t> indices;
  std::vector<std::string> missing;
};
TargetSelection resolve_targets(std::span<const Dataset> datasets,
                                const std::vector<std::string>& targets);

struct TargetOutcome {
  std::string target;  // dataset id
  std::string project;
  std::string repository;
  bool ok = false;
  std::string error;
  double alpha = 1.0;
  double auc = 0.0;
  /// AUC of the similarity-only selection (alpha = 1, no bug threshold).
  double nod_auc = 0.0;
  std::vector<AlphaPoint> trace;
  std::size_t pool_size = 0;
  std::size_t test_size = 0;
  std::size_t selected_count = 0;
  std::size_t forced_count = 0;
  std::size_t model_iterations = 0;
  bool model_converged = false;
  bool model_degenerate = false;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

struct RunRecord {
  std::string tool_version = kToolVersion;
  /// "<similarity>+<normalization>", plus "+t<threshold>" for a bug threshold.
  std::string combination;
  std::string config_json;
  std::vector<TargetOutcome> targets;
  /// Over successful targets, with NoD as the baseline.
  EvalReport report;
  double seconds = 0.0;

  bool all_ok() const;
};

std::string combination_name(const SelectorConfig& cfg);

/// One target through split, alpha search (or fixed alpha), selection,
/// training and AUC.
TargetOutcome run_target(std::span<const Dataset> datasets, std::size_t target,
                         const ExperimentConfig& cfg);

/// Every configured target; failures are recorded and the rest continue.
RunRecord run_experiment(std::span<const Dataset> datasets, const ExperimentConfig& cfg);

/// Rebuilds `record.report` from the per-target outcomes.
void refresh_report(RunRecord& record);

struct SweepRow {
  std::size_t k = 0;
  SimilarityKind similarity = SimilarityKind::Euclidean;
  NormalizationKind normalization = NormalizationKind::Linear;
  double mean_auc = 0.0;
  /// Parallel to SweepTable::targets; NaN where the target failed.
  std::vector<double> aucs;
};

struct SweepTable {
  std::vector<std::string> targets;
  /// Grouped by combination, ascending k within each.
  std::vector<SweepRow> rows;
  std::vector<std::string> errors;
};

struct Combination {
  SimilarityKind similarity;
  NormalizationKind normalization;
};

/// All 15 similarity x normalization pairs in table order.
std::vector<Combination> all_combinations();

/// AUC versus k (best alpha per target, or the fixed alpha) for each
/// combination. Throws ConfigError unless 1 <= k_min <= k_max.
SweepTable sweep_k(std::span<const Dataset> datasets, const ExperimentConfig& cfg,
                   std::span<const Combination> combinations, std::size_t k_min, std::size_t k_max);

/// Runs every combination with the configured settings, one RunRecord each.
std::vector<RunRecord> run_combinations(std::span<const Dataset> datasets,
                                        const ExperimentConfig& cfg,
                                        std::span<const Combination> combinations);

struct ComparisonTables {
  /// CSV files keyed by file name.
  std::vector<std::pair<std::string, std::string>> csv;
  std::string json;
  /// Combinations with at least one successful target.
  std::size_t comparable = 0;
};

/// Tables built from run records: per-similarity result tables, the pairwise
/// Cliff's delta matrix, the factor summary, and the baseline comparison.
/// `threshold_runs` are optional bug-threshold runs shown in the baseline table.
ComparisonTables build_comparison(std::span<const RunRecord> runs,
                                  std::span<const RunRecord> threshold_runs = {});

}  // namespace tdselector
