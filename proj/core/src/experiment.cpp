#include "tdselector/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "parallel.hpp"
#include "tdselector/error.hpp"

namespace tdselector {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// AUC of the model trained on a selection, memoized on the selected ids.
/// Many grid points select the same training set.
class CachedEvaluator {
 public:
  CachedEvaluator(std::span<const Instance> tests, const LogisticHyper& hyper) : tests_(tests), hyper_(hyper) {}

  double operator()(const SelectionResult& sel) {
    std::vector<InstanceId> key;
    key.reserve(sel.selected.size());
    for (const auto& inst : sel.selected) key.push_back(inst.id);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double value = evaluate_auc(sel.selected, tests_, hyper_);
    cache_.emplace(std::move(key), value);
    return value;
  }

 private:
  std::span<const Instance> tests_;
  LogisticHyper hyper_;
  std::map<std::vector<InstanceId>, double> cache_;
};

/// Deterministic shuffle from mt19937_64 words; std::shuffle is not portable.
void portable_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

struct HoldOut {
  std::vector<Instance> pool;
  std::vector<Instance> validation;
};

HoldOut split_holdout(std::span<const Instance> pool, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  portable_shuffle(idx, rng);
  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, pool.size() - 1);
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::sort(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  HoldOut h;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_val ? h.validation : h.pool).push_back(pool[idx[i]]);
  const auto pos = std::count_if(h.validation.begin(), h.validation.end(),
                                 [](const Instance& x) { return x.label() == 1; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(h.validation.size())) {
    throw ValidationError("held-out slice contains a single class; increase holdout_fraction");
  }
  return h;
}

struct SimilarityTables {
  std::unique_ptr<PreparedSelection> main;
  std::unique_ptr<PreparedSelection> validation;
};

/// Evaluates one selector configuration on a prepared target.
void evaluate_config(const SelectorConfig& sel, const ExperimentConfig& cfg, const SimilarityTables& tables,
                     CachedEvaluator& test_eval, CachedEvaluator* val_eval, TargetOutcome& out) {
  const auto start = Clock::now();
  SelectorConfig nod = sel;
  nod.alpha = 1.0;
  nod.bug_threshold.reset();

  if (cfg.optimize_alpha) {
    if (tables.validation) {
      const AlphaSearch search =
          optimize_alpha(*tables.validation, sel, [&](const SelectionResult& r) { return (*val_eval)(r); });
      out.alpha = search.alpha;
      out.trace = search.trace;
    } else {
      const AlphaSearch search =
          optimize_alpha(*tables.main, sel, [&](const SelectionResult& r) { return test_eval(r); });
      out.alpha = search.alpha;
      out.trace = search.trace;
    }
  } else {
    out.alpha = sel.alpha;
  }

  SelectorConfig chosen = sel;
  chosen.alpha = out.alpha;
  const SelectionResult final_sel = tables.main->select(chosen);
  out.auc = test_eval(final_sel);
  if (!sel.bug_threshold && cfg.optimize_alpha && !tables.validation) {
    out.nod_auc = out.trace.back().auc;
  } else {
    out.nod_auc = test_eval(tables.main->select(nod));
  }
  out.selected_count = final_sel.selected.size();
  out.forced_count = final_sel.forced.size();
  out.warnings = final_sel.warnings;
  const LogisticModel model = train(final_sel.selected, cfg.learner);
  out.model_iterations = model.meta.iterations;
  out.model_converged = model.meta.converged;
  out.model_degenerate = model.meta.degenerate;
  out.ok = true;
  out.seconds = seconds_since(start);
}

/// outcomes[combination][k index] for one target. `datasets` are already
/// standardized when `scope` is None.
std::vector<std::vector<TargetOutcome>> evaluate_target_grid(std::span<const Dataset> datasets, std::size_t target,
                                                             const ExperimentConfig& cfg, ZScoreScope scope,
                                                             std::span<const Combination> combos,
                                                             std::span<const std::size_t> ks) {
  const Dataset& ds = datasets[target];
  TargetOutcome blank;
  blank.target = ds.id();
  blank.project = ds.project;
  blank.repository = ds.repository;
  std::vector<std::vector<TargetOutcome>> out(combos.size(), std::vector<TargetOutcome>(ks.size(), blank));

  auto fail_all = [&](const std::string& message) {
    for (auto& row : out)
      for (auto& o : row) {
        o.ok = false;
        o.error = message;
      }
  };

  CpdpSplit split;
  std::optional<HoldOut> holdout;
  try {
    split = prepare_split(datasets, ds.project, ds.version, scope);
    for (auto& row : out)
      for (auto& o : row) {
        o.pool_size = split.initial_tds.size();
        o.test_size = split.test_set.instances.size();
      }
    const auto pos = split.test_set.defective_count();
    if (pos == 0 || pos == split.test_set.instances.size()) {
      throw UndefinedAucError("test set " + ds.id() + " contains a single class");
    }
    if (cfg.optimize_alpha && cfg.alpha_objective == AlphaObjective::HeldOut) {
      holdout = split_holdout(split.initial_tds, cfg.holdout_fraction, cfg.seed.value_or(0));
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
    return out;
  }

  CachedEvaluator test_eval(split.test_set.instances, cfg.learner);
  std::optional<CachedEvaluator> val_eval;
  if (holdout) val_eval.emplace(holdout->validation, cfg.learner);

  std::map<SimilarityKind, SimilarityTables> tables;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      TargetOutcome& o = out[c][ki];
      try {
        SelectorConfig sel = cfg.selector;
        sel.similarity = combos[c].similarity;
        sel.normalization = combos[c].normalization;
        sel.k = ks[ki];
        auto& t = tables[sel.similarity];
        if (!t.main) {
          t.main = std::make_unique<PreparedSelection>(split.initial_tds, split.test_set.instances, sel.similarity,
                                                       sel.distance_transform);
          if (holdout) {
            t.validation = std::make_unique<PreparedSelection>(holdout->pool, holdout->validation, sel.similarity,
                                                               sel.distance_transform);
          }
        }
        evaluate_config(sel, cfg, t, test_eval, val_eval ? &*val_eval : nullptr, o);
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
      }
    }
  }
  return out;
}

/// Standardizes once up front for the per-project scope so each target
/// does not redo it.
std::pair<std::vector<Dataset>, ZScoreScope> standardized(std::span<const Dataset> datasets, ZScoreScope scope) {
  std::vector<Dataset> copy(datasets.begin(), datasets.end());
  if (scope != ZScoreScope::PerProject) return {std::move(copy), scope};
  for (auto& ds : copy) ds = zscore_normalize(std::move(ds));
  return {std::move(copy), ZScoreScope::None};
}

/// results[target slot][combo][k]; unresolved targets get failed outcomes.
struct GridResults {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<TargetOutcome>>> outcomes;
};

GridResults run_grid(std::span<const Dataset> datasets, const ExperimentConfig& cfg,
                     std::span<const Combination> combos, std::span<const std::size_t> ks) {
  const TargetSelection sel = resolve_targets(datasets, cfg.targets);
  auto [prepared, scope] = standardized(datasets, cfg.zscore);

  GridResults grid;
  grid.outcomes.resize(sel.indices.size() + sel.missing.size());
  detail::parallel_for(sel.indices.size(), detail::resolve_threads(cfg.threads), [&](std::size_t i) {
    grid.outcomes[i] = evaluate_target_grid(prepared, sel.indices[i], cfg, scope, combos, ks);
  });
  for (std::size_t i = 0; i < sel.indices.size(); ++i) grid.names.push_back(datasets[sel.indices[i]].id());
  for (std::size_t m = 0; m < sel.missing.size(); ++m) {
    TargetOutcome o;
    o.target = sel.missing[m];
    o.error = "target '" + sel.missing[m] + "' not found in any repository";
    grid.names.push_back(o.target);
    grid.outcomes[sel.indices.size() + m] =
        std::vector<std::vector<TargetOutcome>>(combos.size(), std::vector<TargetOutcome>(ks.size(), o));
  }
  return grid;
}

}  // namespace

std::vector<Dataset> load_repositories(const ExperimentConfig& cfg) {
  std::vector<Dataset> datasets;
  for (const auto& repo : cfg.repositories) {
    for (const auto& entry : repo.datasets) {
      ColumnMapping mapping = repo.mapping;
      mapping.project = entry.project;
      mapping.version = entry.version;
      mapping.repository = repo.name;
      datasets.push_back(load_dataset(entry.file, mapping));
    }
  }
  return datasets;
}

TargetSelection resolve_targets(std::span<const Dataset> datasets, const std::vector<std::string>& targets) {
  TargetSelection sel;
  std::vector<bool> taken(datasets.size(), false);
  for (const auto& name : targets) {
    bool found = false;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      if (name == "all" || datasets[i].project == name || datasets[i].id() == name) {
        found = true;
        if (!taken[i]) {
          taken[i] = true;
          sel.indices.push_back(i);
        }
      }
    }
    if (!found) sel.missing.push_back(name);
  }
  return sel;
}

bool RunRecord::all_ok() const {
  return !targets.empty() && std::all_of(targets.begin(), targets.end(), [](const TargetOutcome& t) { return t.ok; });
}

std::string combination_name(const SelectorConfig& cfg) {
  std::string name = std::string(to_string(cfg.similarity)) + "+" + std::string(to_string(cfg.normalization));
  if (cfg.bug_threshold) name += "+t" + std::to_string(*cfg.bug_threshold);
  return name;
}

std::vector<Combination> all_combinations() {
  std::vector<Combination> out;
  for (auto s : {SimilarityKind::Cosine, SimilarityKind::Euclidean, SimilarityKind::Manhattan}) {
    for (auto n : {NormalizationKind::Linear, NormalizationKind::Logistic, NormalizationKind::SquareRoot,
                   NormalizationKind::Logarithmic, NormalizationKind::InverseCotangent}) {
      out.push_back({s, n});
    }
  }
  return out;
}

TargetOutcome run_target(std::span<const Dataset> datasets, std::size_t target, const ExperimentConfig& cfg) {
  const Combination combo{cfg.selector.similarity, cfg.selector.normalization};
  const std::size_t k = cfg.selector.k;
  return evaluate_target_grid(datasets, target, cfg, cfg.zscore, std::span(&combo, 1), std::span(&k, 1))[0][0];
}

void refresh_report(RunRecord& record) {
  std::map<std::string, TargetResult> per_target;
  for (const auto& t : record.targets) {
    if (!t.ok) continue;
    per_target[t.target] = TargetResult{t.auc, t.alpha, t.nod_auc, record.combination};
  }
  record.report = per_target.empty() ? EvalReport{} : make_eval_report(per_target);
}

namespace {

RunRecord assemble_record(const ExperimentConfig& cfg, const SelectorConfig& sel, const GridResults& grid,
                          std::size_t combo, std::size_t k_index, double seconds) {
  RunRecord record;
  record.combination = combination_name(sel);
  ExperimentConfig snapshot = cfg;
  snapshot.selector = sel;
  record.config_json = to_json(snapshot);
  for (const auto& per_target : grid.outcomes) record.targets.push_back(per_target[combo][k_index]);
  refresh_report(record);
  record.seconds = seconds;
  return record;
}

}  // namespace

RunRecord run_experiment(std::span<const Dataset> datasets, const ExperimentConfig& cfg) {
  cfg.selector.validate();
  const auto start = Clock::now();
  const Combination combo{cfg.selector.similarity, cfg.selector.normalization};
  const std::size_t k = cfg.selector.k;
  const GridResults grid = run_grid(datasets, cfg, std::span(&combo, 1), std::span(&k, 1));
  return assemble_record(cfg, cfg.selector, grid, 0, 0, seconds_since(start));
}

std::vector<RunRecord> run_combinations(std::span<const Dataset> datasets, const ExperimentConfig& cfg,
                                        std::span<const Combination> combinations) {
  cfg.selector.validate();
  const auto start = Clock::now();
  const std::size_t k = cfg.selector.k;
  const GridResults grid = run_grid(datasets, cfg, combinations, std::span(&k, 1));
  const double seconds = seconds_since(start);
  std::vector<RunRecord> records;
  for (std::size_t c = 0; c < combinations.size(); ++c) {
    SelectorConfig sel = cfg.selector;
    sel.similarity = combinations[c].similarity;
    sel.normalization = combinations[c].normalization;
    records.push_back(assemble_record(cfg, sel, grid, c, 0, seconds));
  }
  return records;
}

SweepTable sweep_k(std::span<const Dataset> datasets, const ExperimentConfig& cfg,
                   std::span<const Combination> combinations, std::size_t k_min, std::size_t k_max) {
  if (k_min < 1 || k_min > k_max) throw ConfigError("k range must satisfy 1 <= k_min <= k_max");
  cfg.selector.validate();
  std::vector<std::size_t> ks;
  for (std::size_t k = k_min; k <= k_max; ++k) ks.push_back(k);
  const GridResults grid = run_grid(datasets, cfg, combinations, ks);

  SweepTable table;
  table.targets = grid.names;
  for (std::size_t t = 0; t < grid.outcomes.size(); ++t) {
    const auto& o = grid.outcomes[t][0][0];
    if (!o.ok) table.errors.push_back(o.target + ": " + o.error);
  }
  for (std::size_t c = 0; c < combinations.size(); ++c) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      SweepRow row;
      row.k = ks[ki];
      row.similarity = combinations[c].similarity;
      row.normalization = combinations[c].normalization;
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& per_target : grid.outcomes) {
        const auto& o = per_target[c][ki];
        row.aucs.push_back(o.ok ? o.auc : std::numeric_limits<double>::quiet_NaN());
        if (o.ok) {
          sum += o.auc;
          ++n;
        }
      }
      row.mean_auc = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace tdselector
