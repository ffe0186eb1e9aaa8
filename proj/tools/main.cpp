#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tdselector/error.hpp"
#include "tdselector/experiment.hpp"
#include "tdselector/report.hpp"
#include "tdselector/synth.hpp"

namespace fs = std::filesystem;
using namespace tdselector;

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> targets;
  std::string similarity;
  std::string normalization;
  std::string alpha;
  std::size_t k = 0;
  std::string bug_threshold;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--target", o.targets, "Project name, dataset id, or 'all' (repeatable)");
  cmd->add_option("--similarity", o.similarity, "cosine|euclidean|manhattan");
  cmd->add_option("--normalization", o.normalization, "linear|logistic|sqrt|log|arctan");
  cmd->add_option("--alpha", o.alpha, "Fixed alpha in [0,1], or 'optimize'");
  cmd->add_option("--k", o.k, "Neighbours kept per test instance")->check(CLI::PositiveNumber);
  cmd->add_option("--bug-threshold", o.bug_threshold, "Defect count forcing inclusion, or 'off'");
  cmd->add_option("--out", o.out, "Output root directory");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (!o.targets.empty()) cfg.targets = o.targets;
  if (!o.similarity.empty()) cfg.selector.similarity = parse_similarity(o.similarity);
  if (!o.normalization.empty()) cfg.selector.normalization = parse_normalization(o.normalization);
  if (!o.alpha.empty()) {
    if (o.alpha == "optimize") {
      cfg.optimize_alpha = true;
    } else {
      std::size_t used = 0;
      double a = 0.0;
      try {
        a = std::stod(o.alpha, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.alpha.size()) throw ConfigError("--alpha expects a number or 'optimize'");
      cfg.optimize_alpha = false;
      cfg.selector.alpha = a;
    }
  }
  if (o.k > 0) cfg.selector.k = o.k;
  if (!o.bug_threshold.empty()) {
    if (o.bug_threshold == "off") {
      cfg.selector.bug_threshold.reset();
    } else {
      std::size_t used = 0;
      long long t = 0;
      try {
        t = std::stoll(o.bug_threshold, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.bug_threshold.size() || t < 1) throw ConfigError("--bug-threshold expects a positive integer or 'off'");
      cfg.selector.bug_threshold = static_cast<std::uint32_t>(t);
    }
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = o.seed;
  if (o.threads > 0) cfg.threads = o.threads;
  cfg.selector.validate();
  if (cfg.alpha_objective == AlphaObjective::HeldOut && !cfg.seed) {
    throw ConfigError("alpha_objective \"holdout\" needs a seed");
  }
  return cfg;
}

void leakage_note(const ExperimentConfig& cfg) {
  if (cfg.optimize_alpha && cfg.alpha_objective == AlphaObjective::TestSet) {
    std::cerr << "note: alpha is tuned on the target's own labels; reported AUCs are optimistic upper bounds\n";
  }
}

void print_outcome(const TargetOutcome& t) {
  if (t.ok) {
    std::printf("%-24s alpha=%.1f auc=%.3f nod=%.3f selected=%zu/%zu\n", t.target.c_str(), t.alpha, t.auc,
                t.nod_auc, t.selected_count, t.pool_size);
  } else {
    std::printf("%-24s FAILED: %s\n", t.target.c_str(), t.error.c_str());
  }
  for (const auto& w : t.warnings) std::printf("%-24s warning: %s\n", t.target.c_str(), w.c_str());
}

void write_record(const fs::path& dir, const RunRecord& record, const std::string& stem) {
  write_text_file(dir / (stem + ".json"), run_record_to_json(record));
  write_text_file(dir / (stem + ".csv"), run_record_to_csv(record));
  write_text_file(dir / (stem + "_alpha.csv"), alpha_trace_to_csv(record));
}

std::string file_stem(std::string name) {
  for (char& c : name)
    if (c == '+' || c == '/' || c == ' ') c = '_';
  return name;
}

int cmd_select(const Overrides& o) {
  const ExperimentConfig cfg = resolve_config(o);
  leakage_note(cfg);
  const auto datasets = load_repositories(cfg);
  const auto sel = resolve_targets(datasets, cfg.targets);
  for (const auto& m : sel.missing) std::cerr << "error: unknown target '" << m << "'\n";
  const fs::path dir = create_run_directory(cfg.output_dir, "select");
  write_text_file(dir / "config.json", to_json(cfg));
  bool ok = sel.missing.empty();
  for (std::size_t idx : sel.indices) {
    const Dataset& target = datasets[idx];
    try {
      SelectorConfig sc = cfg.selector;
      if (cfg.optimize_alpha) {
        const TargetOutcome t = run_target(datasets, idx, cfg);
        if (!t.ok) throw Error(t.error);
        sc.alpha = t.alpha;
      }
      const CpdpSplit split = prepare_split(datasets, target.project, target.version, cfg.zscore);
      const SelectionResult result = tdselector::select(split.initial_tds, split.test_set.instances, sc);
      write_text_file(dir / ("selection_" + file_stem(target.id()) + ".json"), selection_to_json(result, sc, split));
      std::printf("%-24s alpha=%.1f selected=%zu/%zu forced=%zu\n", target.id().c_str(), result.alpha_used,
                  result.selected.size(), split.initial_tds.size(), result.forced.size());
      for (const auto& w : result.warnings) std::printf("%-24s warning: %s\n", target.id().c_str(), w.c_str());
    } catch (const std::exception& e) {
      std::printf("%-24s FAILED: %s\n", target.id().c_str(), e.what());
      ok = false;
    }
  }
  std::cout << "wrote " << dir.string() << '\n';
  return ok ? 0 : 1;
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig cfg = resolve_config(o);
  leakage_note(cfg);
  const auto datasets = load_repositories(cfg);
  const RunRecord record = run_experiment(datasets, cfg);
  const fs::path dir = create_run_directory(cfg.output_dir, "run");
  write_text_file(dir / "config.json", to_json(cfg));
  write_record(dir, record, "run");
  for (const auto& t : record.targets) print_outcome(t);
  if (!record.report.per_target.empty()) {
    std::printf("mean auc=%.3f (sd %.3f) nod=%.3f growth=%.1f%%\n", record.report.summary.mean,
                record.report.summary.std, record.report.baseline_summary.mean, record.report.growth_of_means);
  }
  std::cout << "wrote " << dir.string() << '\n';
  return record.all_ok() ? 0 : 1;
}

std::vector<Combination> requested_combinations(const Overrides& o, const ExperimentConfig& cfg) {
  std::vector<Combination> out;
  for (const auto& c : all_combinations()) {
    if (!o.similarity.empty() && c.similarity != cfg.selector.similarity) continue;
    if (!o.normalization.empty() && c.normalization != cfg.selector.normalization) continue;
    out.push_back(c);
  }
  return out;
}

int cmd_sweep_k(const Overrides& o, std::size_t k_min, std::size_t k_max) {
  const ExperimentConfig cfg = resolve_config(o);
  leakage_note(cfg);
  const auto datasets = load_repositories(cfg);
  const auto combos = requested_combinations(o, cfg);
  const SweepTable table = sweep_k(datasets, cfg, combos, k_min, k_max);
  const fs::path dir = create_run_directory(cfg.output_dir, "sweep");
  write_text_file(dir / "config.json", to_json(cfg));
  write_text_file(dir / "sweep_k.csv", sweep_to_csv(table));
  for (const auto& e : table.errors) std::cerr << "error: " << e << '\n';
  std::cout << "wrote " << dir.string() << '\n';
  return table.errors.empty() ? 0 : 1;
}

int cmd_compare(const Overrides& o, const std::vector<std::string>& run_files,
                const std::vector<std::string>& threshold_files, std::uint32_t threshold) {
  std::vector<RunRecord> runs, threshold_runs;
  ExperimentConfig cfg;
  if (!run_files.empty()) {
    for (const auto& f : run_files) runs.push_back(run_record_from_json(read_text_file(f)));
    for (const auto& f : threshold_files) threshold_runs.push_back(run_record_from_json(read_text_file(f)));
    cfg.output_dir = o.out.empty() ? fs::path("runs") : fs::path(o.out);
  } else {
    if (o.config.empty()) throw ConfigError("compare needs --config or --runs");
    cfg = resolve_config(o);
    cfg.selector.bug_threshold.reset();
    leakage_note(cfg);
    const auto datasets = load_repositories(cfg);
    runs = run_combinations(datasets, cfg, requested_combinations(o, cfg));
    if (threshold > 0) {
      ExperimentConfig tcfg = cfg;
      tcfg.selector.bug_threshold = threshold;
      const RunRecord best = *std::max_element(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
        const double ma = a.report.per_target.empty() ? -1.0 : a.report.summary.mean;
        const double mb = b.report.per_target.empty() ? -1.0 : b.report.summary.mean;
        return ma < mb;
      });
      const Combination c{parse_similarity(best.combination.substr(0, best.combination.find('+'))),
                          parse_normalization(best.combination.substr(best.combination.find('+') + 1))};
      threshold_runs = run_combinations(datasets, tcfg, std::span(&c, 1));
    }
  }
  const ComparisonTables tables = build_comparison(runs, threshold_runs);
  const fs::path dir = create_run_directory(cfg.output_dir, "compare");
  if (run_files.empty()) write_text_file(dir / "config.json", to_json(cfg));
  for (const auto& r : runs) write_record(dir, r, "run_" + file_stem(r.combination));
  for (const auto& r : threshold_runs) write_record(dir, r, "run_" + file_stem(r.combination));
  for (const auto& [name, body] : tables.csv) write_text_file(dir / name, body);
  write_text_file(dir / "comparison.json", tables.json);
  std::printf("%zu of %zu combinations comparable\n", tables.comparable, runs.size());
  std::cout << "wrote " << dir.string() << '\n';
  return tables.comparable > 0 ? 0 : 1;
}

int cmd_synth(const SynthSpec& spec, std::optional<std::uint64_t> seed, const std::string& out) {
  if (!seed) throw ConfigError("synth needs --seed");
  const auto datasets = generate_repository(spec, *seed);
  const fs::path config = write_repository(datasets, out);
  std::size_t total = 0;
  for (const auto& d : datasets) total += d.instances.size();
  std::printf("%zu projects, %zu instances\n", datasets.size(), total);
  std::cout << "wrote " << config.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training data selection for cross-project defect prediction"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Overrides select_o, run_o, sweep_o, compare_o;
  auto* select_cmd = app.add_subcommand("select", "Write the selected training set and per-test rankings");
  add_common(select_cmd, select_o);

  auto* run_cmd = app.add_subcommand("run", "Split, tune alpha, select, train and score every target");
  add_common(run_cmd, run_o);

  std::size_t k_min = 1, k_max = 10;
  auto* sweep_cmd = app.add_subcommand("sweep-k", "AUC against k for each similarity/normalization pair");
  add_common(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--k-min", k_min, "Smallest k")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--k-max", k_max, "Largest k")->check(CLI::PositiveNumber);

  std::vector<std::string> run_files, threshold_files;
  std::uint32_t compare_threshold = 3;
  auto* compare_cmd = app.add_subcommand("compare", "Result tables across all combinations");
  add_common(compare_cmd, compare_o);
  compare_cmd->get_option("--config")->required(false);
  compare_cmd->add_option("--runs", run_files, "Existing run JSON files instead of running")->check(CLI::ExistingFile);
  compare_cmd->add_option("--threshold-runs", threshold_files, "Existing bug-threshold run JSON files")
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--compare-threshold", compare_threshold,
                          "Bug threshold for the comparison run (0 skips it)");

  SynthSpec spec;
  std::optional<std::uint64_t> synth_seed;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic repository");
  synth_cmd->add_option("--seed", synth_seed, "Random seed")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--projects", spec.projects, "Number of projects");
  synth_cmd->add_option("--min-instances", spec.min_instances, "Smallest project size");
  synth_cmd->add_option("--max-instances", spec.max_instances, "Largest project size");
  synth_cmd->add_option("--metrics", spec.metrics, "Metric columns");
  synth_cmd->add_option("--defect-rate", spec.defect_rate, "Fraction of defective instances");
  synth_cmd->add_option("--informativeness", spec.informativeness, "How much defect counts track label reliability");
  synth_cmd->add_option("--label-noise", spec.label_noise, "Fraction of labels drawn at random");
  synth_cmd->add_option("--defect-scale", spec.defect_scale, "Mean extra defects of a defective instance");
  synth_cmd->add_option("--project-shift", spec.project_shift, "Spread of per-project metric offsets");
  synth_cmd->add_option("--repository", spec.repository, "Repository name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*select_cmd) return cmd_select(select_o);
    if (*run_cmd) return cmd_run(run_o);
    if (*sweep_cmd) return cmd_sweep_k(sweep_o, k_min, k_max);
    if (*compare_cmd) return cmd_compare(compare_o, run_files, threshold_files, compare_threshold);
    if (*synth_cmd) return cmd_synth(spec, synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
