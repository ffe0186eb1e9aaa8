#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "tdselector/experiment.hpp"
#include "tdselector/learner.hpp"
#include "tdselector/selector.hpp"

namespace tdselector {

/// Selection report: config, alpha, selected ids with provenance, per-test
/// rankings.
std::string selection_to_json(const SelectionResult& result, const SelectorConfig& cfg,
                              const CpdpSplit& split);

/// Weights keyed by metric name, bias, training metadata.
std::string model_to_json(const LogisticModel& model, const MetricSchema& schema);

std::string run_record_to_json(const RunRecord& record);
/// Throws ConfigError on malformed input.
RunRecord run_record_from_json(const std::string& text);

/// target, alpha, auc, nod_auc, growth_pct, plus a mean row.
std::string run_record_to_csv(const RunRecord& record);
/// alpha on the first column, one AUC column per target.
std::string alpha_trace_to_csv(const RunRecord& record);
std::string sweep_to_csv(const SweepTable& table);

/// Creates `<root>/<prefix>-YYYYMMDD-HHMMSS[-n]`, never reusing an existing
/// directory.
std::filesystem::path create_run_directory(const std::filesystem::path& root,
                                           const std::string& prefix = "run");

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tdselector
