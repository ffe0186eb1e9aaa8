#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdselector {

/// (#{x > y} - #{x < y}) / (|xs| |ys|) over all pairs. Throws ValidationError
/// on empty input.
double cliffs_delta(std::span<const double> xs, std::span<const double> ys);

enum class StdConvention { Sample, Population };

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Throws ValidationError on empty input. A single value has std 0 under
/// either convention.
MeanStd mean_std(std::span<const double> values, StdConvention convention = StdConvention::Sample);

/// Rounds half away from zero.
double round_to(double value, int decimals);

/// 100 * (new - baseline) / baseline, unrounded. Throws ValidationError when
/// baseline <= 0.
double growth_rate_raw(double new_auc, double baseline_auc);
/// growth_rate_raw rounded to one decimal.
double growth_rate(double new_auc, double baseline_auc);
/// Table cell form: empty when the rounded growth is not positive or the
/// baseline is not positive.
std::optional<double> growth_cell(double new_auc, double baseline_auc);

/// Magnitude bands for |d|.
enum class EffectSize { Negligible, VerySmall, Small, Medium, Large };

/// |d| < 0.01 negligible, < 0.2 very small, < 0.5 small, < 0.8 medium, else large.
EffectSize effect_size_band(double d);
std::string_view to_string(EffectSize band);

struct NamedResults {
  std::string name;
  std::vector<double> values;
};

struct DeltaMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[a][b] = cliffs_delta(a, b)
};

/// Throws ValidationError if the result lists differ in length.
DeltaMatrix pairwise_compare(std::span<const NamedResults> results);

struct TargetResult {
  double auc = 0.0;
  double alpha = 1.0;
  double baseline_auc = 0.0;
  std::string config;
};

struct EvalReport {
  std::map<std::string, TargetResult> per_target;
  MeanStd summary;
  MeanStd baseline_summary;
  std::map<std::string, std::optional<double>> growth_vs_baseline;
  /// Growth of the mean AUC over the mean baseline AUC, one decimal.
  double growth_of_means = 0.0;
  /// Mean of the per-target growth rates, one decimal.
  double mean_of_growths = 0.0;
  /// cliffs_delta(aucs, baseline aucs).
  double cliffs_delta_vs_baseline = 0.0;
};

EvalReport make_eval_report(const std::map<std::string, TargetResult>& per_target,
                            StdConvention convention = StdConvention::Sample);

}  // namespace tdselector
