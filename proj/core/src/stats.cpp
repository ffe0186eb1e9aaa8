#include "tdselector/stats.hpp"

#include <algorithm>
#include <cmath>

#include "tdselector/error.hpp"

namespace tdselector {

double cliffs_delta(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw ValidationError("Cliff's delta needs two non-empty samples");
  std::vector<double> sorted(ys.begin(), ys.end());
  std::sort(sorted.begin(), sorted.end());
  long long greater = 0, less = 0;
  for (double x : xs) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x);
    greater += lo - sorted.begin();
    less += sorted.end() - hi;
  }
  return static_cast<double>(greater - less) /
         (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

MeanStd mean_std(std::span<const double> values, StdConvention convention) {
  if (values.empty()) throw ValidationError("mean of an empty list");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / n;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    out.mean = *lo;
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / (convention == StdConvention::Sample ? n - 1.0 : n));
  return out;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Absorb binary representation error (6.25 stored as 6.2499999...) before rounding.
  const double scaled = value * scale;
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::round(nudged) / scale;
}

double growth_rate_raw(double new_auc, double baseline_auc) {
  if (!(baseline_auc > 0.0)) throw ValidationError("growth rate needs a positive baseline");
  return 100.0 * (new_auc - baseline_auc) / baseline_auc;
}

double growth_rate(double new_auc, double baseline_auc) {
  return round_to(growth_rate_raw(new_auc, baseline_auc), 1);
}

std::optional<double> growth_cell(double new_auc, double baseline_auc) {
  if (!(baseline_auc > 0.0)) return std::nullopt;
  const double g = growth_rate(new_auc, baseline_auc);
  if (!(g > 0.0)) return std::nullopt;
  return g;
}

EffectSize effect_size_band(double d) {
  const double a = std::abs(d);
  if (a < 0.01) return EffectSize::Negligible;
  if (a < 0.2) return EffectSize::VerySmall;
  if (a < 0.5) return EffectSize::Small;
  if (a < 0.8) return EffectSize::Medium;
  return EffectSize::Large;
}

std::string_view to_string(EffectSize band) {
  switch (band) {
    case EffectSize::Negligible: return "negligible";
    case EffectSize::VerySmall: return "very small";
    case EffectSize::Small: return "small";
    case EffectSize::Medium: return "medium";
    case EffectSize::Large: return "large";
  }
  return "?";
}

DeltaMatrix pairwise_compare(std::span<const NamedResults> results) {
  DeltaMatrix m;
  for (const auto& r : results) {
    if (r.values.size() != results.front().values.size()) {
      throw ValidationError("result list '" + r.name + "' has " + std::to_string(r.values.size()) +
                            " values, expected " + std::to_string(results.front().values.size()));
    }
    m.names.push_back(r.name);
  }
  const std::size_t n = results.size();
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = cliffs_delta(results[a].values, results[b].values);
      m.values[a][b] = d;
      m.values[b][a] = -d;
    }
  }
  return m;
}

EvalReport make_eval_report(const std::map<std::string, TargetResult>& per_target, StdConvention convention) {
  EvalReport report;
  report.per_target = per_target;
  if (per_target.empty()) return report;
  std::vector<double> aucs, baselines, growths;
  for (const auto& [name, r] : per_target) {
    aucs.push_back(r.auc);
    baselines.push_back(r.baseline_auc);
    report.growth_vs_baseline[name] = growth_cell(r.auc, r.baseline_auc);
    if (r.baseline_auc > 0.0) growths.push_back(growth_rate_raw(r.auc, r.baseline_auc));
  }
  report.summary = mean_std(aucs, convention);
  report.baseline_summary = mean_std(baselines, convention);
  if (report.baseline_summary.mean > 0.0) {
    report.growth_of_means = growth_rate(report.summary.mean, report.baseline_summary.mean);
  }
  if (!growths.empty()) report.mean_of_growths = round_to(mean_std(growths).mean, 1);
  report.cliffs_delta_vs_baseline = cliffs_delta(aucs, baselines);
  return report;
}

}  // namespace tdselector
