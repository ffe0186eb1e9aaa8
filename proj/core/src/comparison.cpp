#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include "tdselector/experiment.hpp"
#include "text.hpp"

namespace tdselector {

using nlohmann::json;

namespace {

constexpr const char* kGap = "NA";
constexpr const char* kNotImplemented = "not implemented";

struct ParsedName {
  std::string similarity;
  std::string normalization;
};

ParsedName parse_combination(const std::string& name) {
  ParsedName p;
  const auto plus = name.find('+');
  p.similarity = name.substr(0, plus);
  if (plus != std::string::npos) {
    const auto rest = name.substr(plus + 1);
    p.normalization = rest.substr(0, rest.find('+'));
  }
  return p;
}

const TargetOutcome* find_ok(const RunRecord& run, const std::string& target) {
  for (const auto& t : run.targets)
    if (t.target == target && t.ok) return &t;
  return nullptr;
}

std::vector<std::string> target_order(std::span<const RunRecord> runs) {
  std::vector<std::string> order;
  for (const auto& run : runs)
    for (const auto& t : run.targets)
      if (std::find(order.begin(), order.end(), t.target) == order.end()) order.push_back(t.target);
  return order;
}

std::string cell(const std::optional<double>& v, int digits) { return v ? detail::fixed(*v, digits) : ""; }

int normalization_rank(const std::string& n) {
  static const std::vector<std::string> order{"linear", "logistic", "sqrt", "log", "arctan"};
  const auto it = std::find(order.begin(), order.end(), n);
  return static_cast<int>(it - order.begin());
}

std::vector<double> ok_aucs(const RunRecord& run) {
  std::vector<double> v;
  for (const auto& t : run.targets)
    if (t.ok) v.push_back(t.auc);
  return v;
}

}  // namespace

ComparisonTables build_comparison(std::span<const RunRecord> runs, std::span<const RunRecord> threshold_runs) {
  ComparisonTables out;
  json doc;
  const std::vector<std::string> targets = target_order(runs);
  for (const auto& run : runs)
    if (!ok_aucs(run).empty()) ++out.comparable;

  // Per-similarity result tables: alpha, AUC and growth rows per normalization, then NoD.
  std::map<std::string, std::vector<const RunRecord*>> by_similarity;
  std::vector<std::string> similarity_order;
  for (const auto& run : runs) {
    const auto sim = parse_combination(run.combination).similarity;
    if (!by_similarity.contains(sim)) similarity_order.push_back(sim);
    by_similarity[sim].push_back(&run);
  }
  doc["tables"] = json::object();
  for (const auto& sim : similarity_order) {
    auto group = by_similarity[sim];
    std::stable_sort(group.begin(), group.end(), [](const RunRecord* a, const RunRecord* b) {
      return normalization_rank(parse_combination(a->combination).normalization) <
             normalization_rank(parse_combination(b->combination).normalization);
    });
    std::ostringstream csv;
    csv << "combination,row";
    for (const auto& t : targets) csv << ',' << detail::csv_field(t);
    csv << ",mean,std,growth_of_means_pct,mean_of_growths_pct,cliffs_delta\n";
    json jt = json::array();
    for (const RunRecord* run : group) {
      const auto& r = run->report;
      const bool any = !r.per_target.empty();
      csv << run->combination << ",alpha";
      for (const auto& t : targets) {
        const auto* o = find_ok(*run, t);
        csv << ',' << (o ? detail::fixed(o->alpha, 1) : kGap);
      }
      csv << ",,,,,\n" << run->combination << ",auc";
      for (const auto& t : targets) {
        const auto* o = find_ok(*run, t);
        csv << ',' << (o ? detail::fixed(o->auc, 6) : kGap);
      }
      if (any) {
        csv << ',' << detail::fixed(r.summary.mean, 6) << ',' << detail::fixed(r.summary.std, 6) << ','
            << detail::fixed(r.growth_of_means, 1) << ',' << detail::fixed(r.mean_of_growths, 1) << ','
            << detail::fixed(r.cliffs_delta_vs_baseline, 6) << '\n';
      } else {
        csv << ',' << kGap << ',' << kGap << ',' << kGap << ',' << kGap << ',' << kGap << '\n';
      }
      csv << run->combination << ",growth_pct";
      for (const auto& t : targets) {
        const auto* o = find_ok(*run, t);
        csv << ',' << (o ? cell(growth_cell(o->auc, o->nod_auc), 1) : kGap);
      }
      csv << ",,,,,\n";

      json jr;
      jr["combination"] = run->combination;
      jr["mean"] = any ? json(r.summary.mean) : json(nullptr);
      jr["std"] = any ? json(r.summary.std) : json(nullptr);
      jr["growth_of_means_pct"] = any ? json(r.growth_of_means) : json(nullptr);
      jr["mean_of_growths_pct"] = any ? json(r.mean_of_growths) : json(nullptr);
      jr["cliffs_delta"] = any ? json(r.cliffs_delta_vs_baseline) : json(nullptr);
      jr["targets"] = json::object();
      for (const auto& t : targets) {
        const auto* o = find_ok(*run, t);
        if (!o) {
          jr["targets"][t] = nullptr;
          continue;
        }
        const auto g = growth_cell(o->auc, o->nod_auc);
        jr["targets"][t] = {{"alpha", o->alpha}, {"auc", o->auc}, {"growth_pct", g ? json(*g) : json(nullptr)}};
      }
      jt.push_back(std::move(jr));
    }
    // NoD does not depend on the normalization; take it from the first run that has the target.
    csv << sim << "+nod,auc";
    std::vector<double> nod_values;
    for (const auto& t : targets) {
      const TargetOutcome* o = nullptr;
      for (const RunRecord* run : group)
        if ((o = find_ok(*run, t))) break;
      csv << ',' << (o ? detail::fixed(o->nod_auc, 6) : kGap);
      if (o) nod_values.push_back(o->nod_auc);
    }
    if (!nod_values.empty()) {
      const MeanStd ms = mean_std(nod_values);
      csv << ',' << detail::fixed(ms.mean, 6) << ',' << detail::fixed(ms.std, 6) << ",,,\n";
    } else {
      csv << ',' << kGap << ',' << kGap << ",,,\n";
    }
    out.csv.emplace_back("table_" + sim + ".csv", csv.str());
    doc["tables"][sim] = std::move(jt);
  }

  // Pairwise Cliff's delta over the targets every run completed.
  std::vector<std::string> common;
  for (const auto& t : targets) {
    bool all = !runs.empty();
    for (const auto& run : runs) all = all && find_ok(run, t) != nullptr;
    if (all) common.push_back(t);
  }
  {
    std::ostringstream csv;
    csv << "combination";
    for (const auto& run : runs) csv << ',' << run.combination;
    csv << '\n';
    json jm;
    if (!common.empty()) {
      std::vector<NamedResults> named;
      for (const auto& run : runs) {
        NamedResults nr{run.combination, {}};
        for (const auto& t : common) nr.values.push_back(find_ok(run, t)->auc);
        named.push_back(std::move(nr));
      }
      const DeltaMatrix m = pairwise_compare(named);
      for (std::size_t a = 0; a < m.names.size(); ++a) {
        csv << m.names[a];
        for (std::size_t b = 0; b < m.names.size(); ++b) csv << ',' << detail::fixed(m.values[a][b], 6);
        csv << '\n';
      }
      jm = {{"names", m.names}, {"values", m.values}, {"targets", common}};
    } else {
      for (const auto& run : runs) {
        csv << run.combination;
        for (std::size_t b = 0; b < runs.size(); ++b) csv << ',' << kGap;
        csv << '\n';
      }
      jm = nullptr;
    }
    out.csv.emplace_back("pairwise.csv", csv.str());
    doc["pairwise"] = std::move(jm);
  }

  // Factor summary: every AUC pooled by similarity, then by normalization.
  {
    std::ostringstream csv;
    csv << "factor,method,mean,std,cliffs_delta_vs_best,n\n";
    json jf = json::array();
    auto emit = [&](const std::string& factor, const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
      std::size_t best = groups.size();
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].second.empty()) continue;
        if (best == groups.size() || mean_std(groups[i].second).mean > mean_std(groups[best].second).mean) best = i;
      }
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& [method, values] = groups[i];
        csv << factor << ',' << method << ',';
        if (values.empty()) {
          csv << kGap << ',' << kGap << ',' << kGap << ",0\n";
          jf.push_back({{"factor", factor}, {"method", method}, {"mean", nullptr}});
          continue;
        }
        const MeanStd ms = mean_std(values);
        const std::optional<double> d =
            i == best ? std::nullopt : std::optional(cliffs_delta(values, groups[best].second));
        csv << detail::fixed(ms.mean, 6) << ',' << detail::fixed(ms.std, 6) << ',' << cell(d, 6) << ','
            << values.size() << '\n';
        jf.push_back({{"factor", factor}, {"method", method}, {"mean", ms.mean}, {"std", ms.std},
                      {"cliffs_delta_vs_best", d ? json(*d) : json(nullptr)}, {"n", values.size()}});
      }
    };
    std::vector<std::pair<std::string, std::vector<double>>> sims, norms;
    for (const auto& run : runs) {
      const auto p = parse_combination(run.combination);
      auto add = [&](std::vector<std::pair<std::string, std::vector<double>>>& groups, const std::string& key) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) it = groups.insert(groups.end(), {key, {}});
        const auto v = ok_aucs(run);
        it->second.insert(it->second.end(), v.begin(), v.end());
      };
      add(sims, p.similarity);
      add(norms, p.normalization);
    }
    std::stable_sort(norms.begin(), norms.end(),
                     [](const auto& a, const auto& b) { return normalization_rank(a.first) < normalization_rank(b.first); });
    emit("similarity", sims);
    emit("normalization", norms);
    out.csv.emplace_back("factors.csv", csv.str());
    doc["factors"] = std::move(jf);
  }

  // Best combination against NoD and the bug-threshold variant. The external
  // baselines are listed but not computed.
  {
    const RunRecord* best = nullptr;
    for (const auto& run : runs) {
      if (run.report.per_target.empty()) continue;
      if (!best || run.report.summary.mean > best->report.summary.mean) best = &run;
    }
    const RunRecord* threshold = nullptr;
    if (best) {
      for (const auto& run : threshold_runs) {
        const auto a = parse_combination(run.combination), b = parse_combination(best->combination);
        if (a.similarity == b.similarity && a.normalization == b.normalization) threshold = &run;
      }
      if (!threshold && !threshold_runs.empty()) threshold = &threshold_runs.front();
    }
    std::ostringstream csv;
    csv << "test_set,tdselector_auc,nod_auc,growth_vs_nod_pct,tdselector3_auc,growth_vs_tdselector3_pct,"
           "baseline1,baseline2\n";
    json jb;
    jb["best_combination"] = best ? json(best->combination) : json(nullptr);
    jb["threshold_combination"] = threshold ? json(threshold->combination) : json(nullptr);
    jb["baseline1"] = kNotImplemented;
    jb["baseline2"] = kNotImplemented;
    jb["rows"] = json::array();
    std::vector<double> ours, nods, ours_vs3, thr;
    for (const auto& t : targets) {
      const auto* o = best ? find_ok(*best, t) : nullptr;
      const auto* th = threshold ? find_ok(*threshold, t) : nullptr;
      csv << detail::csv_field(t) << ',';
      if (o) {
        const double g = growth_rate(o->auc, o->nod_auc);
        csv << detail::fixed(o->auc, 6) << ',' << detail::fixed(o->nod_auc, 6) << ',' << detail::fixed(g, 1);
        ours.push_back(o->auc);
        nods.push_back(o->nod_auc);
      } else {
        csv << kGap << ',' << kGap << ',' << kGap;
      }
      csv << ',';
      if (th) {
        csv << detail::fixed(th->auc, 6) << ',' << (o ? detail::fixed(growth_rate(o->auc, th->auc), 1) : kGap);
        if (o) {
          ours_vs3.push_back(o->auc);
          thr.push_back(th->auc);
        }
      } else {
        csv << kGap << ',' << kGap;
      }
      csv << ',' << kNotImplemented << ',' << kNotImplemented << '\n';
      jb["rows"].push_back({{"test_set", t},
                            {"tdselector_auc", o ? json(o->auc) : json(nullptr)},
                            {"nod_auc", o ? json(o->nod_auc) : json(nullptr)},
                            {"tdselector3_auc", th ? json(th->auc) : json(nullptr)}});
    }
    if (!ours.empty()) {
      const double d_nod = cliffs_delta(nods, ours);
      csv << "cliffs_delta,,,NoD vs TDSelector: " << detail::fixed(d_nod, 6) << ',';
      jb["cliffs_delta_nod_vs_tdselector"] = d_nod;
      if (!thr.empty()) {
        const double d3 = cliffs_delta(thr, ours_vs3);
        csv << ",TDSelector-3 vs TDSelector: " << detail::fixed(d3, 6);
        jb["cliffs_delta_tdselector3_vs_tdselector"] = d3;
      } else {
        csv << ',';
      }
      csv << ",,\n";
    }
    out.csv.emplace_back("baselines.csv", csv.str());
    doc["baselines"] = std::move(jb);
  }

  doc["comparable"] = out.comparable;
  out.json = doc.dump(2);
  return out;
}

}  // namespace tdselector
