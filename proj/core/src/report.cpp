#include "tdselector/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include "tdselector/error.hpp"
#include "text.hpp"

namespace tdselector {

using nlohmann::json;

namespace {

json to_json(const EvalReport& r) {
  json j;
  j["per_target"] = json::object();
  for (const auto& [name, t] : r.per_target) {
    j["per_target"][name] = {{"auc", t.auc}, {"alpha", t.alpha}, {"baseline_auc", t.baseline_auc},
                             {"config", t.config}};
  }
  j["mean"] = r.summary.mean;
  j["std"] = r.summary.std;
  j["baseline_mean"] = r.baseline_summary.mean;
  j["baseline_std"] = r.baseline_summary.std;
  j["growth_vs_baseline"] = json::object();
  for (const auto& [name, g] : r.growth_vs_baseline) j["growth_vs_baseline"][name] = g ? json(*g) : json(nullptr);
  j["growth_of_means_pct"] = r.growth_of_means;
  j["mean_of_growths_pct"] = r.mean_of_growths;
  j["cliffs_delta_vs_baseline"] = r.cliffs_delta_vs_baseline;
  j["effect_size"] = std::string(to_string(effect_size_band(r.cliffs_delta_vs_baseline)));
  return j;
}

json to_json(const TargetOutcome& t) {
  json j;
  j["target"] = t.target;
  j["project"] = t.project;
  j["repository"] = t.repository;
  j["ok"] = t.ok;
  j["error"] = t.error;
  j["alpha"] = t.alpha;
  j["auc"] = t.auc;
  j["nod_auc"] = t.nod_auc;
  j["trace"] = json::array();
  for (const auto& p : t.trace) j["trace"].push_back({{"alpha", p.alpha}, {"auc", p.auc}});
  j["pool_size"] = t.pool_size;
  j["test_size"] = t.test_size;
  j["selected_count"] = t.selected_count;
  j["forced_count"] = t.forced_count;
  j["model"] = {{"iterations", t.model_iterations}, {"converged", t.model_converged},
                {"degenerate", t.model_degenerate}};
  j["warnings"] = t.warnings;
  j["seconds"] = t.seconds;
  return j;
}

TargetOutcome outcome_from(const json& j) {
  TargetOutcome t;
  t.target = j.at("target").get<std::string>();
  t.project = j.value("project", "");
  t.repository = j.value("repository", "");
  t.ok = j.at("ok").get<bool>();
  t.error = j.value("error", "");
  t.alpha = j.at("alpha").get<double>();
  t.auc = j.at("auc").get<double>();
  t.nod_auc = j.at("nod_auc").get<double>();
  for (const auto& p : j.at("trace")) t.trace.push_back({p.at("alpha").get<double>(), p.at("auc").get<double>()});
  t.pool_size = j.value("pool_size", std::size_t{0});
  t.test_size = j.value("test_size", std::size_t{0});
  t.selected_count = j.value("selected_count", std::size_t{0});
  t.forced_count = j.value("forced_count", std::size_t{0});
  if (j.contains("model")) {
    t.model_iterations = j.at("model").value("iterations", std::size_t{0});
    t.model_converged = j.at("model").value("converged", false);
    t.model_degenerate = j.at("model").value("degenerate", false);
  }
  t.warnings = j.value("warnings", std::vector<std::string>{});
  t.seconds = j.value("seconds", 0.0);
  return t;
}

}  // namespace

std::string selection_to_json(const SelectionResult& result, const SelectorConfig& cfg, const CpdpSplit& split) {
  std::map<InstanceId, const Instance*> lookup;
  for (const auto& inst : split.initial_tds) lookup[inst.id] = &inst;

  json j;
  j["test_set"] = split.test_set.id();
  j["config"] = {{"similarity", std::string(to_string(cfg.similarity))},
                 {"normalization", std::string(to_string(cfg.normalization))},
                 {"distance_transform", std::string(to_string(cfg.distance_transform))},
                 {"k", cfg.k},
                 {"bug_threshold", cfg.bug_threshold ? json(*cfg.bug_threshold) : json("off")}};
  j["alpha"] = result.alpha_used;
  j["pool_size"] = split.initial_tds.size();
  j["provenance"] = json::array();
  for (const auto& [project, version] : split.provenance) {
    j["provenance"].push_back({{"project", project}, {"version", version}});
  }
  j["selected"] = json::array();
  for (const auto& inst : result.selected) {
    j["selected"].push_back({{"id", inst.id.str()},
                             {"name", inst.name},
                             {"dataset", inst.id.dataset},
                             {"row", inst.id.row},
                             {"defects", inst.defects},
                             {"forced", result.is_forced(inst.id)}});
  }
  j["per_test"] = json::array();
  for (const auto& ranking : result.per_test_topk) {
    json r;
    r["test"] = ranking.test.str();
    r["candidates"] = json::array();
    for (const auto& c : ranking.top_k) {
      const auto it = lookup.find(c.id);
      r["candidates"].push_back({{"id", c.id.str()},
                                 {"name", it != lookup.end() ? it->second->name : std::string()},
                                 {"rank", c.rank},
                                 {"sim", c.sim},
                                 {"norm_defects", c.norm_defects},
                                 {"score", c.score}});
    }
    j["per_test"].push_back(std::move(r));
  }
  j["warnings"] = result.warnings;
  return j.dump(2);
}

std::string model_to_json(const LogisticModel& model, const MetricSchema& schema) {
  json j;
  j["weights"] = json::object();
  for (std::size_t i = 0; i < model.weights.size() && i < schema.size(); ++i) {
    j["weights"][schema.names()[i]] = model.weights[i];
  }
  j["bias"] = model.bias;
  j["training_meta"] = {{"iterations", model.meta.iterations},
                        {"final_objective", model.meta.final_objective},
                        {"gradient_norm", model.meta.gradient_norm},
                        {"ridge", model.meta.ridge},
                        {"converged", model.meta.converged},
                        {"degenerate", model.meta.degenerate}};
  return j.dump(2);
}

std::string run_record_to_json(const RunRecord& record) {
  json j;
  j["tool_version"] = record.tool_version;
  j["combination"] = record.combination;
  j["config"] = json::parse(record.config_json);
  j["targets"] = json::array();
  for (const auto& t : record.targets) j["targets"].push_back(to_json(t));
  j["report"] = to_json(record.report);
  j["seconds"] = record.seconds;
  return j.dump(2);
}

RunRecord run_record_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunRecord record;
    record.tool_version = j.value("tool_version", "");
    record.combination = j.at("combination").get<std::string>();
    record.config_json = j.at("config").dump(2);
    for (const auto& t : j.at("targets")) record.targets.push_back(outcome_from(t));
    record.seconds = j.value("seconds", 0.0);
    refresh_report(record);
    return record;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
}

std::string run_record_to_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "target,alpha,auc,nod_auc,growth_pct,ok\n";
  for (const auto& t : record.targets) {
    out << detail::csv_field(t.target) << ',';
    if (t.ok) {
      const auto g = growth_cell(t.auc, t.nod_auc);
      out << detail::fixed(t.alpha, 1) << ',' << detail::fixed(t.auc, 6) << ',' << detail::fixed(t.nod_auc, 6)
          << ',' << (g ? detail::fixed(*g, 1) : std::string()) << ",1\n";
    } else {
      out << "NA,NA,NA,,0\n";
    }
  }
  if (!record.report.per_target.empty()) {
    const auto& r = record.report;
    out << "mean," << ',' << detail::fixed(r.summary.mean, 6) << ',' << detail::fixed(r.baseline_summary.mean, 6)
        << ',' << detail::fixed(r.growth_of_means, 1) << ",\n";
    out << "std," << ',' << detail::fixed(r.summary.std, 6) << ',' << detail::fixed(r.baseline_summary.std, 6)
        << ",,\n";
  }
  return out.str();
}

std::string alpha_trace_to_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "alpha";
  std::size_t points = 0;
  for (const auto& t : record.targets) {
    if (!t.ok || t.trace.empty()) continue;
    out << ',' << detail::csv_field(t.target);
    points = std::max(points, t.trace.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < points; ++i) {
    bool first = true;
    for (const auto& t : record.targets) {
      if (!t.ok || t.trace.empty()) continue;
      if (first) {
        out << detail::fixed(t.trace[i].alpha, 2);
        first = false;
      }
      out << ',' << (i < t.trace.size() ? detail::fixed(t.trace[i].auc, 6) : "NA");
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "k,similarity,normalization,mean_auc";
  for (const auto& t : table.targets) out << ',' << detail::csv_field(t);
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.k << ',' << to_string(row.similarity) << ',' << to_string(row.normalization) << ','
        << detail::fixed(row.mean_auc, 6);
    for (double v : row.aucs) out << ',' << detail::fixed(v, 6);
    out << '\n';
  }
  return out.str();
}

std::filesystem::path create_run_directory(const std::filesystem::path& root, const std::string& prefix) {
  std::filesystem::create_directories(root);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string base = prefix + "-" + stamp;
  for (int n = 0;; ++n) {
    const auto dir = root / (n == 0 ? base : base + "-" + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tdselector
