#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include "tdselector/error.hpp"
#include "tdselector/experiment.hpp"

namespace tdselector {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\t") return '\t';
  if (text.size() != 1) throw ConfigError("delimiter must be a single character or \"tab\"");
  return text[0];
}

std::string delimiter_text(char c) { return c == '\t' ? "tab" : std::string(1, c); }

ZScoreScope parse_scope(const std::string& text) {
  if (text == "per_project") return ZScoreScope::PerProject;
  if (text == "pooled") return ZScoreScope::Pooled;
  if (text == "none") return ZScoreScope::None;
  throw ConfigError("unknown zscore scope '" + text + "' (per_project|pooled|none)");
}

std::string scope_text(ZScoreScope scope) {
  switch (scope) {
    case ZScoreScope::PerProject: return "per_project";
    case ZScoreScope::Pooled: return "pooled";
    case ZScoreScope::None: return "none";
  }
  return "?";
}

void parse_selector(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"similarity", "normalization", "alpha", "k", "bug_threshold", "alpha_step",
                 "distance_transform", "clip_logarithmic"},
             "selector");
  SelectorConfig& s = cfg.selector;
  s.similarity = parse_similarity(get_or<std::string>(j, "similarity", "euclidean"));
  s.normalization = parse_normalization(get_or<std::string>(j, "normalization", "linear"));
  s.distance_transform = parse_distance_transform(get_or<std::string>(j, "distance_transform", "reciprocal"));
  s.clip_logarithmic = get_or<bool>(j, "clip_logarithmic", false);
  s.alpha_step = get_or<double>(j, "alpha_step", 0.1);
  const auto k = get_or<long long>(j, "k", 10);
  if (k < 1) throw ConfigError("k must be at least 1");
  s.k = static_cast<std::size_t>(k);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    if (a.is_string()) {
      if (a.get<std::string>() != "optimize") throw ConfigError("alpha must be a number or \"optimize\"");
      cfg.optimize_alpha = true;
    } else if (a.is_number()) {
      cfg.optimize_alpha = false;
      s.alpha = a.get<double>();
    } else {
      throw ConfigError("alpha must be a number or \"optimize\"");
    }
  }
  if (j.contains("bug_threshold")) {
    const auto& t = j.at("bug_threshold");
    if (t.is_null() || (t.is_string() && t.get<std::string>() == "off")) {
      s.bug_threshold.reset();
    } else if (t.is_number_integer() && t.get<long long>() >= 1) {
      s.bug_threshold = t.get<std::uint32_t>();
    } else {
      throw ConfigError("bug_threshold must be a positive integer or \"off\"");
    }
  }
  s.validate();
  alpha_grid(s.alpha_step);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"repositories", "targets", "selector", "alpha_objective", "holdout_fraction", "zscore",
                    "learner", "output_dir", "seed", "threads"},
             "config");

  ExperimentConfig cfg;
  if (!root.contains("repositories") || !root.at("repositories").is_array()) {
    throw ConfigError("config needs a 'repositories' array");
  }
  for (const auto& r : root.at("repositories")) {
    check_keys(r, {"name", "delimiter", "defect_column", "name_column", "metrics", "ignore", "datasets"},
               "repository");
    RepositoryConfig repo;
    repo.name = get_or<std::string>(r, "name", "");
    if (repo.name.empty()) throw ConfigError("repository needs a name");
    repo.mapping.repository = repo.name;
    repo.mapping.delimiter = parse_delimiter(get_or<std::string>(r, "delimiter", ","));
    repo.mapping.defect_column = get_or<std::string>(r, "defect_column", "bug");
    if (r.contains("name_column") && !r.at("name_column").is_null()) {
      repo.mapping.name_column = r.at("name_column").get<std::string>();
    }
    repo.mapping.metrics = get_or<std::vector<std::string>>(r, "metrics", {});
    repo.mapping.ignore = get_or<std::vector<std::string>>(r, "ignore", {});
    if (!r.contains("datasets") || !r.at("datasets").is_array()) {
      throw ConfigError("repository '" + repo.name + "' needs a 'datasets' array");
    }
    for (const auto& d : r.at("datasets")) {
      check_keys(d, {"project", "version", "file"}, "dataset");
      DatasetEntry entry;
      entry.project = get_or<std::string>(d, "project", "");
      entry.version = get_or<std::string>(d, "version", "");
      entry.file = get_or<std::string>(d, "file", "");
      if (entry.project.empty() || entry.file.empty()) throw ConfigError("dataset entries need project and file");
      if (entry.file.is_relative()) entry.file = base_dir / entry.file;
      repo.datasets.push_back(std::move(entry));
    }
    cfg.repositories.push_back(std::move(repo));
  }

  if (root.contains("targets")) {
    const auto& t = root.at("targets");
    if (t.is_string()) cfg.targets = {t.get<std::string>()};
    else cfg.targets = get_or<std::vector<std::string>>(root, "targets", {"all"});
  }
  if (root.contains("selector")) parse_selector(root.at("selector"), cfg);

  const auto objective = get_or<std::string>(root, "alpha_objective", "test");
  if (objective == "test") cfg.alpha_objective = AlphaObjective::TestSet;
  else if (objective == "holdout") cfg.alpha_objective = AlphaObjective::HeldOut;
  else throw ConfigError("alpha_objective must be \"test\" or \"holdout\"");
  cfg.holdout_fraction = get_or<double>(root, "holdout_fraction", 0.2);
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in (0, 1)");
  }
  cfg.zscore = parse_scope(get_or<std::string>(root, "zscore", "per_project"));

  if (root.contains("learner")) {
    const auto& l = root.at("learner");
    check_keys(l, {"ridge", "tol", "max_iter"}, "learner");
    cfg.learner.ridge = get_or<double>(l, "ridge", 1e-8);
    cfg.learner.tol = get_or<double>(l, "tol", 1e-8);
    cfg.learner.max_iter = get_or<std::size_t>(l, "max_iter", 500);
    if (cfg.learner.ridge < 0.0 || !(cfg.learner.tol > 0.0)) throw ConfigError("invalid learner settings");
  }
  std::filesystem::path out = get_or<std::string>(root, "output_dir", "runs");
  cfg.output_dir = out.is_relative() ? base_dir / out : out;
  if (root.contains("seed") && !root.at("seed").is_null()) cfg.seed = root.at("seed").get<std::uint64_t>();
  cfg.threads = get_or<unsigned>(root, "threads", 0);
  if (cfg.alpha_objective == AlphaObjective::HeldOut && !cfg.seed) {
    throw ConfigError("alpha_objective \"holdout\" needs a seed");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

std::string to_json(const ExperimentConfig& cfg) {
  json root;
  root["repositories"] = json::array();
  for (const auto& repo : cfg.repositories) {
    json r;
    r["name"] = repo.name;
    r["delimiter"] = delimiter_text(repo.mapping.delimiter);
    r["defect_column"] = repo.mapping.defect_column;
    r["name_column"] = repo.mapping.name_column ? json(*repo.mapping.name_column) : json(nullptr);
    r["metrics"] = repo.mapping.metrics;
    r["ignore"] = repo.mapping.ignore;
    r["datasets"] = json::array();
    for (const auto& d : repo.datasets) {
      r["datasets"].push_back({{"project", d.project}, {"version", d.version}, {"file", d.file.string()}});
    }
    root["repositories"].push_back(std::move(r));
  }
  root["targets"] = cfg.targets;
  const auto& s = cfg.selector;
  json sel;
  sel["similarity"] = std::string(to_string(s.similarity));
  sel["normalization"] = std::string(to_string(s.normalization));
  sel["distance_transform"] = std::string(to_string(s.distance_transform));
  sel["alpha"] = cfg.optimize_alpha ? json("optimize") : json(s.alpha);
  sel["k"] = s.k;
  sel["bug_threshold"] = s.bug_threshold ? json(*s.bug_threshold) : json("off");
  sel["alpha_step"] = s.alpha_step;
  sel["clip_logarithmic"] = s.clip_logarithmic;
  root["selector"] = std::move(sel);
  root["alpha_objective"] = cfg.alpha_objective == AlphaObjective::TestSet ? "test" : "holdout";
  root["holdout_fraction"] = cfg.holdout_fraction;
  root["zscore"] = scope_text(cfg.zscore);
  root["learner"] = {{"ridge", cfg.learner.ridge}, {"tol", cfg.learner.tol}, {"max_iter", cfg.learner.max_iter}};
  root["output_dir"] = cfg.output_dir.string();
  root["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  root["threads"] = cfg.threads;
  return root.dump(2);
}

}  // namespace tdselector
