#include "tdselector/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tdselector/error.hpp"

namespace tdselector {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one record; double quotes group a field and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

MetricSchema::MetricSchema(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw SchemaError("metric schema is empty", "");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw SchemaError("metric schema contains an empty name", "");
    if (!seen.insert(name).second) throw SchemaError("duplicate metric column '" + name + "'", name);
  }
}

std::string InstanceId::str() const { return dataset + "#" + std::to_string(row); }

std::string Dataset::id() const { return version.empty() ? project : project + "-" + version; }

std::size_t Dataset::defective_count() const {
  return static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [](const Instance& i) { return i.label() == 1; }));
}

Dataset parse_dataset(std::istream& in, const ColumnMapping& mapping) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_record(line, mapping.delimiter);
      break;
    }
  }
  if (header.empty()) throw SchemaError("dataset has no header row", "");
  if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) header.front().erase(0, 3);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw SchemaError("missing column '" + name + "'", name);
    return it->second;
  };

  const std::size_t defect_col = require(mapping.defect_column);
  std::optional<std::size_t> name_col;
  if (mapping.name_column) name_col = require(*mapping.name_column);

  std::vector<std::string> metric_names = mapping.metrics;
  if (metric_names.empty()) {
    std::set<std::string> skip(mapping.ignore.begin(), mapping.ignore.end());
    skip.insert(mapping.defect_column);
    if (mapping.name_column) skip.insert(*mapping.name_column);
    for (const auto& h : header)
      if (!skip.contains(h)) metric_names.push_back(h);
  }
  std::vector<std::size_t> metric_cols;
  metric_cols.reserve(metric_names.size());
  for (const auto& name : metric_names) metric_cols.push_back(require(name));

  Dataset ds;
  ds.project = mapping.project;
  ds.version = mapping.version;
  ds.repository = mapping.repository;
  ds.schema = MetricSchema(std::move(metric_names));
  const std::string dataset_id = ds.id();

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line, mapping.delimiter);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + " (line " + std::to_string(line_no) + ") has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       row);
    }
    Instance inst;
    inst.id = InstanceId{dataset_id, row};
    if (name_col) inst.name = fields[*name_col];
    inst.metrics.reserve(metric_cols.size());
    for (std::size_t j = 0; j < metric_cols.size(); ++j) {
      double v = 0.0;
      const auto& cell = fields[metric_cols[j]];
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric value '" + cell + "' in column '" +
                             ds.schema.names()[j] + "'",
                         row);
      }
      inst.metrics.push_back(v);
    }
    double defects = 0.0;
    const auto& cell = fields[defect_col];
    if (!parse_double(cell, defects) || !std::isfinite(defects)) {
      throw ParseError("row " + std::to_string(row) + ": non-numeric defect count '" + cell + "'", row);
    }
    if (defects < 0) {
      throw ValidationError("row " + std::to_string(row) + ": negative defect count " + cell);
    }
    if (defects != std::floor(defects) || defects > 4294967295.0) {
      throw ParseError("row " + std::to_string(row) + ": defect count '" + cell + "' is not an integer", row);
    }
    inst.defects = static_cast<std::uint32_t>(defects);
    ds.instances.push_back(std::move(inst));
    ++row;
  }
  validate(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open dataset file " + path.string());
  try {
    return parse_dataset(in, mapping);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what(), e.column());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.row());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void validate(const Dataset& dataset) {
  if (dataset.instances.empty()) throw ValidationError("dataset " + dataset.id() + " has no instances");
  std::set<InstanceId> ids;
  for (const auto& inst : dataset.instances) {
    if (inst.metrics.size() != dataset.schema.size()) {
      throw ValidationError("instance " + inst.id.str() + " has " + std::to_string(inst.metrics.size()) +
                            " metrics, schema has " + std::to_string(dataset.schema.size()));
    }
    for (double v : inst.metrics)
      if (!std::isfinite(v)) throw ValidationError("instance " + inst.id.str() + " has a non-finite metric");
    if (!ids.insert(inst.id).second) throw ValidationError("duplicate instance id " + inst.id.str());
  }
}

ZScoreStats ZScoreStats::fit(std::span<const Instance> instances) {
  ZScoreStats stats;
  if (instances.empty()) return stats;
  const std::size_t n = instances.front().metrics.size();
  const auto m = static_cast<double>(instances.size());
  stats.mean.assign(n, 0.0);
  stats.stddev.assign(n, 0.0);
  for (const auto& inst : instances)
    for (std::size_t j = 0; j < n; ++j) stats.mean[j] += inst.metrics[j];
  for (auto& mu : stats.mean) mu /= m;
  for (const auto& inst : instances) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = inst.metrics[j] - stats.mean[j];
      stats.stddev[j] += d * d;
    }
  }
  for (auto& s : stats.stddev) s = std::sqrt(s / m);
  return stats;
}

void ZScoreStats::apply(std::span<Instance> instances) const {
  for (auto& inst : instances) {
    for (std::size_t j = 0; j < inst.metrics.size(); ++j) {
      inst.metrics[j] = stddev[j] > 0.0 ? (inst.metrics[j] - mean[j]) / stddev[j] : 0.0;
    }
  }
}

Dataset zscore_normalize(Dataset dataset) {
  if (dataset.instances.empty()) throw ValidationError("cannot standardize an empty dataset");
  ZScoreStats::fit(dataset.instances).apply(dataset.instances);
  return dataset;
}

CpdpSplit build_m2o_split(std::span<const Dataset> repository, const std::string& target,
                          const std::optional<std::string>& version) {
  const Dataset* test = nullptr;
  std::size_t matches = 0;
  for (const auto& ds : repository) {
    if (ds.project != target) continue;
    if (version && ds.version != *version) continue;
    test = &ds;
    ++matches;
  }
  if (matches == 0) {
    throw NotFoundError("target project '" + target + (version ? " " + *version : std::string()) +
                        "' not found");
  }
  if (matches > 1) {
    throw NotFoundError("target project '" + target + "' has several releases; specify a version");
  }

  CpdpSplit split;
  split.test_set = *test;
  for (const auto& ds : repository) {
    if (ds.project == target || ds.repository != test->repository) continue;
    if (ds.schema != test->schema) {
      throw IncompatibleSchemaError("dataset " + ds.id() + " does not share the metric schema of " + test->id());
    }
    split.initial_tds.insert(split.initial_tds.end(), ds.instances.begin(), ds.instances.end());
    split.provenance.emplace_back(ds.project, ds.version);
  }
  if (split.initial_tds.empty()) {
    throw NotFoundError("no other project in repository '" + test->repository + "' to pool for " + test->id());
  }
  return split;
}

CpdpSplit prepare_split(std::span<const Dataset> repository, const std::string& target,
                        const std::optional<std::string>& version, ZScoreScope scope) {
  if (scope != ZScoreScope::PerProject) {
    CpdpSplit split = build_m2o_split(repository, target, version);
    if (scope == ZScoreScope::Pooled) {
      ZScoreStats::fit(split.initial_tds).apply(split.initial_tds);
      split.test_set = zscore_normalize(std::move(split.test_set));
    }
    return split;
  }
  std::vector<Dataset> normalized;
  normalized.reserve(repository.size());
  for (const auto& ds : repository) normalized.push_back(zscore_normalize(ds));
  return build_m2o_split(normalized, target, version);
}

}  // namespace tdselector
