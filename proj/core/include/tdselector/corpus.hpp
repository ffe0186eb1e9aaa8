#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tdselector {

/// Ordered metric names shared by every instance of a dataset.
class MetricSchema {
 public:
  MetricSchema() = default;
  /// Throws SchemaError on an empty list, an empty name or a duplicate name.
  explicit MetricSchema(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

  friend bool operator==(const MetricSchema&, const MetricSchema&) = default;

 private:
  std::vector<std::string> names_;
};

/// Stable identity of an instance: the dataset it came from plus its row.
/// Two instances with identical metric values are still distinct.
struct InstanceId {
  std::string dataset;
  std::size_t row = 0;

  friend auto operator<=>(const InstanceId&, const InstanceId&) = default;
  friend bool operator==(const InstanceId&, const InstanceId&) = default;

  std::string str() const;
};

/// One object-class record.
struct Instance {
  InstanceId id;
  std::string name;  // optional display name, e.g. the class name column
  std::vector<double> metrics;
  std::uint32_t defects = 0;

  int label() const noexcept { return defects > 0 ? 1 : 0; }
};

/// A project release.
struct Dataset {
  std::string project;
  std::string version;
  std::string repository;
  MetricSchema schema;
  std::vector<Instance> instances;

  /// "project-version", or just the project when no version is set.
  std::string id() const;
  std::size_t defective_count() const;
};

/// Resolves the columns of a delimiter-separated export onto a schema.
struct ColumnMapping {
  /// Metric columns in schema order. When empty, every column that is not the
  /// defect column, the name column, or listed in `ignore` is a metric.
  std::vector<std::string> metrics;
  std::vector<std::string> ignore;
  std::string defect_column = "bug";
  std::optional<std::string> name_column;
  char delimiter = ',';
  std::string project;
  std::string version;
  std::string repository;
};

Dataset parse_dataset(std::istream& in, const ColumnMapping& mapping);
Dataset load_dataset(const std::filesystem::path& path, const ColumnMapping& mapping);

/// Throws ValidationError when an instance breaks the dataset invariants.
void validate(const Dataset& dataset);

/// Per-feature mean and population standard deviation.
struct ZScoreStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  static ZScoreStats fit(std::span<const Instance> instances);
  /// Constant features (stddev == 0) map to 0.
  void apply(std::span<Instance> instances) const;
};

Dataset zscore_normalize(Dataset dataset);

enum class ZScoreScope {
  None,
  PerProject,
  /// The pooled training set shares one set of statistics; the test set is
  /// standardized on its own.
  Pooled,
};

/// Many-to-one pairing of a target release with the instances of every other
/// project in the same repository.
struct CpdpSplit {
  Dataset test_set;
  std::vector<Instance> initial_tds;
  std::vector<std::pair<std::string, std::string>> provenance;
};

/// `target` names a project; `version` disambiguates when several releases of
/// that project are present. All releases of the target project are excluded
/// from the pool.
CpdpSplit build_m2o_split(std::span<const Dataset> repository, const std::string& target,
                          const std::optional<std::string>& version = std::nullopt);

/// Builds the split and standardizes it according to `scope`.
CpdpSplit prepare_split(std::span<const Dataset> repository, const std::string& target,
                        const std::optional<std::string>& version, ZScoreScope scope);

}  // namespace tdselector
