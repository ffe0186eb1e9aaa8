#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tdselector/corpus.hpp"

namespace tdselector {

/// Parameters of a synthetic repository.
///
/// Instances follow a shared linear concept with a per-project metric shift.
/// A `label_noise` fraction of instances carries a label drawn independently
/// of the metrics. Defective instances get 1 + Poisson(lambda) defects, where
/// lambda is `defect_scale * (1 + informativeness)` for instances with a
/// reliable label and `defect_scale * (1 - informativeness)` for noisy ones.
/// At informativeness 0 the defect counts carry no information beyond the
/// label; at 1 a noisy defective instance always has exactly one defect.
struct SynthSpec {
  std::size_t projects = 4;
  std::size_t min_instances = 120;
  std::size_t max_instances = 240;
  std::size_t metrics = 8;
  double defect_rate = 0.3;
  double informativeness = 0.0;
  double label_noise = 0.35;
  double defect_scale = 1.5;
  double project_shift = 0.75;
  std::string repository = "SYNTH";

  /// Throws ConfigError.
  void validate() const;
};

/// Deterministic in (spec, seed) on every platform: all draws come from
/// std::mt19937_64 through hand-written transforms.
std::vector<Dataset> generate_repository(const SynthSpec& spec, std::uint64_t seed);

/// One CSV per project plus `config.json` describing the repository.
/// Returns the config path.
std::filesystem::path write_repository(std::span<const Dataset> datasets,
                                       const std::filesystem::path& dir);

}  // namespace tdselector
