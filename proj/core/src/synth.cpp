#include "tdselector/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "tdselector/error.hpp"
#include "text.hpp"

namespace tdselector {

namespace {

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint32_t poisson(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint32_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

}  // namespace

void SynthSpec::validate() const {
  if (projects < 2) throw ConfigError("synthetic repository needs at least 2 projects");
  if (min_instances < 10 || max_instances < min_instances) throw ConfigError("invalid instance count range");
  if (metrics < 1) throw ConfigError("synthetic repository needs at least 1 metric");
  if (!(defect_rate > 0.0 && defect_rate < 1.0)) throw ConfigError("defect_rate must lie in (0, 1)");
  if (!(informativeness >= 0.0 && informativeness <= 1.0)) throw ConfigError("informativeness must lie in [0, 1]");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw ConfigError("label_noise must lie in [0, 1]");
  if (!(defect_scale >= 0.0 && defect_scale <= 50.0)) throw ConfigError("defect_scale must lie in [0, 50]");
  if (!(project_shift >= 0.0)) throw ConfigError("project_shift must be non-negative");
  if (repository.empty()) throw ConfigError("repository name must not be empty");
}

std::vector<Dataset> generate_repository(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Draws draw(seed);

  std::vector<double> direction(spec.metrics);
  double norm = 0.0;
  for (auto& w : direction) {
    w = draw.normal();
    norm += w * w;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) norm = 1.0;
  for (auto& w : direction) w /= norm;

  std::vector<std::string> names;
  for (std::size_t m = 0; m < spec.metrics; ++m) names.push_back("m" + std::to_string(m + 1));
  const MetricSchema schema(names);

  std::vector<Dataset> out;
  for (std::size_t p = 0; p < spec.projects; ++p) {
    Dataset ds;
    ds.project = "p" + std::to_string(p + 1);
    ds.repository = spec.repository;
    ds.schema = schema;

    std::vector<double> shift(spec.metrics);
    for (auto& s : shift) s = spec.project_shift * draw.normal();

    const std::size_t n = draw.index(spec.min_instances, spec.max_instances);
    std::vector<double> signal(n);
    ds.instances.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& inst = ds.instances[i];
      inst.id = {ds.id(), i};
      inst.name = ds.project + ".C" + std::to_string(i + 1);
      inst.metrics.resize(spec.metrics);
      double s = 0.0;
      for (std::size_t m = 0; m < spec.metrics; ++m) {
        const double z = draw.normal();
        inst.metrics[m] = z + shift[m];
        s += direction[m] * z;
      }
      signal[i] = s + 0.5 * draw.normal();
    }

    std::vector<double> sorted = signal;
    const auto cut_pos = static_cast<std::size_t>(std::floor((1.0 - spec.defect_rate) * static_cast<double>(n)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(std::min(cut_pos, n - 1)),
                     sorted.end());
    const double cut = sorted[std::min(cut_pos, n - 1)];

    for (std::size_t i = 0; i < n; ++i) {
      const bool noisy = draw.uniform() < spec.label_noise;
      const bool defective = noisy ? draw.uniform() < spec.defect_rate : signal[i] >= cut;
      const double lambda = spec.defect_scale * (noisy ? 1.0 - spec.informativeness : 1.0 + spec.informativeness);
      const std::uint32_t extra = draw.poisson(lambda);
      ds.instances[i].defects = defective ? 1 + extra : 0;
    }
    out.push_back(std::move(ds));
  }
  return out;
}

std::filesystem::path write_repository(std::span<const Dataset> datasets, const std::filesystem::path& dir) {
  if (datasets.empty()) throw ValidationError("nothing to write");
  std::filesystem::create_directories(dir);
  nlohmann::json repo;
  repo["name"] = datasets.front().repository;
  repo["delimiter"] = ",";
  repo["defect_column"] = "bug";
  repo["name_column"] = "name";
  repo["datasets"] = nlohmann::json::array();
  for (const auto& ds : datasets) {
    const std::string file = ds.id() + ".csv";
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / file).string());
    out << "name";
    for (const auto& m : ds.schema.names()) out << ',' << m;
    out << ",bug\n";
    for (const auto& inst : ds.instances) {
      out << detail::csv_field(inst.name);
      for (double v : inst.metrics) out << ',' << detail::exact(v);
      out << ',' << inst.defects << '\n';
    }
    if (!out) throw Error("failed writing " + (dir / file).string());
    repo["datasets"].push_back({{"project", ds.project}, {"version", ds.version}, {"file", file}});
  }
  nlohmann::json root;
  root["repositories"] = nlohmann::json::array({repo});
  const auto path = dir / "config.json";
  std::ofstream cfg(path, std::ios::binary);
  if (!cfg) throw Error("cannot write " + path.string());
  cfg << root.dump(2) << '\n';
  return path;
}

}  // namespace tdselector
