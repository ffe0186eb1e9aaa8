#include <gtest/gtest.h>

#include <filesystem>

#include "tdselector/error.hpp"
#include "tdselector/experiment.hpp"
#include "tdselector/report.hpp"
#include "tdselector/synth.hpp"

namespace tdselector {
namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tdselector_synth_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Synth, SameSeedGivesByteIdenticalFiles) {
  SynthSpec spec;
  const auto a = scratch("a"), b = scratch("b");
  write_repository(generate_repository(spec, 99), a);
  write_repository(generate_repository(spec, 99), b);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    const auto name = entry.path().filename();
    EXPECT_EQ(read_text_file(a / name), read_text_file(b / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, spec.projects + 1);
  const auto other = generate_repository(spec, 100);
  EXPECT_NE(other[0].instances[0].metrics, generate_repository(spec, 99)[0].instances[0].metrics);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Synth, WrittenRepositoryLoadsBack) {
  SynthSpec spec;
  spec.projects = 2;
  const auto dir = scratch("load");
  const auto original = generate_repository(spec, 4);
  const auto config = write_repository(original, dir);
  const auto loaded = load_repositories(load_experiment_config(config));
  ASSERT_EQ(loaded.size(), 2u);
  for (std::size_t p = 0; p < 2; ++p) {
    ASSERT_EQ(loaded[p].instances.size(), original[p].instances.size());
    for (std::size_t i = 0; i < original[p].instances.size(); ++i) {
      EXPECT_EQ(loaded[p].instances[i].metrics, original[p].instances[i].metrics);
      EXPECT_EQ(loaded[p].instances[i].defects, original[p].instances[i].defects);
      EXPECT_EQ(loaded[p].instances[i].name, original[p].instances[i].name);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Synth, ShapeFollowsSpec) {
  SynthSpec spec;
  spec.projects = 5;
  spec.min_instances = 30;
  spec.max_instances = 40;
  spec.metrics = 6;
  spec.label_noise = 0.0;
  spec.defect_rate = 0.25;
  const auto ds = generate_repository(spec, 2);
  ASSERT_EQ(ds.size(), 5u);
  for (const auto& d : ds) {
    EXPECT_GE(d.instances.size(), 30u);
    EXPECT_LE(d.instances.size(), 40u);
    EXPECT_EQ(d.schema.size(), 6u);
    EXPECT_EQ(d.repository, "SYNTH");
    const double rate = static_cast<double>(d.defective_count()) / static_cast<double>(d.instances.size());
    EXPECT_NEAR(rate, 0.25, 0.05);
  }
}

TEST(Synth, ZeroInformativenessDecouplesCountsFromLabelReliability) {
  // With no noise every label is reliable; with full noise none is. At
  // informativeness 0 both give the same defect-count distribution.
  SynthSpec clean, noisy;
  clean.informativeness = noisy.informativeness = 0.0;
  clean.label_noise = 0.0;
  noisy.label_noise = 1.0;
  clean.min_instances = noisy.min_instances = 2000;
  clean.max_instances = noisy.max_instances = 2000;
  auto mean_count = [](const std::vector<Dataset>& ds) {
    double sum = 0, n = 0;
    for (const auto& d : ds)
      for (const auto& i : d.instances)
        if (i.defects > 0) {
          sum += i.defects;
          n += 1;
        }
    return sum / n;
  };
  const double a = mean_count(generate_repository(clean, 5));
  const double b = mean_count(generate_repository(noisy, 5));
  EXPECT_NEAR(a, 1.0 + clean.defect_scale, 0.1);
  EXPECT_NEAR(b, 1.0 + clean.defect_scale, 0.1);

  clean.informativeness = noisy.informativeness = 1.0;
  EXPECT_NEAR(mean_count(generate_repository(clean, 5)), 1.0 + 2 * clean.defect_scale, 0.15);
  EXPECT_EQ(mean_count(generate_repository(noisy, 5)), 1.0);
}

TEST(Synth, FullInformativenessFavoursMixedAlpha) {
  SynthSpec spec;
  spec.informativeness = 1.0;
  const auto ds = generate_repository(spec, 8);
  ExperimentConfig cfg;
  const RunRecord r = run_experiment(ds, cfg);
  std::size_t below_one = 0;
  for (const auto& t : r.targets) {
    ASSERT_TRUE(t.ok) << t.error;
    double best = -1, best_alpha = 0;
    for (const auto& p : t.trace)
      if (p.auc > best) {
        best = p.auc;
        best_alpha = p.alpha;
      }
    EXPECT_EQ(t.alpha, best_alpha);
    EXPECT_GE(t.auc, t.nod_auc);
    if (t.alpha < 1.0) ++below_one;
  }
  EXPECT_GE(below_one * 2, r.targets.size());
}

TEST(Synth, InvalidSpecs) {
  SynthSpec spec;
  spec.projects = 1;
  EXPECT_THROW(generate_repository(spec, 1), ConfigError);
  spec = {};
  spec.defect_rate = 1.0;
  EXPECT_THROW(generate_repository(spec, 1), ConfigError);
  spec = {};
  spec.informativeness = 1.5;
  EXPECT_THROW(generate_repository(spec, 1), ConfigError);
  spec = {};
  spec.max_instances = spec.min_instances - 1;
  EXPECT_THROW(generate_repository(spec, 1), ConfigError);
}

}  // namespace
}  // namespace tdselector
