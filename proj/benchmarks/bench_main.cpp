#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tdselector/experiment.hpp"
#include "tdselector/learner.hpp"
#include "tdselector/selector.hpp"
#include "tdselector/similarity.hpp"
#include "tdselector/synth.hpp"

namespace {

using namespace tdselector;

std::vector<Instance> make_pool(std::size_t n, std::size_t dim, const std::string& dataset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::uint32_t> defects(0, 5);
  std::vector<Instance> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = {dataset, i};
    out[i].name = dataset + std::to_string(i);
    out[i].metrics.resize(dim);
    for (auto& v : out[i].metrics) v = normal(rng);
    out[i].defects = defects(rng);
  }
  return out;
}

void BM_Similarity(benchmark::State& state) {
  const auto kind = static_cast<SimilarityKind>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto v = make_pool(2, dim, "v", 1);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_of(kind, v[0].metrics, v[1].metrics));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Similarity)->ArgsProduct({{0, 1, 2}, {20, 76}});

void BM_PrepareSimilarities(benchmark::State& state) {
  const auto pool = make_pool(static_cast<std::size_t>(state.range(0)), 20, "pool", 2);
  const auto tests = make_pool(static_cast<std::size_t>(state.range(1)), 20, "test", 3);
  for (auto _ : state) {
    PreparedSelection prepared(pool, tests, SimilarityKind::Euclidean);
    benchmark::DoNotOptimize(prepared.similarity(0, 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_PrepareSimilarities)->Args({1000, 200})->Args({5000, 500})->Unit(benchmark::kMillisecond);

void BM_SelectPrepared(benchmark::State& state) {
  const auto pool = make_pool(5000, 20, "pool", 4);
  const auto tests = make_pool(500, 20, "test", 5);
  const PreparedSelection prepared(pool, tests, SimilarityKind::Euclidean);
  SelectorConfig cfg;
  cfg.alpha = 0.7;
  cfg.k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(prepared.select(cfg).selected.size());
}
BENCHMARK(BM_SelectPrepared)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  auto data = make_pool(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), "d", 6);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].defects = data[i].metrics[0] + 0.3 * data[i].metrics[1] > 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(train(data).bias);
}
BENCHMARK(BM_Train)->Args({500, 20})->Args({3000, 76})->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    labels[i] = u(rng) < 0.3;
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_RunTargetOptimized(benchmark::State& state) {
  SynthSpec spec;
  spec.informativeness = 0.8;
  const auto datasets = generate_repository(spec, 1);
  ExperimentConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_target(datasets, 0, cfg).auc);
}
BENCHMARK(BM_RunTargetOptimized)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
