#include "tdselector/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "parallel.hpp"
#include "tdselector/error.hpp"

namespace tdselector {

std::string_view to_string(NormalizationKind kind) {
  switch (kind) {
    case NormalizationKind::Linear: return "linear";
    case NormalizationKind::Logistic: return "logistic";
    case NormalizationKind::SquareRoot: return "sqrt";
    case NormalizationKind::Logarithmic: return "log";
    case NormalizationKind::InverseCotangent: return "arctan";
  }
  return "?";
}

NormalizationKind parse_normalization(std::string_view text) {
  if (text == "linear") return NormalizationKind::Linear;
  if (text == "logistic") return NormalizationKind::Logistic;
  if (text == "sqrt" || text == "square_root") return NormalizationKind::SquareRoot;
  if (text == "log" || text == "logarithmic") return NormalizationKind::Logarithmic;
  if (text == "arctan" || text == "inverse_cotangent") return NormalizationKind::InverseCotangent;
  throw ConfigError("unknown normalization '" + std::string(text) + "' (linear|logistic|sqrt|log|arctan)");
}

DefectRange DefectRange::of(std::span<const Instance> pool) {
  DefectRange range;
  if (pool.empty()) return range;
  range.min = range.max = pool.front().defects;
  for (const auto& inst : pool) {
    range.min = std::min(range.min, inst.defects);
    range.max = std::max(range.max, inst.defects);
  }
  return range;
}

double normalize_defect_count(NormalizationKind kind, std::uint32_t defects, DefectRange range,
                              bool clip_logarithmic) {
  const double x = static_cast<double>(defects);
  switch (kind) {
    case NormalizationKind::Linear:
      if (range.max == range.min) return 0.0;
      return (x - range.min) / (static_cast<double>(range.max) - range.min);
    case NormalizationKind::Logistic:
      return 1.0 / (1.0 + std::exp(-x)) - 0.5;
    case NormalizationKind::SquareRoot:
      return 1.0 - 1.0 / std::sqrt(1.0 + x);
    case NormalizationKind::Logarithmic: {
      const double v = std::log10(x + 1.0);
      return clip_logarithmic ? std::min(v, 1.0) : v;
    }
    case NormalizationKind::InverseCotangent:
      return std::atan(x) * 2.0 / std::numbers::pi;
  }
  return 0.0;
}

void SelectorConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(alpha_step > 0.0 && alpha_step <= 1.0)) throw ConfigError("alpha_step must lie in (0, 1]");
  if (bug_threshold && *bug_threshold < 1) throw ConfigError("bug threshold must be at least 1");
}

namespace {

inline double blend(double alpha, double sim, double norm) { return alpha * sim + (1.0 - alpha) * norm; }

}  // namespace

ScoredCandidate score_pair(const Instance& candidate, const Instance& test, const SelectorConfig& cfg,
                           DefectRange range) {
  ScoredCandidate sc;
  sc.id = candidate.id;
  sc.sim = similarity_of(cfg.similarity, candidate.metrics, test.metrics, cfg.distance_transform);
  sc.norm_defects = normalize_defect_count(cfg.normalization, candidate.defects, range, cfg.clip_logarithmic);
  sc.score = blend(cfg.alpha, sc.sim, sc.norm_defects);
  return sc;
}

std::vector<RankedCandidate> rank_candidates(std::span<const Instance> pool, const Instance& test,
                                             const SelectorConfig& cfg) {
  cfg.validate();
  const DefectRange range = DefectRange::of(pool);
  std::vector<RankedCandidate> ranked;
  ranked.reserve(pool.size());
  for (const auto& cand : pool) {
    RankedCandidate rc;
    static_cast<ScoredCandidate&>(rc) = score_pair(cand, test, cfg, range);
    ranked.push_back(std::move(rc));
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ranked[i].rank = i == 0 ? 1 : ranked[i - 1].rank + (ranked[i].score != ranked[i - 1].score ? 1 : 0);
  }
  return ranked;
}

bool SelectionResult::is_forced(const InstanceId& id) const {
  return std::binary_search(forced.begin(), forced.end(), id);
}

PreparedSelection::PreparedSelection(std::span<const Instance> pool, std::span<const Instance> tests,
                                     SimilarityKind kind, DistanceTransform transform, unsigned threads)
    : pool_(pool), tests_(tests), kind_(kind), transform_(transform), threads_(std::max(1u, threads)) {
  if (pool_.empty()) throw EmptyPoolError("candidate pool is empty");
  if (tests_.empty()) throw ValidationError("test set is empty");
  sims_.resize(tests_.size() * pool_.size());
  detail::parallel_for(tests_.size(), threads_, [&](std::size_t t) {
    double* row = sims_.data() + t * pool_.size();
    for (std::size_t c = 0; c < pool_.size(); ++c) {
      row[c] = similarity_of(kind_, pool_[c].metrics, tests_[t].metrics, transform_);
    }
  });
  by_id_.resize(pool_.size());
  std::iota(by_id_.begin(), by_id_.end(), std::size_t{0});
  std::sort(by_id_.begin(), by_id_.end(),
            [&](std::size_t a, std::size_t b) { return pool_[a].id < pool_[b].id; });
}

SelectionResult PreparedSelection::select_ranked(const SelectorConfig& cfg,
                                                 const std::vector<bool>* excluded) const {
  // Candidate positions follow id order, so a position tie-break is an id tie-break.
  std::vector<std::size_t> cand;
  cand.reserve(by_id_.size());
  for (std::size_t idx : by_id_)
    if (!excluded || !(*excluded)[idx]) cand.push_back(idx);
  if (cand.empty()) throw EmptyPoolError("candidate pool is empty");

  DefectRange range;
  range.min = range.max = pool_[cand.front()].defects;
  for (std::size_t idx : cand) {
    range.min = std::min(range.min, pool_[idx].defects);
    range.max = std::max(range.max, pool_[idx].defects);
  }
  std::vector<double> norm(cand.size());
  for (std::size_t p = 0; p < cand.size(); ++p) {
    norm[p] = normalize_defect_count(cfg.normalization, pool_[cand[p]].defects, range, cfg.clip_logarithmic);
  }

  const std::size_t k = std::min(cfg.k, cand.size());
  SelectionResult result;
  result.alpha_used = cfg.alpha;
  result.per_test_topk.resize(tests_.size());
  std::vector<std::vector<std::size_t>> picked(tests_.size());

  detail::parallel_for(tests_.size(), threads_, [&](std::size_t t) {
    std::vector<double> score(cand.size());
    for (std::size_t p = 0; p < cand.size(); ++p) score[p] = blend(cfg.alpha, similarity(t, cand[p]), norm[p]);
    auto better = [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return a < b;
    };
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), better);
    const double cutoff = score[order[k - 1]];
    std::vector<std::size_t> top;
    for (std::size_t p = 0; p < cand.size(); ++p)
      if (score[p] >= cutoff) top.push_back(p);
    std::sort(top.begin(), top.end(), better);

    TestRanking& ranking = result.per_test_topk[t];
    ranking.test = tests_[t].id;
    ranking.top_k.reserve(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
      const std::size_t p = top[i];
      RankedCandidate rc;
      rc.id = pool_[cand[p]].id;
      rc.sim = similarity(t, cand[p]);
      rc.norm_defects = norm[p];
      rc.score = score[p];
      rc.rank = i == 0 ? 1 : ranking.top_k.back().rank + (score[p] != ranking.top_k.back().score ? 1 : 0);
      ranking.top_k.push_back(std::move(rc));
      picked[t].push_back(cand[p]);
    }
  });

  std::vector<bool> chosen(pool_.size(), false);
  for (const auto& indices : picked)
    for (std::size_t idx : indices) chosen[idx] = true;
  for (std::size_t idx : by_id_)
    if (chosen[idx]) result.selected.push_back(pool_[idx]);
  return result;
}

SelectionResult PreparedSelection::select(const SelectorConfig& cfg) const {
  cfg.validate();
  if (cfg.similarity != kind_ || cfg.distance_transform != transform_) {
    throw ConfigError("selector similarity does not match the prepared similarity table");
  }
  if (!cfg.bug_threshold) return select_ranked(cfg, nullptr);

  const std::uint32_t threshold = *cfg.bug_threshold;
  std::vector<bool> forced(pool_.size(), false);
  std::size_t forced_count = 0;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].defects >= threshold) {
      forced[i] = true;
      ++forced_count;
    }
  }

  SelectionResult result;
  if (forced_count == pool_.size()) {
    result.alpha_used = cfg.alpha;
    result.per_test_topk.resize(tests_.size());
    for (std::size_t t = 0; t < tests_.size(); ++t) result.per_test_topk[t].test = tests_[t].id;
    result.warnings.push_back("every pool instance has at least " + std::to_string(threshold) +
                              " defects; ranking stage skipped");
  } else {
    result = select_ranked(cfg, &forced);
  }

  std::vector<bool> chosen(pool_.size(), false);
  for (std::size_t idx : by_id_) {
    if (forced[idx]) {
      chosen[idx] = true;
      result.forced.push_back(pool_[idx].id);
    }
  }
  for (const auto& inst : result.selected) {
    auto it = std::lower_bound(by_id_.begin(), by_id_.end(), inst.id,
                               [&](std::size_t idx, const InstanceId& id) { return pool_[idx].id < id; });
    chosen[*it] = true;
  }
  result.selected.clear();
  for (std::size_t idx : by_id_)
    if (chosen[idx]) result.selected.push_back(pool_[idx]);
  return result;
}

SelectionResult select_training_set(std::span<const Instance> pool, std::span<const Instance> tests,
                                    const SelectorConfig& cfg) {
  SelectorConfig plain = cfg;
  plain.bug_threshold.reset();
  return PreparedSelection(pool, tests, cfg.similarity, cfg.distance_transform).select(plain);
}

SelectionResult select_with_bug_threshold(std::span<const Instance> pool, std::span<const Instance> tests,
                                          const SelectorConfig& cfg) {
  if (!cfg.bug_threshold) throw ConfigError("select_with_bug_threshold requires a bug threshold");
  return PreparedSelection(pool, tests, cfg.similarity, cfg.distance_transform).select(cfg);
}

SelectionResult select(std::span<const Instance> pool, std::span<const Instance> tests,
                       const SelectorConfig& cfg) {
  return PreparedSelection(pool, tests, cfg.similarity, cfg.distance_transform).select(cfg);
}

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("alpha step must lie in (0, 1]");
  const long long n = std::llround(1.0 / step);
  if (n < 1 || std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) {
    throw ConfigError("alpha step must divide 1 evenly");
  }
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (long long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
  return grid;
}

AlphaSearch optimize_alpha(const PreparedSelection& prepared, const SelectorConfig& cfg,
                           const AucOracle& oracle) {
  AlphaSearch search;
  SelectorConfig grid_cfg = cfg;
  for (double alpha : alpha_grid(cfg.alpha_step)) {
    grid_cfg.alpha = alpha;
    double value = 0.0;
    try {
      value = oracle(prepared.select(grid_cfg));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "AUC evaluation failed at alpha=" << alpha << ": " << e.what();
      throw OracleError(msg.str(), alpha);
    }
    search.trace.push_back({alpha, value});
    if (search.trace.size() == 1 || value > search.best_auc) {
      search.alpha = alpha;
      search.best_auc = value;
    }
  }
  return search;
}

AlphaSearch optimize_alpha(std::span<const Instance> pool, std::span<const Instance> tests,
                           const SelectorConfig& cfg, const AucOracle& oracle) {
  PreparedSelection prepared(pool, tests, cfg.similarity, cfg.distance_transform);
  return optimize_alpha(prepared, cfg, oracle);
}

}  // namespace tdselector
