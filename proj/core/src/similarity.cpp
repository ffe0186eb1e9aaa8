#include "tdselector/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdselector/error.hpp"

namespace tdselector {

namespace {

void check_dims(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("vector lengths differ: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  check_dims(u, v);
  if (u.empty()) throw DimensionError("cosine of empty vectors");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) throw UndefinedSimilarityError("cosine similarity of a zero vector");
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

double euclidean(std::span<const double> u, std::span<const double> v) {
  check_dims(u, v);
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double manhattan(std::span<const double> u, std::span<const double> v) {
  check_dims(u, v);
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += std::abs(u[k] - v[k]);
  return sum;
}

double similarity_of(SimilarityKind kind, std::span<const double> u, std::span<const double> v,
                     DistanceTransform transform) {
  double d = 0.0;
  switch (kind) {
    case SimilarityKind::Cosine:
      return cosine(u, v);
    case SimilarityKind::Euclidean:
      d = euclidean(u, v);
      break;
    case SimilarityKind::Manhattan:
      d = manhattan(u, v);
      break;
  }
  return transform == DistanceTransform::Reciprocal ? 1.0 / (1.0 + d) : std::exp(-d);
}

std::string_view to_string(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::Cosine: return "cosine";
    case SimilarityKind::Euclidean: return "euclidean";
    case SimilarityKind::Manhattan: return "manhattan";
  }
  return "?";
}

std::string_view to_string(DistanceTransform transform) {
  return transform == DistanceTransform::Reciprocal ? "reciprocal" : "negexp";
}

SimilarityKind parse_similarity(std::string_view text) {
  if (text == "cosine") return SimilarityKind::Cosine;
  if (text == "euclidean") return SimilarityKind::Euclidean;
  if (text == "manhattan") return SimilarityKind::Manhattan;
  throw ConfigError("unknown similarity '" + std::string(text) + "' (cosine|euclidean|manhattan)");
}

DistanceTransform parse_distance_transform(std::string_view text) {
  if (text == "reciprocal") return DistanceTransform::Reciprocal;
  if (text == "negexp") return DistanceTransform::NegativeExp;
  throw ConfigError("unknown distance transform '" + std::string(text) + "' (reciprocal|negexp)");
}

}  // namespace tdselector
