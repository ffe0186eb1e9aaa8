#pragma once

#include <span>
#include <string_view>

namespace tdselector {

enum class SimilarityKind { Cosine, Euclidean, Manhattan };

/// How a distance becomes a similarity. Rankings are identical under every
/// choice; only the balance against the defect term in the score changes.
enum class DistanceTransform {
  Reciprocal,   // 1 / (1 + d)
  NegativeExp,  // exp(-d)
};

/// Throws DimensionError on length mismatch or empty input and
/// UndefinedSimilarityError when either vector has zero norm.
double cosine(std::span<const double> u, std::span<const double> v);
double euclidean(std::span<const double> u, std::span<const double> v);
double manhattan(std::span<const double> u, std::span<const double> v);

/// Cosine passes through unchanged; distances map to (0, 1] and equal 1 only
/// when u == v.
double similarity_of(SimilarityKind kind, std::span<const double> u, std::span<const double> v,
                     DistanceTransform transform = DistanceTransform::Reciprocal);

std::string_view to_string(SimilarityKind kind);
std::string_view to_string(DistanceTransform transform);
/// Accepts the CLI spellings ("cosine", "euclidean", "manhattan").
SimilarityKind parse_similarity(std::string_view text);
DistanceTransform parse_distance_transform(std::string_view text);

}  // namespace tdselector
