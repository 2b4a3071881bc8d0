#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reid/dataset.hpp"

namespace reid {

enum class Metric { Euclidean, SquaredEuclidean, CosineDistance };

std::string metric_name(Metric m);
Metric parse_metric(std::string_view name);

/// |Q| x |G| row-major distances; lower means more similar.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::string metric_name;

  double at(std::size_t q, std::size_t g) const { return values[q * cols + g]; }
  std::span<const double> row(std::size_t q) const { return {values.data() + q * cols, cols}; }
};

/// mask[q][g] is true when gallery item g is evaluable for query q.
struct ValidityMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> valid;
  std::string provenance;

  bool at(std::size_t q, std::size_t g) const { return valid[q * cols + g] != 0; }
  void set(std::size_t q, std::size_t g, bool v) { valid[q * cols + g] = v ? 1 : 0; }
  std::size_t count() const;
};

/// Mask that drops gallery items sharing both person id and camera with the
/// query (Market1501 convention).
ValidityMask exclusion_mask(const Dataset& dataset);

/// Element-wise AND; provenance strings are joined with '+'.
ValidityMask intersect(const ValidityMask& a, const ValidityMask& b);

double squared_euclidean(std::span<const double> a, std::span<const double> b);

DistanceMatrix compute_distances(const Dataset& dataset, Metric metric = Metric::Euclidean,
                                 unsigned threads = 1);

using Ranking = std::vector<std::size_t>;

/// Valid gallery indices by ascending distance, ties by gallery index.
std::vector<Ranking> rank_gallery(const DistanceMatrix& dist, const ValidityMask& mask, unsigned threads = 1);

/// Gallery indices sharing the query's person id that are valid under mask.
std::vector<std::vector<std::size_t>> relevant_sets(const Dataset& dataset, const ValidityMask& mask);

/// AP over a ranked list. Throws NoRelevantItems when no relevant item is
/// ranked.
double average_precision(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant);

/// 1-based position of the first relevant item, 0 when none is ranked.
std::size_t first_match_position(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant);

inline const std::vector<int> kDefaultCmcRanks{1, 5, 10, 20};

/// Rank-k accuracy (first-match convention). Queries without a ranked
/// relevant item are left out of the denominator.
std::map<int, double> cmc_at(const std::vector<Ranking>& ranked,
                             const std::vector<std::vector<std::size_t>>& relevant,
                             const std::vector<int>& ks = kDefaultCmcRanks);

struct QueryAp {
  std::size_t query = 0;
  double ap = 0.0;
  friend bool operator==(const QueryAp&, const QueryAp&) = default;
};

struct EvalReport {
  double map = 0.0;
  std::map<int, double> cmc;
  std::vector<QueryAp> per_query_ap;
  std::vector<std::size_t> skipped_queries;
  std::string method;
  std::string metric;
  std::string mask_provenance;
  std::string config_digest;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Scores arbitrary per-query rankings (e.g. re-ranked lists). Throws
/// AllQueriesSkipped when no query has a relevant item.
EvalReport evaluate_rankings(const Dataset& dataset, const std::vector<Ranking>& rankings,
                             const ValidityMask& mask, const std::string& method,
                             const std::string& metric);

EvalReport evaluate(const Dataset& dataset, const DistanceMatrix& dist, const ValidityMask& mask,
                    unsigned threads = 1);

}  // namespace reid
