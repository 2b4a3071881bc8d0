#include "reid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reid/digest.hpp"
#include "reid/errors.hpp"
#include "reid/parallel.hpp"

namespace reid {
namespace {

const std::vector<double>& feature_of(const ImageRecord& rec) {
  if (!rec.feature)
    throw Error(ErrorCode::MissingFeature, "record " + format_image_filename(rec) + " has no feature");
  return *rec.feature;
}

bool contains_sorted(std::span<const std::size_t> sorted, std::size_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

std::vector<std::size_t> sorted_copy(std::span<const std::size_t> v) {
  std::vector<std::size_t> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Euclidean: return "euclidean";
    case Metric::SquaredEuclidean: return "squared_euclidean";
    case Metric::CosineDistance: return "cosine_distance";
  }
  return "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "squared_euclidean") return Metric::SquaredEuclidean;
  if (name == "cosine_distance" || name == "cosine") return Metric::CosineDistance;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(name) + "'");
}

std::size_t ValidityMask::count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

ValidityMask exclusion_mask(const Dataset& dataset) {
  ValidityMask mask;
  mask.rows = dataset.num_queries();
  mask.cols = dataset.num_gallery();
  mask.valid.assign(mask.rows * mask.cols, 1);
  mask.provenance = "exclusion";
  for (std::size_t q = 0; q < mask.rows; ++q) {
    const auto& qr = dataset.queries()[q];
    for (std::size_t g = 0; g < mask.cols; ++g) {
      const auto& gr = dataset.gallery()[g];
      if (gr.person_id == qr.person_id && gr.camera_id == qr.camera_id) mask.set(q, g, false);
    }
  }
  return mask;
}

ValidityMask intersect(const ValidityMask& a, const ValidityMask& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorCode::DimensionMismatch, "mask shapes differ");
  ValidityMask out = a;
  for (std::size_t i = 0; i < out.valid.size(); ++i) out.valid[i] = a.valid[i] & b.valid[i];
  out.provenance = a.provenance + "+" + b.provenance;
  return out;
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "feature lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

DistanceMatrix compute_distances(const Dataset& dataset, Metric metric, unsigned threads) {
  DistanceMatrix dist;
  dist.rows = dataset.num_queries();
  dist.cols = dataset.num_gallery();
  dist.values.assign(dist.rows * dist.cols, 0.0);
  dist.metric_name = metric_name(metric);

  std::vector<double> gallery_norms;
  for (const auto& g : dataset.gallery()) {
    const auto& f = feature_of(g);
    if (metric == Metric::CosineDistance) {
      const double n = std::sqrt(std::inner_product(f.begin(), f.end(), f.begin(), 0.0));
      if (n == 0.0) throw Error(ErrorCode::ZeroNormVector, "zero-norm gallery feature");
      gallery_norms.push_back(n);
    }
  }
  for (const auto& q : dataset.queries()) feature_of(q);

  parallel_for(dist.rows, threads, [&](std::size_t q) {
    const auto& xq = *dataset.queries()[q].feature;
    double qnorm = 0.0;
    if (metric == Metric::CosineDistance) {
      qnorm = std::sqrt(std::inner_product(xq.begin(), xq.end(), xq.begin(), 0.0));
      if (qnorm == 0.0) throw Error(ErrorCode::ZeroNormVector, "zero-norm query feature");
    }
    for (std::size_t g = 0; g < dist.cols; ++g) {
      const auto& xg = *dataset.gallery()[g].feature;
      double d = 0.0;
      switch (metric) {
        case Metric::Euclidean: d = std::sqrt(squared_euclidean(xq, xg)); break;
        case Metric::SquaredEuclidean: d = squared_euclidean(xq, xg); break;
        case Metric::CosineDistance: {
          const double dot = std::inner_product(xq.begin(), xq.end(), xg.begin(), 0.0);
          // Rounding can push the cosine slightly past 1.
          d = std::max(0.0, 1.0 - dot / (qnorm * gallery_norms[g]));
          break;
        }
      }
      dist.values[q * dist.cols + g] = d;
    }
  });
  return dist;
}

std::vector<Ranking> rank_gallery(const DistanceMatrix& dist, const ValidityMask& mask, unsigned threads) {
  if (dist.rows != mask.rows || dist.cols != mask.cols)
    throw Error(ErrorCode::DimensionMismatch, "distance matrix and mask shapes differ");
  std::vector<Ranking> out(dist.rows);
  parallel_for(dist.rows, threads, [&](std::size_t q) {
    auto& r = out[q];
    for (std::size_t g = 0; g < dist.cols; ++g)
      if (mask.at(q, g)) r.push_back(g);
    const auto row = dist.row(q);
    std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
  });
  return out;
}

std::vector<std::vector<std::size_t>> relevant_sets(const Dataset& dataset, const ValidityMask& mask) {
  std::vector<std::vector<std::size_t>> out(dataset.num_queries());
  for (std::size_t q = 0; q < dataset.num_queries(); ++q)
    for (std::size_t g = 0; g < dataset.num_gallery(); ++g)
      if (mask.at(q, g) && dataset.gallery()[g].person_id == dataset.queries()[q].person_id)
        out[q].push_back(g);
  return out;
}

double average_precision(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant) {
  const auto rel = sorted_copy(relevant);
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (contains_sorted(rel, ranked[k])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw Error(ErrorCode::NoRelevantItems, "no relevant item in ranked list");
  return sum / static_cast<double>(hits);
}

std::size_t first_match_position(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant) {
  const auto rel = sorted_copy(relevant);
  for (std::size_t k = 0; k < ranked.size(); ++k)
    if (contains_sorted(rel, ranked[k])) return k + 1;
  return 0;
}

std::map<int, double> cmc_at(const std::vector<Ranking>& ranked,
                             const std::vector<std::vector<std::size_t>>& relevant, const std::vector<int>& ks) {
  if (ranked.size() != relevant.size())
    throw Error(ErrorCode::DimensionMismatch, "ranked lists and relevance sets differ in length");
  std::map<int, std::size_t> hits;
  for (int k : ks) hits[k] = 0;
  std::size_t evaluated = 0;
  for (std::size_t q = 0; q < ranked.size(); ++q) {
    const auto pos = first_match_position(ranked[q], relevant[q]);
    if (pos == 0) continue;
    ++evaluated;
    for (int k : ks)
      if (pos <= static_cast<std::size_t>(k)) ++hits[k];
  }
  std::map<int, double> out;
  for (const auto& [k, h] : hits)
    out[k] = evaluated == 0 ? 0.0 : static_cast<double>(h) / static_cast<double>(evaluated);
  return out;
}

EvalReport evaluate_rankings(const Dataset& dataset, const std::vector<Ranking>& rankings,
                             const ValidityMask& mask, const std::string& method, const std::string& metric) {
  if (rankings.size() != dataset.num_queries())
    throw Error(ErrorCode::DimensionMismatch, "one ranking per query expected");
  const auto relevant = relevant_sets(dataset, mask);

  EvalReport report;
  report.method = method;
  report.metric = metric;
  report.mask_provenance = mask.provenance;
  report.config_digest = digest_string(method + "|" + metric + "|" + mask.provenance);

  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    if (first_match_position(rankings[q], relevant[q]) == 0) {
      report.skipped_queries.push_back(q);
      continue;
    }
    const double ap = average_precision(rankings[q], relevant[q]);
    report.per_query_ap.push_back({q, ap});
    sum += ap;
  }
  if (report.per_query_ap.empty())
    throw Error(ErrorCode::AllQueriesSkipped, "no query has a valid relevant gallery item");
  report.map = sum / static_cast<double>(report.per_query_ap.size());
  report.cmc = cmc_at(rankings, relevant);
  return report;
}

EvalReport evaluate(const Dataset& dataset, const DistanceMatrix& dist, const ValidityMask& mask,
                    unsigned threads) {
  return evaluate_rankings(dataset, rank_gallery(dist, mask, threads), mask, "appearance", dist.metric_name);
}

}  // namespace reid
