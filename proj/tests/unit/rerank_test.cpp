#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "reid/errors.hpp"
#include "reid/rerank.hpp"
#include "test_helpers.hpp"

namespace reid {
namespace {

using testing::make_record;

std::vector<std::size_t> rank_of_each(const Ranking& r, std::size_t cols) {
  std::vector<std::size_t> pos(cols, SIZE_MAX);
  for (std::size_t i = 0; i < r.size(); ++i) pos[r[i]] = i;
  return pos;
}

Dataset tie_heavy_dataset(std::mt19937_64& rng) {
  testing::RandomDatasetSpec spec;
  spec.integer_features = true;
  spec.dim = 3;
  spec.t_span_sec = 5400;
  return testing::random_dataset(rng, spec);
}

TEST(Likelihood, AppearanceAnalyticPoints) {
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
  EXPECT_EQ(appearance_likelihood(a, b, 0.7), 1.0);
  const double sigma = 1.3;
  const std::vector<double> c{1.0 + sigma * std::sqrt(2.0), 2.0};
  EXPECT_NEAR(appearance_likelihood(a, c, sigma), std::exp(-1.0), 1e-15);
  EXPECT_LT(appearance_likelihood(a, c, sigma), 1.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{n(rng), n(rng), n(rng)}, y{n(rng), n(rng), n(rng)};
    EXPECT_NEAR(appearance_likelihood(x, y, 1e9), 1.0, 1e-9);
  }
  EXPECT_THROW(appearance_likelihood(a, b, 0.0), Error);
}

TEST(Likelihood, SpatialAnalyticPoints) {
  EXPECT_EQ(spatial_prior(0.0, 50.0), 1.0);
  EXPECT_NEAR(spatial_prior(48.5, 50.0), std::exp(-0.97), 1e-15);
  EXPECT_NEAR(spatial_prior(48.5, 50.0), 0.37908303810339883, 1e-15);
  EXPECT_NEAR(spatial_prior(48.5, 400.0), std::exp(-0.12125), 1e-15);
  EXPECT_GT(spatial_prior(48.5, 400.0), spatial_prior(48.5, 50.0));
  EXPECT_EQ(spatial_prior_proportional(0.0), 0.0);
  EXPECT_EQ(spatial_prior_proportional(48.5), 48.5);
}

TEST(Config, Validation) {
  RerankConfig c;
  EXPECT_NO_THROW(c.validate());
  c.sigma = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c.sigma = 1.0;
  c.spatial = {SpatialMode::Laplace, -1.0};
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_spatial_mode("prop"), SpatialMode::Proportional);
  EXPECT_EQ(spatial_mode_name(SpatialMode::Laplace), "laplace");
  EXPECT_THROW(parse_spatial_mode("gaussian"), Error);
}

TEST(Posterior, ScoreIsTheProductOfFactors) {
  const auto topo = daa_walking_topology();
  const Dataset ds(2, {make_record(1, "c0900", 36000, {0.0, 0.0})},
                   {make_record(1, "c0902", 36600, {0.6, 0.8}), make_record(2, "c0903", 35000, {0.0, 0.0})});
  RerankConfig c;
  c.sigma = 2.0;
  c.temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  c.spatial = {SpatialMode::Laplace, 50.0};
  const auto s = posterior_scores(ds, c, exclusion_mask(ds), &topo);
  const double expected = std::exp(-1.0 / 8.0) * pdf(c.temporal_prior, 10.0) * std::exp(-48.5 / 50.0);
  EXPECT_NEAR(s.at(0, 0), expected, 1e-15);
  EXPECT_EQ(s.at(0, 1), 0.0);  // negative gap under a forward-support prior

  c.spatial.mode = SpatialMode::Proportional;
  const auto p = posterior_scores(ds, c, exclusion_mask(ds), &topo);
  EXPECT_NEAR(p.at(0, 0), std::exp(-1.0 / 8.0) * pdf(c.temporal_prior, 10.0) * 48.5, 1e-13);

  EXPECT_THROW(posterior_scores(ds, c, exclusion_mask(ds), nullptr), Error);
}

TEST(Posterior, MaximalFactorsGiveTheRowMaximum) {
  // Gamma(2, scale 5) peaks at 5 minutes.
  const Dataset ds(1, {make_record(1, "c0900", 36000, {0.0})},
                   {make_record(1, "c0900", 36300, {0.0}), make_record(2, "c0902", 36300, {0.0}),
                    make_record(3, "c0900", 36600, {0.0}), make_record(4, "c0900", 36300, {0.4})});
  RerankConfig c;
  c.temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  c.spatial = {SpatialMode::Laplace, 100.0};
  const auto topo = daa_walking_topology();
  auto mask = exclusion_mask(ds);
  mask.set(0, 0, true);  // audit the otherwise-excluded best pair
  const auto s = posterior_log_scores(ds, c, mask, &topo);
  for (std::size_t g = 1; g < 4; ++g) EXPECT_GT(s.at(0, 0), s.at(0, g));
}

TEST(Rerank, ZeroScoresFormAnAppearanceOrderedTail) {
  const Dataset ds(1, {make_record(1, "c1", 1000, {0.0})},
                   {make_record(2, "c2", 900, {0.1}), make_record(3, "c2", 1300, {5.0}), make_record(4, "c2", 800, {0.05}),
                    make_record(1, "c2", 1200, {2.0})});
  RerankConfig c;
  c.temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  const auto r = rerank(ds, c);
  EXPECT_EQ(r.rankings[0], (Ranking{3, 1, 2, 0}));
}

TEST(Rerank, BoxPriorEqualsWindowFilter) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    RerankConfig c;
    c.sigma = 0.5 + static_cast<double>(rng() % 10);
    c.temporal_prior = PriorSpec::box_uniform(0.0, 30.0);
    const auto r = rerank(ds, c);
    const auto window_mask = testing::oracle_mask(ds, testing::OracleWindow{0.0, 30.0});
    const auto expected = testing::oracle_appearance_rankings(ds, window_mask);
    for (std::size_t q = 0; q < ds.num_queries(); ++q) {
      Ranking in_window;
      for (auto g : r.rankings[q])
        if (window_mask[q][g]) in_window.push_back(g);
      ASSERT_EQ(in_window, expected[q]);
      // In-window items lead; the rest form the zero-score tail.
      ASSERT_TRUE(std::equal(in_window.begin(), in_window.end(), r.rankings[q].begin()));
    }
  }
}

TEST(Rerank, ConstantPriorsGiveAppearanceOrder) {
  std::mt19937_64 rng(42);
  const auto topo = CameraTopology({"c900", "c901", "c902"}, {0, 10, 20, 10, 0, 15, 20, 15, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    RerankConfig c;
    c.sigma = 0.3 + static_cast<double>(rng() % 5);
    c.temporal_prior = PriorSpec::box_uniform(-1e6, 1e6);
    const auto r = rerank(ds, c);
    EXPECT_EQ(r.rankings, testing::oracle_appearance_rankings(ds, testing::oracle_mask(ds)));
    c.spatial = {SpatialMode::Laplace, 1e300};
    EXPECT_EQ(rerank(ds, c, std::nullopt, &topo).rankings, r.rankings);
  }
}

TEST(Rerank, HugeSigmaGivesPriorOrder) {
  std::mt19937_64 rng(43);
  const auto prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    RerankConfig c;
    c.sigma = 1e9;
    c.temporal_prior = prior;
    const auto r = rerank(ds, c);
    const auto mask = testing::oracle_mask(ds);
    for (std::size_t q = 0; q < ds.num_queries(); ++q) {
      const auto& qr = ds.queries()[q];
      Ranking expected;
      for (std::size_t g = 0; g < ds.num_gallery(); ++g)
        if (mask[q][g]) expected.push_back(g);
      std::sort(expected.begin(), expected.end(), [&](std::size_t a, std::size_t b) {
        const double pa = pdf(prior, delta_t_minutes(qr, ds.gallery()[a]));
        const double pb = pdf(prior, delta_t_minutes(qr, ds.gallery()[b]));
        if (pa != pb) return pa > pb;
        const double da = testing::oracle_squared_distance(qr, ds.gallery()[a]);
        const double db = testing::oracle_squared_distance(qr, ds.gallery()[b]);
        return da != db ? da < db : a < b;
      });
      ASSERT_EQ(r.rankings[q], expected);
    }
  }
}

TEST(Rerank, TinySigmaGivesAppearanceOrderAmongEqualPriors) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    double mean_d = 0.0;
    const auto dist = compute_distances(ds);
    for (double v : dist.values) mean_d += v / static_cast<double>(dist.values.size());
    RerankConfig c;
    c.sigma = 1e-6 * std::max(mean_d, 1.0);
    c.temporal_prior = PriorSpec::box_uniform(-1e6, 1e6);
    const auto r = rerank(ds, c);
    EXPECT_EQ(r.rankings, testing::oracle_appearance_rankings(ds, testing::oracle_mask(ds)));
  }
}

TEST(Rerank, RaisingOnePriorNeverLowersItsRank) {
  std::mt19937_64 rng(45);
  RerankConfig c;
  c.sigma = 2.0;
  c.temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);  // mode at 5 minutes
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    const std::size_t q = rng() % ds.num_queries(), g = rng() % ds.num_gallery();
    const auto before = rerank(ds, c);
    if (!before.mask.at(q, g)) continue;
    auto gallery = ds.gallery();
    gallery[g].timestamp_sec = ds.queries()[q].timestamp_sec + 300;
    if (pdf(c.temporal_prior, delta_t_minutes(ds.queries()[q], gallery[g])) <
        pdf(c.temporal_prior, delta_t_minutes(ds.queries()[q], ds.gallery()[g])))
      continue;
    const Dataset moved(ds.dimension(), ds.queries(), gallery);
    const auto after = rerank(moved, c);
    EXPECT_LE(rank_of_each(after.rankings[q], ds.num_gallery())[g],
              rank_of_each(before.rankings[q], ds.num_gallery())[g]);
  }
}

TEST(Rerank, LinearAndLogDomainsInduceTheSameOrder) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    RerankConfig c;
    c.sigma = 3.0;
    c.temporal_prior = PriorSpec::laplace(10.0, 20.0);
    const auto r = rerank(ds, c);
    const auto linear = to_linear(r.log_scores);
    for (std::size_t q = 0; q < ds.num_queries(); ++q) {
      bool representable = true;
      for (auto g : r.rankings[q]) representable &= linear.at(q, g) > 1e-300;
      if (!representable) continue;
      Ranking by_linear = r.rankings[q];
      std::sort(by_linear.begin(), by_linear.end(), [&](std::size_t a, std::size_t b) {
        if (linear.at(q, a) != linear.at(q, b)) return linear.at(q, a) > linear.at(q, b);
        return r.appearance.at(q, a) != r.appearance.at(q, b) ? r.appearance.at(q, a) < r.appearance.at(q, b) : a < b;
      });
      EXPECT_EQ(by_linear, r.rankings[q]);
    }
  }
}

TEST(Rerank, ScalingScoresKeepsOrder) {
  std::mt19937_64 rng(47);
  const auto ds = tie_heavy_dataset(rng);
  RerankConfig c;
  c.temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  const auto r = rerank(ds, c);
  auto shifted = r.log_scores;
  for (auto& v : shifted.values) v += std::log(17.0);
  EXPECT_EQ(order_by_posterior(shifted, r.appearance, r.mask), r.rankings);
}

TEST(Rerank, ThreadCountInvariant) {
  std::mt19937_64 rng(48);
  const auto topo = CameraTopology({"c900", "c901", "c902"}, {0, 10, 20, 10, 0, 15, 20, 15, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = tie_heavy_dataset(rng);
    RerankConfig c;
    c.temporal_prior = PriorSpec::gamma(0.5, -0.1, 9.4);
    c.spatial = {SpatialMode::Laplace, 50.0};
    const auto one = rerank(ds, c, TimeWindow(0, 30), &topo, 1);
    for (unsigned t : {2u, 4u, 7u}) {
      const auto many = rerank(ds, c, TimeWindow(0, 30), &topo, t);
      EXPECT_EQ(many.rankings, one.rankings);
      EXPECT_EQ(many.log_scores.values, one.log_scores.values);
    }
  }
}

TEST(Rerank, DensityPoleOutranksFiniteScores) {
  // gamma a < 1 has an infinite density exactly at loc.
  const Dataset ds(1, {make_record(1, "c1", 0, {0.0})},
                   {make_record(2, "c2", 60, {0.1}), make_record(3, "c2", 0, {3.0}), make_record(4, "c2", 0, {2.0})});
  RerankConfig c;
  c.temporal_prior = PriorSpec::gamma(0.5, 0.0, 9.4);
  const auto r = rerank(ds, c);
  EXPECT_EQ(r.rankings[0], (Ranking{2, 1, 0}));
  const auto lin = to_linear(r.log_scores);
  for (double v : lin.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(FrameMode, FactorsFollowTheRule) {
  const FrameModeConfig fm{{{"c1", 25.0}, {"c2", 10.0}}};
  const auto prior = PriorSpec::gamma(2.0, 0.0, 5.0);
  const auto q = make_record(1, "c1", 0, {}, 1000);
  EXPECT_EQ(frame_mode_log_prior(q, make_record(2, "c2", 999, {}, 123456), fm, prior), 0.0);
  EXPECT_EQ(frame_mode_log_prior(q, make_record(2, "c1", 5, {}, 1000), fm, prior), log_pdf(prior, 0.0));
  EXPECT_DOUBLE_EQ(frame_mode_log_prior(q, make_record(2, "c1", 5, {}, 1000 - 7500), fm, prior), log_pdf(prior, 5.0));
  try {
    frame_mode_log_prior(make_record(1, "c3", 0, {}), make_record(2, "c3", 0, {}), fm, prior);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFps);
  }
}

TEST(FrameMode, AllCrossCameraEqualsAppearance) {
  std::mt19937_64 rng(49);
  for (int trial = 0; trial < 50; ++trial) {
    auto base = tie_heavy_dataset(rng);
    auto queries = base.queries();
    for (auto& r : queries) r.camera_id = "c0";
    const Dataset ds(base.dimension(), queries, base.gallery());
    FrameModeConfig fm;
    for (const auto& cam : {"c0", "c900", "c901", "c902"}) fm.fps_per_camera[cam] = 25.0;
    const auto r = rerank_frames_tr(ds, fm, 1.0, PriorSpec::gamma(2.0, 0.0, 5.0));
    EXPECT_EQ(r.rankings, testing::oracle_appearance_rankings(ds, testing::oracle_mask(ds)));
  }
}

TEST(FrameMode, MissingFpsIsReported) {
  std::mt19937_64 rng(50);
  const auto ds = tie_heavy_dataset(rng);
  try {
    rerank_frames_tr(ds, FrameModeConfig{{{"c900", 25.0}}}, 1.0, PriorSpec::gamma(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFps);
  }
}

}  // namespace
}  // namespace reid
