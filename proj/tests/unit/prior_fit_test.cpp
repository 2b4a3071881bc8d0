#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reid/errors.hpp"
#include "reid/optimize.hpp"
#include "reid/priors.hpp"

namespace reid {
namespace {

ErrorCode fit_error(std::span<const double> samples, PriorFamily f, const FitOptions& o = {}) {
  try {
    fit_prior(samples, f, o);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "fit of " << family_name(f) << " did not throw";
  return ErrorCode::IoError;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

TEST(NelderMead, MinimizesRosenbrock) {
  const auto r = nelder_mead(
      [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
      },
      {-1.2, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 1e-3);
}

TEST(NelderMead, ReportsNonConvergenceAtIterationCap) {
  NelderMeadOptions o;
  o.max_iterations = 5;
  const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; }, {3.0, 4.0}, o);
  EXPECT_FALSE(r.converged);
}

TEST(FitPrior, GammaRecoveryWithFixedLoc) {
  const auto samples = sample_prior(PriorSpec::gamma(2.0, 0.0, 3.0), 10000, 2024);
  FitOptions o;
  o.fixed_loc = 0.0;
  const auto fit = fit_prior(samples, PriorFamily::Gamma, o);
  EXPECT_GE(fit.spec.param("a"), 1.8);
  EXPECT_LE(fit.spec.param("a"), 2.2);
  EXPECT_GE(fit.spec.scale, 2.7);
  EXPECT_LE(fit.spec.scale, 3.3);
  EXPECT_EQ(fit.spec.loc, 0.0);
  EXPECT_NEAR(fit.log_likelihood, log_likelihood(fit.spec, samples), 1e-9);
}

TEST(FitPrior, RecoversSampledFamiliesWithinTenPercent) {
  struct Case {
    PriorSpec truth;
    FitOptions options;
  };
  FitOptions zero_loc;
  zero_loc.fixed_loc = 0.0;
  for (const auto& c : {Case{PriorSpec::gamma(2.0, 0.0, 3.0), {}}, Case{PriorSpec::gamma(2.0, 0.0, 3.0), zero_loc},
                        Case{PriorSpec::laplace(1.1, 2.3), {}}, Case{PriorSpec::weibull_min(1.5, 0.0, 2.2), zero_loc},
                        Case{PriorSpec::exponential(0.0, 4.0), zero_loc}, Case{PriorSpec::exponential(2.0, 4.0), {}}}) {
    const auto samples = sample_prior(c.truth, 10000, 77);
    const auto fit = fit_prior(samples, c.truth.family, c.options);
    const auto name = family_name(c.truth.family);
    EXPECT_LE(rel_err(fit.spec.scale, c.truth.scale), 0.10) << name;
    for (const auto& [k, v] : c.truth.shape) EXPECT_LE(rel_err(fit.spec.param(k), v), 0.10) << name << " " << k;
    if (c.truth.loc != 0.0) EXPECT_LE(rel_err(fit.spec.loc, c.truth.loc), 0.10) << name;
  }
}

TEST(FitPrior, LaplaceClosedFormMatchesOptimizer) {
  auto samples = sample_prior(PriorSpec::laplace(1.1, 2.3), 10001, 5);
  const auto closed = fit_prior(samples, PriorFamily::Laplace);
  FitOptions o;
  o.method = FitMethod::Optimizer;
  const auto numeric = fit_prior(samples, PriorFamily::Laplace, o);
  EXPECT_EQ(closed.method, "closed_form");
  EXPECT_EQ(numeric.method, "nelder_mead");
  EXPECT_NEAR(closed.spec.loc, numeric.spec.loc, 1e-6);
  EXPECT_NEAR(closed.spec.scale, numeric.spec.scale, 1e-6);

  std::sort(samples.begin(), samples.end());
  const double median = samples[5000];
  double mad = 0.0;
  for (double x : samples) mad += std::abs(x - median);
  EXPECT_EQ(closed.spec.loc, median);
  EXPECT_NEAR(closed.spec.scale, mad / 10001.0, 1e-12);
}

TEST(FitPrior, EveryFamilyFitsAndIsLocallyOptimal) {
  const auto samples = sample_prior(PriorSpec::gamma(2.0, 0.0, 3.0), 600, 99);
  for (auto family : all_prior_families()) {
    const auto name = family_name(family);
    FitResult fit;
    ASSERT_NO_THROW(fit = fit_prior(samples, family)) << name;
    ASSERT_NO_THROW(fit.spec.validate()) << name;
    EXPECT_TRUE(std::isfinite(fit.log_likelihood)) << name;
    if (family == PriorFamily::BoxUniform || family == PriorFamily::Pareto) continue;
    // Nudging scale or any shape parameter must not beat the fit.
    for (double f : {0.97, 1.03}) {
      auto s = fit.spec;
      s.scale *= f;
      EXPECT_LE(log_likelihood(s, samples), fit.log_likelihood + 1e-6) << name << " scale x" << f;
      for (auto& [k, v] : fit.spec.shape) {
        auto t = fit.spec;
        t.shape[k] = v * f;
        EXPECT_LE(log_likelihood(t, samples), fit.log_likelihood + 1e-6) << name << " " << k << " x" << f;
      }
    }
  }
}

TEST(FitPrior, GammaBeatsLaplaceOnGammaData) {
  const auto samples = sample_prior(PriorSpec::gamma(2.0, 0.0, 3.0), 2000, 3);
  EXPECT_GT(fit_prior(samples, PriorFamily::Gamma).log_likelihood,
            fit_prior(samples, PriorFamily::Laplace).log_likelihood);
}

TEST(FitPrior, ProfiledLocStaysBelowSamples) {
  const auto samples = sample_prior(PriorSpec::gamma(0.8, -0.1, 9.4), 500, 17);
  const double mn = *std::min_element(samples.begin(), samples.end());
  for (auto family : {PriorFamily::Gamma, PriorFamily::WeibullMin, PriorFamily::Kappa3, PriorFamily::Chi2}) {
    const auto fit = fit_prior(samples, family);
    EXPECT_LT(fit.spec.loc, mn) << family_name(family);
    EXPECT_GE(fit.spec.loc, mn - 1.0) << family_name(family);
    EXPECT_NE(fit.method.find("loc_grid"), std::string::npos);
  }
}

TEST(FitPrior, BoxCoversTheSamples) {
  const auto samples = sample_prior(PriorSpec::box_uniform(2.0, 7.0), 100, 1);
  const auto fit = fit_prior(samples, PriorFamily::BoxUniform);
  for (double x : samples) EXPECT_GT(pdf(fit.spec, x), 0.0);
}

TEST(FitPrior, InputErrors) {
  const std::vector<double> constant(50, 4.0);
  EXPECT_EQ(fit_error(constant, PriorFamily::Gamma), ErrorCode::DegenerateSamples);
  const std::vector<double> few(29, 1.0);
  EXPECT_EQ(fit_error(few, PriorFamily::Gamma), ErrorCode::InsufficientSamples);
  auto with_nan = sample_prior(PriorSpec::gamma(2.0), 40, 1);
  with_nan[3] = std::nan("");
  EXPECT_EQ(fit_error(with_nan, PriorFamily::Laplace), ErrorCode::InvalidParameters);
  FitOptions bad_loc;
  bad_loc.fixed_loc = 100.0;
  EXPECT_EQ(fit_error(sample_prior(PriorSpec::gamma(2.0), 40, 1), PriorFamily::Gamma, bad_loc),
            ErrorCode::InvalidParameters);
}

TEST(FitPrior, IterationCapRaisesNonConvergence) {
  FitOptions o;
  o.max_iterations = 3;
  EXPECT_EQ(fit_error(sample_prior(PriorSpec::gamma(2.0), 200, 1), PriorFamily::StudentT, o),
            ErrorCode::NonConvergence);
}

TEST(FitPrior, Deterministic) {
  const auto samples = sample_prior(PriorSpec::gamma(2.0, 0.0, 3.0), 300, 8);
  for (auto family : all_prior_families()) {
    const auto a = fit_prior(samples, family);
    const auto b = fit_prior(samples, family);
    EXPECT_EQ(a.spec, b.spec) << family_name(family);
    EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  }
}

}  // namespace
}  // namespace reid
