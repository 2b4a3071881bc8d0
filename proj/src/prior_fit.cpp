#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "reid/errors.hpp"
#include "reid/optimize.hpp"
#include "reid/priors.hpp"

namespace reid {
namespace {

using Theta = std::vector<double>;

struct Candidate {
  Theta start;
  std::function<PriorSpec(const Theta&)> make;
};

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const auto n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double mean_abs_dev(std::span<const double> v, double center) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x - center);
  return acc / static_cast<double>(v.size());
}

bool lower_bounded(PriorFamily f) {
  switch (f) {
    case PriorFamily::Gamma:
    case PriorFamily::Exponential:
    case PriorFamily::Beta:
    case PriorFamily::Pareto:
    case PriorFamily::Chi2:
    case PriorFamily::WeibullMin:
    case PriorFamily::Kappa3: return true;
    default: return false;
  }
}

struct Fitter {
  std::span<const double> samples;
  PriorFamily family;
  const FitOptions& options;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t iterations = 0;

  double objective(const PriorSpec& spec) const {
    try {
      const double ll = log_likelihood(spec, samples);
      return std::isnan(ll) ? std::numeric_limits<double>::infinity() : -ll;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  FitResult optimize(const Candidate& c, const std::string& method) {
    NelderMeadOptions nm;
    nm.max_iterations = options.max_iterations;
    nm.f_tolerance = options.tolerance;
    const auto r = nelder_mead([&](const Theta& t) { return objective(c.make(t)); }, c.start, nm);
    iterations += r.iterations;
    if (!r.converged)
      throw Error(ErrorCode::NonConvergence, "fit of " + family_name(family) + " did not converge within " +
                                                 std::to_string(options.max_iterations) + " iterations");
    FitResult out;
    out.spec = c.make(r.x);
    out.log_likelihood = -r.value;
    out.method = method;
    return out;
  }

  FitResult closed(PriorSpec spec, const std::string& method) const {
    FitResult out;
    out.spec = std::move(spec);
    out.log_likelihood = log_likelihood(out.spec, samples);
    out.method = method;
    return out;
  }

  // Fit with loc held at `loc` for a family whose support starts at loc.
  FitResult fit_at_loc(double loc) {
    std::vector<double> z;
    z.reserve(samples.size());
    for (double x : samples) z.push_back(x - loc);
    const double zmean = mean_of(z);
    const double zvar = variance_of(z);
    const bool auto_method = options.method == FitMethod::Auto;

    switch (family) {
      case PriorFamily::Exponential:
        if (auto_method) return closed(PriorSpec::exponential(loc, zmean), "closed_form");
        return optimize({{std::log(zmean)}, [loc](const Theta& t) { return PriorSpec::exponential(loc, std::exp(t[0])); }},
                        "nelder_mead");
      case PriorFamily::Pareto: {
        // Scale sits on the smallest sample; b then has a closed form.
        const double scale = lo - loc;
        double acc = 0.0;
        for (double x : samples) acc += std::log((x - loc) / scale);
        const double b = static_cast<double>(samples.size()) / acc;
        if (auto_method) return closed(PriorSpec::pareto(b, loc, scale), "closed_form");
        return optimize({{std::log(b)}, [loc, scale](const Theta& t) { return PriorSpec::pareto(std::exp(t[0]), loc, scale); }},
                        "nelder_mead");
      }
      case PriorFamily::Gamma: {
        const double a0 = zmean * zmean / zvar, s0 = zvar / zmean;
        return optimize({{std::log(a0), std::log(s0)},
                         [loc](const Theta& t) { return PriorSpec::gamma(std::exp(t[0]), loc, std::exp(t[1])); }},
                        "nelder_mead");
      }
      case PriorFamily::Chi2: {
        const double s0 = zvar / (2.0 * zmean), df0 = zmean / s0;
        return optimize({{std::log(df0), std::log(s0)},
                         [loc](const Theta& t) { return PriorSpec::chi2(std::exp(t[0]), loc, std::exp(t[1])); }},
                        "nelder_mead");
      }
      case PriorFamily::WeibullMin:
        return optimize({{0.0, std::log(zmean)},
                         [loc](const Theta& t) { return PriorSpec::weibull_min(std::exp(t[0]), loc, std::exp(t[1])); }},
                        "nelder_mead");
      case PriorFamily::Kappa3:
        return optimize({{std::log(1.5), std::log(zmean)},
                         [loc](const Theta& t) { return PriorSpec::kappa3(std::exp(t[0]), loc, std::exp(t[1])); }},
                        "nelder_mead");
      case PriorFamily::Beta: {
        // scale = span * (1 + e^u) keeps every sample strictly inside.
        const double span = hi - loc;
        return optimize({{0.0, 0.0, 0.0},
                         [loc, span](const Theta& t) {
                           return PriorSpec::beta(std::exp(t[0]), std::exp(t[1]), loc, span * (1.0 + std::exp(t[2])));
                         }},
                        "nelder_mead");
      }
      default: break;
    }
    throw Error(ErrorCode::UnsupportedFamily, "no bounded-support fitter for " + family_name(family));
  }

  FitResult fit_lower_bounded() {
    if (options.fixed_loc) {
      if (!(*options.fixed_loc < lo))
        throw Error(ErrorCode::InvalidParameters, "fixed loc must lie below every sample for " + family_name(family));
      return fit_at_loc(*options.fixed_loc);
    }
    if (family == PriorFamily::Exponential && options.method == FitMethod::Auto)
      return closed(PriorSpec::exponential(lo, mean_of(samples) - lo), "closed_form");
    const std::size_t points = std::max<std::size_t>(1, options.loc_grid_points);
    std::optional<FitResult> best;
    for (std::size_t k = 0; k < points; ++k) {
      const double loc = lo - 1.0 + static_cast<double>(k) / static_cast<double>(points);
      auto r = fit_at_loc(loc);
      if (!best || r.log_likelihood > best->log_likelihood) best = std::move(r);
    }
    best->method += "+loc_grid";
    return *best;
  }

  FitResult fit_unbounded() {
    const auto fixed = options.fixed_loc;
    const double med = median_of(samples);
    const bool auto_method = options.method == FitMethod::Auto;

    if (family == PriorFamily::Laplace) {
      const double loc = fixed.value_or(med);
      if (auto_method) return closed(PriorSpec::laplace(loc, mean_abs_dev(samples, loc)), "closed_form");
      const double sd = std::sqrt(variance_of(samples));
      if (fixed)
        return optimize({{std::log(sd)}, [loc](const Theta& t) { return PriorSpec::laplace(loc, std::exp(t[0])); }},
                        "nelder_mead");
      return optimize({{mean_of(samples), std::log(sd)},
                       [](const Theta& t) { return PriorSpec::laplace(t[0], std::exp(t[1])); }},
                      "nelder_mead");
    }

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const double iqr = sorted[(3 * n) / 4] - sorted[n / 4];
    const double s0 = iqr > 0.0 ? iqr / 2.0 : std::sqrt(variance_of(samples));
    const double m0 = fixed.value_or(med);

    // Shape parameters first, then (unless fixed) loc, then log scale.
    auto build = [this, fixed](const Theta& t) {
      std::size_t i = 0;
      const double shape = (family == PriorFamily::StudentT || family == PriorFamily::LaplaceAsymmetric)
                               ? std::exp(t[i++])
                               : 0.0;
      const double loc = fixed ? *fixed : t[i++];
      const double scale = std::exp(t[i]);
      switch (family) {
        case PriorFamily::StudentT: return PriorSpec::student_t(shape, loc, scale);
        case PriorFamily::LaplaceAsymmetric: return PriorSpec::laplace_asymmetric(shape, loc, scale);
        default: return PriorSpec::cauchy(loc, scale);
      }
    };
    Theta start;
    if (family == PriorFamily::StudentT) start.push_back(std::log(3.0));
    if (family == PriorFamily::LaplaceAsymmetric) start.push_back(0.0);
    if (!fixed) start.push_back(m0);
    start.push_back(std::log(s0));
    return optimize({start, build}, "nelder_mead");
  }
};

}  // namespace

FitResult fit_prior(std::span<const double> samples, PriorFamily family, const FitOptions& options) {
  if (samples.size() < 30)
    throw Error(ErrorCode::InsufficientSamples,
                "need at least 30 samples to fit a prior, got " + std::to_string(samples.size()));
  for (double x : samples)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidParameters, "samples must be finite");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mn == *mx) throw Error(ErrorCode::DegenerateSamples, "samples have zero variance");

  Fitter fitter{samples, family, options, *mn, *mx};
  FitResult result;
  if (family == PriorFamily::BoxUniform) {
    result = fitter.closed(PriorSpec::box_uniform(*mn, std::nextafter(*mx, std::numeric_limits<double>::infinity())),
                           "closed_form");
  } else if (lower_bounded(family)) {
    result = fitter.fit_lower_bounded();
  } else {
    result = fitter.fit_unbounded();
  }
  result.iterations = fitter.iterations;
  return result;
}

}  // namespace reid
