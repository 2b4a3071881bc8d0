#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace reid {

enum class PriorFamily {
  Gamma,
  Exponential,
  Beta,
  Pareto,
  Chi2,
  Laplace,
  LaplaceAsymmetric,
  StudentT,
  WeibullMin,
  Cauchy,
  Kappa3,
  BoxUniform,
};

const std::vector<PriorFamily>& all_prior_families();
std::string family_name(PriorFamily f);
PriorFamily parse_family(std::string_view name);

/// Names of the shape parameters a family expects, in canonical order.
const std::vector<std::string>& shape_parameter_names(PriorFamily f);

/// A location-scale density over time gaps in minutes:
///   f(x) = g((x - loc) / scale) / scale
/// with g the family's standard form. box_uniform ignores loc/scale (they
/// must be 0 and 1) and uses shape {lo, hi} directly in minutes.
struct PriorSpec {
  PriorFamily family = PriorFamily::Gamma;
  std::map<std::string, double> shape;
  double loc = 0.0;
  double scale = 1.0;

  double param(const std::string& name) const;

  /// Throws InvalidParameters.
  void validate() const;

  static PriorSpec gamma(double a, double loc = 0.0, double scale = 1.0);
  static PriorSpec exponential(double loc = 0.0, double scale = 1.0);
  static PriorSpec beta(double a, double b, double loc = 0.0, double scale = 1.0);
  static PriorSpec pareto(double b, double loc = 0.0, double scale = 1.0);
  static PriorSpec chi2(double df, double loc = 0.0, double scale = 1.0);
  static PriorSpec laplace(double loc = 0.0, double scale = 1.0);
  static PriorSpec laplace_asymmetric(double kappa, double loc = 0.0, double scale = 1.0);
  static PriorSpec student_t(double df, double loc = 0.0, double scale = 1.0);
  static PriorSpec weibull_min(double c, double loc = 0.0, double scale = 1.0);
  static PriorSpec cauchy(double loc = 0.0, double scale = 1.0);
  static PriorSpec kappa3(double a, double loc = 0.0, double scale = 1.0);
  static PriorSpec box_uniform(double lo, double hi);

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Density at x (minutes). Exactly 0 outside the support. A family whose
/// density diverges at its support boundary (e.g. gamma with a < 1) returns
/// +infinity there.
double pdf(const PriorSpec& spec, double x);

/// log of the density, computed directly in log space; -infinity outside the
/// support.
double log_pdf(const PriorSpec& spec, double x);

/// Closure of the support in x units; bounds may be infinite.
std::pair<double, double> support(const PriorSpec& spec);

double log_likelihood(const PriorSpec& spec, std::span<const double> samples);

enum class FitMethod {
  Auto,       // closed form where one exists, optimizer otherwise
  Optimizer,  // always Nelder-Mead
};

struct FitOptions {
  std::optional<double> fixed_loc;
  FitMethod method = FitMethod::Auto;
  std::size_t max_iterations = 10000;
  double tolerance = 1e-8;  // on log-likelihood
  std::size_t loc_grid_points = 21;
};

struct FitResult {
  PriorSpec spec;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  std::string method;
};

/// Maximum-likelihood fit. Lower-bounded families profile loc over the grid
/// [min - 1, min) unless it is fixed. Needs at least 30 finite samples.
FitResult fit_prior(std::span<const double> samples, PriorFamily family, const FitOptions& options = {});

/// Deterministic draws for gamma, exponential, laplace, box_uniform,
/// weibull_min and cauchy; other families throw UnsupportedFamily.
std::vector<double> sample_prior(const PriorSpec& spec, std::size_t n, std::uint64_t seed);

nlohmann::json prior_to_json(const PriorSpec& spec);
PriorSpec prior_from_json(const nlohmann::json& j);

}  // namespace reid
