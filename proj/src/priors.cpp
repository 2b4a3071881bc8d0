#include "reid/priors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "reid/errors.hpp"

namespace reid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidParameters, why); }

// k * log(z) with the 0 * log(0) = 0 convention.
double xlogy(double k, double z) {
  if (z == 0.0) {
    if (k == 0.0) return 0.0;
    return k > 0.0 ? -kInf : kInf;
  }
  return k * std::log(z);
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

using Params = std::array<double, 2>;

Params extract(const PriorSpec& spec) {
  Params p{0.0, 0.0};
  const auto& names = shape_parameter_names(spec.family);
  for (std::size_t i = 0; i < names.size(); ++i) p[i] = spec.param(names[i]);
  return p;
}

// Standard-form density g(z), linear domain. p holds the shape parameters in
// shape_parameter_names order.
double standard_pdf(PriorFamily family, const Params& p, double z) {
  using std::exp;
  using std::pow;
  switch (family) {
    case PriorFamily::Gamma: {
      const double a = p[0];
      if (z < 0.0) return 0.0;
      return pow(z, a - 1.0) * exp(-z) / std::tgamma(a);
    }
    case PriorFamily::Exponential:
      return z < 0.0 ? 0.0 : exp(-z);
    case PriorFamily::Beta: {
      const double a = p[0], b = p[1];
      if (z < 0.0 || z > 1.0) return 0.0;
      return pow(z, a - 1.0) * pow(1.0 - z, b - 1.0) * std::tgamma(a + b) / (std::tgamma(a) * std::tgamma(b));
    }
    case PriorFamily::Pareto: {
      const double b = p[0];
      return z < 1.0 ? 0.0 : b * pow(z, -b - 1.0);
    }
    case PriorFamily::Chi2: {
      const double k = p[0];
      if (z < 0.0) return 0.0;
      return pow(z, k / 2.0 - 1.0) * exp(-z / 2.0) / (pow(2.0, k / 2.0) * std::tgamma(k / 2.0));
    }
    case PriorFamily::Laplace:
      return 0.5 * exp(-std::abs(z));
    case PriorFamily::LaplaceAsymmetric: {
      const double k = p[0];
      const double c = k / (1.0 + k * k);
      return z >= 0.0 ? c * exp(-z * k) : c * exp(z / k);
    }
    case PriorFamily::StudentT: {
      const double nu = p[0];
      return std::tgamma((nu + 1.0) / 2.0) / (std::sqrt(nu * std::numbers::pi) * std::tgamma(nu / 2.0)) *
             pow(1.0 + z * z / nu, -(nu + 1.0) / 2.0);
    }
    case PriorFamily::WeibullMin: {
      const double c = p[0];
      if (z < 0.0) return 0.0;
      return c * pow(z, c - 1.0) * exp(-pow(z, c));
    }
    case PriorFamily::Cauchy:
      return 1.0 / (std::numbers::pi * (1.0 + z * z));
    case PriorFamily::Kappa3: {
      const double a = p[0];
      if (z < 0.0) return 0.0;
      return a * pow(a + pow(z, a), -(a + 1.0) / a);
    }
    case PriorFamily::BoxUniform: {
      const double lo = p[0], hi = p[1];
      return (z >= lo && z < hi) ? 1.0 / (hi - lo) : 0.0;
    }
  }
  return 0.0;
}

// Standard-form log density, computed without going through standard_pdf.
double standard_log_pdf(PriorFamily family, const Params& p, double z) {
  switch (family) {
    case PriorFamily::Gamma: {
      const double a = p[0];
      if (z < 0.0) return -kInf;
      return xlogy(a - 1.0, z) - z - std::lgamma(a);
    }
    case PriorFamily::Exponential:
      return z < 0.0 ? -kInf : -z;
    case PriorFamily::Beta: {
      const double a = p[0], b = p[1];
      if (z < 0.0 || z > 1.0) return -kInf;
      return xlogy(a - 1.0, z) + xlogy(b - 1.0, 1.0 - z) - log_beta_fn(a, b);
    }
    case PriorFamily::Pareto: {
      const double b = p[0];
      return z < 1.0 ? -kInf : std::log(b) - (b + 1.0) * std::log(z);
    }
    case PriorFamily::Chi2: {
      const double h = p[0] / 2.0;
      if (z < 0.0) return -kInf;
      return xlogy(h - 1.0, z) - z / 2.0 - h * std::numbers::ln2 - std::lgamma(h);
    }
    case PriorFamily::Laplace:
      return -std::numbers::ln2 - std::abs(z);
    case PriorFamily::LaplaceAsymmetric: {
      const double k = p[0];
      const double log_c = std::log(k) - std::log1p(k * k);
      return z >= 0.0 ? log_c - z * k : log_c + z / k;
    }
    case PriorFamily::StudentT: {
      const double nu = p[0];
      return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi) -
             (nu + 1.0) / 2.0 * std::log1p(z * z / nu);
    }
    case PriorFamily::WeibullMin: {
      const double c = p[0];
      if (z < 0.0) return -kInf;
      return std::log(c) + xlogy(c - 1.0, z) - std::pow(z, c);
    }
    case PriorFamily::Cauchy:
      return -std::log(std::numbers::pi) - std::log1p(z * z);
    case PriorFamily::Kappa3: {
      const double a = p[0];
      if (z < 0.0) return -kInf;
      return std::log(a) - (a + 1.0) / a * std::log(a + std::pow(z, a));
    }
    case PriorFamily::BoxUniform: {
      const double lo = p[0], hi = p[1];
      return (z >= lo && z < hi) ? -std::log(hi - lo) : -kInf;
    }
  }
  return -kInf;
}

void check_x(double x) {
  if (std::isnan(x)) invalid("density evaluated at NaN");
}

}  // namespace

const std::vector<PriorFamily>& all_prior_families() {
  static const std::vector<PriorFamily> families{
      PriorFamily::Gamma,   PriorFamily::Exponential,       PriorFamily::Beta,     PriorFamily::Pareto,
      PriorFamily::Chi2,    PriorFamily::Laplace,           PriorFamily::LaplaceAsymmetric,
      PriorFamily::StudentT, PriorFamily::WeibullMin,       PriorFamily::Cauchy,   PriorFamily::Kappa3,
      PriorFamily::BoxUniform};
  return families;
}

std::string family_name(PriorFamily f) {
  switch (f) {
    case PriorFamily::Gamma: return "gamma";
    case PriorFamily::Exponential: return "exponential";
    case PriorFamily::Beta: return "beta";
    case PriorFamily::Pareto: return "pareto";
    case PriorFamily::Chi2: return "chi2";
    case PriorFamily::Laplace: return "laplace";
    case PriorFamily::LaplaceAsymmetric: return "laplace_asymmetric";
    case PriorFamily::StudentT: return "student_t";
    case PriorFamily::WeibullMin: return "weibull_min";
    case PriorFamily::Cauchy: return "cauchy";
    case PriorFamily::Kappa3: return "kappa3";
    case PriorFamily::BoxUniform: return "box_uniform";
  }
  return "gamma";
}

PriorFamily parse_family(std::string_view name) {
  for (auto f : all_prior_families())
    if (family_name(f) == name) return f;
  if (name == "t") return PriorFamily::StudentT;
  if (name == "box") return PriorFamily::BoxUniform;
  throw Error(ErrorCode::InvalidParameters, "unknown prior family '" + std::string(name) + "'");
}

const std::vector<std::string>& shape_parameter_names(PriorFamily f) {
  static const std::vector<std::string> none{}, a{"a"}, ab{"a", "b"}, b{"b"}, df{"df"}, kappa{"kappa"},
      c{"c"}, lohi{"lo", "hi"};
  switch (f) {
    case PriorFamily::Gamma:
    case PriorFamily::Kappa3: return a;
    case PriorFamily::Beta: return ab;
    case PriorFamily::Pareto: return b;
    case PriorFamily::Chi2:
    case PriorFamily::StudentT: return df;
    case PriorFamily::LaplaceAsymmetric: return kappa;
    case PriorFamily::WeibullMin: return c;
    case PriorFamily::BoxUniform: return lohi;
    case PriorFamily::Exponential:
    case PriorFamily::Laplace:
    case PriorFamily::Cauchy: return none;
  }
  return none;
}

double PriorSpec::param(const std::string& name) const {
  const auto it = shape.find(name);
  if (it == shape.end()) invalid(family_name(family) + " prior lacks shape parameter '" + name + "'");
  return it->second;
}

void PriorSpec::validate() const {
  const auto& names = shape_parameter_names(family);
  if (shape.size() != names.size())
    invalid(family_name(family) + " prior expects " + std::to_string(names.size()) + " shape parameter(s)");
  for (const auto& n : names)
    if (!std::isfinite(param(n))) invalid("shape parameter '" + n + "' must be finite");
  if (!std::isfinite(loc)) invalid("loc must be finite");
  if (!std::isfinite(scale) || scale <= 0.0) invalid("scale must be positive and finite");
  if (family == PriorFamily::BoxUniform) {
    if (loc != 0.0 || scale != 1.0) invalid("box_uniform takes loc 0 and scale 1");
    if (!(param("lo") < param("hi"))) invalid("box_uniform requires lo < hi");
    return;
  }
  for (const auto& n : names)
    if (param(n) <= 0.0) invalid(family_name(family) + " parameter '" + n + "' must be positive");
}

PriorSpec PriorSpec::gamma(double a, double loc, double scale) { return {PriorFamily::Gamma, {{"a", a}}, loc, scale}; }
PriorSpec PriorSpec::exponential(double loc, double scale) { return {PriorFamily::Exponential, {}, loc, scale}; }
PriorSpec PriorSpec::beta(double a, double b, double loc, double scale) {
  return {PriorFamily::Beta, {{"a", a}, {"b", b}}, loc, scale};
}
PriorSpec PriorSpec::pareto(double b, double loc, double scale) { return {PriorFamily::Pareto, {{"b", b}}, loc, scale}; }
PriorSpec PriorSpec::chi2(double df, double loc, double scale) { return {PriorFamily::Chi2, {{"df", df}}, loc, scale}; }
PriorSpec PriorSpec::laplace(double loc, double scale) { return {PriorFamily::Laplace, {}, loc, scale}; }
PriorSpec PriorSpec::laplace_asymmetric(double kappa, double loc, double scale) {
  return {PriorFamily::LaplaceAsymmetric, {{"kappa", kappa}}, loc, scale};
}
PriorSpec PriorSpec::student_t(double df, double loc, double scale) {
  return {PriorFamily::StudentT, {{"df", df}}, loc, scale};
}
PriorSpec PriorSpec::weibull_min(double c, double loc, double scale) {
  return {PriorFamily::WeibullMin, {{"c", c}}, loc, scale};
}
PriorSpec PriorSpec::cauchy(double loc, double scale) { return {PriorFamily::Cauchy, {}, loc, scale}; }
PriorSpec PriorSpec::kappa3(double a, double loc, double scale) { return {PriorFamily::Kappa3, {{"a", a}}, loc, scale}; }
PriorSpec PriorSpec::box_uniform(double lo, double hi) {
  return {PriorFamily::BoxUniform, {{"lo", lo}, {"hi", hi}}, 0.0, 1.0};
}

double pdf(const PriorSpec& spec, double x) {
  spec.validate();
  check_x(x);
  if (std::isinf(x)) return 0.0;
  const double z = (x - spec.loc) / spec.scale;
  const double v = standard_pdf(spec.family, extract(spec), z) / spec.scale;
  if (std::isnan(v)) {
    // Overflowing intermediates (e.g. pow(z, a-1) * exp(-z) for large z).
    return std::exp(log_pdf(spec, x));
  }
  return v;
}

double log_pdf(const PriorSpec& spec, double x) {
  spec.validate();
  check_x(x);
  if (std::isinf(x)) return -kInf;
  const double z = (x - spec.loc) / spec.scale;
  return standard_log_pdf(spec.family, extract(spec), z) - std::log(spec.scale);
}

std::pair<double, double> support(const PriorSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case PriorFamily::Gamma:
    case PriorFamily::Exponential:
    case PriorFamily::Chi2:
    case PriorFamily::WeibullMin:
    case PriorFamily::Kappa3: return {spec.loc, kInf};
    case PriorFamily::Beta: return {spec.loc, spec.loc + spec.scale};
    case PriorFamily::Pareto: return {spec.loc + spec.scale, kInf};
    case PriorFamily::BoxUniform: return {spec.param("lo"), spec.param("hi")};
    case PriorFamily::Laplace:
    case PriorFamily::LaplaceAsymmetric:
    case PriorFamily::StudentT:
    case PriorFamily::Cauchy: return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

double log_likelihood(const PriorSpec& spec, std::span<const double> samples) {
  spec.validate();
  const auto p = extract(spec);
  const double log_scale = std::log(spec.scale);
  double acc = 0.0;
  for (double x : samples) {
    check_x(x);
    if (std::isinf(x)) return -kInf;
    acc += standard_log_pdf(spec.family, p, (x - spec.loc) / spec.scale) - log_scale;
  }
  return acc;
}

std::vector<double> sample_prior(const PriorSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) invalid("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  switch (spec.family) {
    case PriorFamily::Gamma: {
      std::gamma_distribution<double> dist(spec.param("a"), 1.0);
      for (std::size_t i = 0; i < n; ++i) out.push_back(spec.loc + spec.scale * dist(rng));
      break;
    }
    case PriorFamily::Exponential: {
      std::exponential_distribution<double> dist(1.0);
      for (std::size_t i = 0; i < n; ++i) out.push_back(spec.loc + spec.scale * dist(rng));
      break;
    }
    case PriorFamily::Laplace: {
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = u(rng);
        const double mag = -std::log1p(-2.0 * std::abs(v));
        out.push_back(spec.loc + spec.scale * (v < 0.0 ? -mag : mag));
      }
      break;
    }
    case PriorFamily::BoxUniform: {
      std::uniform_real_distribution<double> u(spec.param("lo"), spec.param("hi"));
      for (std::size_t i = 0; i < n; ++i) out.push_back(u(rng));
      break;
    }
    case PriorFamily::WeibullMin: {
      std::weibull_distribution<double> dist(spec.param("c"), 1.0);
      for (std::size_t i = 0; i < n; ++i) out.push_back(spec.loc + spec.scale * dist(rng));
      break;
    }
    case PriorFamily::Cauchy: {
      std::cauchy_distribution<double> dist(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) out.push_back(spec.loc + spec.scale * dist(rng));
      break;
    }
    default:
      throw Error(ErrorCode::UnsupportedFamily, "no sampler for " + family_name(spec.family));
  }
  return out;
}

nlohmann::json prior_to_json(const PriorSpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(spec.family);
  j["shape"] = nlohmann::json::object();
  for (const auto& [k, v] : spec.shape) j["shape"][k] = v;
  j["loc"] = spec.loc;
  j["scale"] = spec.scale;
  j["unit"] = "minutes";
  if (spec.family == PriorFamily::Kappa3) j["convention"] = "g(z;a) = a*(a + z^a)^(-(a+1)/a), z >= 0";
  return j;
}

PriorSpec prior_from_json(const nlohmann::json& j) {
  try {
    PriorSpec spec;
    spec.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("shape"))
      for (const auto& [k, v] : j.at("shape").items()) spec.shape[k] = v.get<double>();
    spec.loc = j.value("loc", 0.0);
    spec.scale = j.value("scale", 1.0);
    if (j.contains("unit") && j.at("unit").get<std::string>() != "minutes")
      invalid("priors are defined over minutes");
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParameters, std::string("bad prior JSON: ") + e.what());
  }
}

}  // namespace reid
