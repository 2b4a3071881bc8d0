#include "reid/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace reid {
namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

double safe_eval(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// One Nelder-Mead run with adaptive coefficients (Gao & Han). Returns the
// iterations spent; the best vertex ends up at index 0.
std::size_t run(const std::function<double(const std::vector<double>&)>& f, Simplex& s,
                const NelderMeadOptions& opt, std::size_t budget, bool& converged) {
  const std::size_t n = s.x.front().size();
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 1.0 / (2.0 * dn), delta = 1.0 - 1.0 / dn;

  std::vector<std::size_t> order(n + 1);
  std::size_t it = 0;
  converged = false;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
    Simplex sorted;
    for (auto i : order) {
      sorted.x.push_back(s.x[i]);
      sorted.f.push_back(s.f[i]);
    }
    s = std::move(sorted);

    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(s.x[i][d] - s.x[0][d]));
    const double spread = s.f[n] - s.f[0];
    if (std::isfinite(spread) && (spread <= opt.f_tolerance || diameter <= opt.x_tolerance)) {
      converged = true;
      return it;
    }
    if (it >= budget) return it;
    ++it;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += s.x[i][d] / dn;
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (s.x[n][d] - centroid[d]);
      return p;
    };

    const auto xr = along(-alpha);
    const double fr = safe_eval(f, xr);
    if (fr < s.f[0]) {
      const auto xe = along(-alpha * beta);
      const double fe = safe_eval(f, xe);
      if (fe < fr) {
        s.x[n] = xe;
        s.f[n] = fe;
      } else {
        s.x[n] = xr;
        s.f[n] = fr;
      }
      continue;
    }
    if (fr < s.f[n - 1]) {
      s.x[n] = xr;
      s.f[n] = fr;
      continue;
    }
    const bool outside = fr < s.f[n];
    const auto xc = outside ? along(-alpha * gamma) : along(gamma);
    const double fc = safe_eval(f, xc);
    if (fc < (outside ? fr : s.f[n])) {
      s.x[n] = xc;
      s.f[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) s.x[i][d] = s.x[0][d] + delta * (s.x[i][d] - s.x[0][d]);
      s.f[i] = safe_eval(f, s.x[i]);
    }
  }
}

Simplex initial_simplex(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0,
                        double step) {
  Simplex s;
  s.x.push_back(x0);
  for (std::size_t d = 0; d < x0.size(); ++d) {
    auto p = x0;
    p[d] += (p[d] != 0.0) ? step * std::max(1.0, std::abs(p[d])) : step;
    s.x.push_back(std::move(p));
  }
  for (const auto& p : s.x) s.f.push_back(safe_eval(f, p));
  return s;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  NelderMeadResult result;
  result.x = std::move(x0);
  result.value = safe_eval(f, result.x);
  double step = options.initial_step;
  while (result.iterations < options.max_iterations) {
    auto s = initial_simplex(f, result.x, step);
    bool converged = false;
    result.iterations += run(f, s, options, options.max_iterations - result.iterations, converged);
    const double improvement = result.value - s.f[0];
    if (s.f[0] <= result.value) {
      result.x = s.x[0];
      result.value = s.f[0];
    }
    if (!converged) break;
    if (!(improvement > options.f_tolerance)) {
      result.converged = true;
      break;
    }
    step = std::max(options.initial_step * 0.1, 1e-4);
  }
  return result;
}

}  // namespace reid
