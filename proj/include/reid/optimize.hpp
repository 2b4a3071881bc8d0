#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace reid {

struct NelderMeadOptions {
  std::size_t max_iterations = 10000;
  double f_tolerance = 1e-8;  // absolute spread of simplex values; either test stops a run
  double x_tolerance = 1e-10;  // simplex diameter, per coordinate
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes f with the Nelder-Mead simplex method, restarting from the best
/// vertex until a restart no longer improves the value by more than
/// f_tolerance. Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace reid
