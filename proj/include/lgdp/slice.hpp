#pragma once

#include <cmath>
#include <limits>

#include "lgdp/error.hpp"
#include "lgdp/rng.hpp"

namespace lgdp {

/// One univariate slice-sampling transition (stepping out, then shrinkage)
/// targeting exp(log_density) on (lower, upper). x0 must have finite log
/// density.
template <class LogDensity>
double slice_sample(Engine& eng, LogDensity&& log_density, double x0, double width,
                    double lower = -std::numeric_limits<double>::infinity(),
                    double upper = std::numeric_limits<double>::infinity(),
                    int max_steps = 64) {
  const double f0 = log_density(x0);
  if (!std::isfinite(f0)) throw InternalError("slice sampler started outside the support");
  const double level = f0 + std::log(draw_open_uniform(eng));

  double left = x0 - width * draw_uniform(eng);
  double right = left + width;
  int steps_left = max_steps;
  while (steps_left-- > 0 && left > lower && log_density(left) > level) left -= width;
  steps_left = max_steps;
  while (steps_left-- > 0 && right < upper && log_density(right) > level) right += width;
  if (left < lower) left = lower;
  if (right > upper) right = upper;

  for (int iter = 0; iter < 10000; ++iter) {
    const double x = left + (right - left) * draw_uniform(eng);
    if (x > lower && x < upper && log_density(x) > level) return x;
    if (x < x0) {
      left = x;
    } else {
      right = x;
    }
  }
  return x0;
}

}  // namespace lgdp
