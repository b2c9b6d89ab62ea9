#pragma once

#include "sfi/grad.hpp"

#include <cstdint>
#include <functional>

namespace sfi {

/// Five-point central difference of a scalar function.
double central_difference(const std::function<double(double)>& fn, double x, double step);

struct GradCheckOptions {
  int configurations = 50;
  std::uint64_t seed = 0;
  /// Relative steps: df = f_step * max(1, f), dphi = phase_step.
  double f_step = 1e-6;
  double phase_step = 1e-6;
  /// Denominator floor as a fraction of the largest gradient of the same kind in a configuration.
  double floor_fraction = 1e-3;
  /// Absolute denominator floor (loss units per Hz or per radian).
  double absolute_floor = 1e-9;
};

struct GradCheckResult {
  int configurations = 0;
  int parameters_checked = 0;
  double max_relative_error = 0.0;
};

/// Random small banks at random rates pushed through encoder -> identity mask
/// -> decoder -> -SI-SNR. Every trainable (f, phi) of both layers is compared
/// with finite differences of the forward pipeline.
GradCheckResult run_gradient_check(const GradCheckOptions& options = {});

}  // namespace sfi
