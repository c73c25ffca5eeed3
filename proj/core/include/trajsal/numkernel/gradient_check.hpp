#pragma once

#include "trajsal/numkernel/matrix.hpp"

#include <functional>
#include <span>
#include <vector>

namespace trajsal::nk {

/// Evaluates a scalar loss at `params`. When `grad` is non-empty it must be
/// filled with the analytic gradient (same size as params).
using LossFn = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares the analytic gradient with central differences of step `eps`
/// on the listed coordinates (all coordinates when `coords` is empty).
/// Relative error is |a - n| / max(|a|, |n|, abs_floor).
GradCheckResult gradient_check(const LossFn& loss, std::span<double> params, double eps,
                               std::span<const std::size_t> coords = {}, double abs_floor = 1e-8);

/// Same comparison along whole-vector directions: the analytic g.v against
/// (L(p + eps v) - L(p - eps v)) / 2 eps. Every parameter takes part in every
/// probe, so tiny individual components do not drown in rounding noise.
/// worst_index is the direction index.
GradCheckResult directional_check(const LossFn& loss, std::span<double> params, double eps,
                                  std::span<const std::vector<double>> directions, double abs_floor = 1e-8);

}  // namespace trajsal::nk
