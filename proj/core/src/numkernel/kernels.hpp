#pragma once

// Shared forward kernels used by the standalone ops and the tape.

#include "trajsal/numkernel/matrix.hpp"

#include <cmath>

namespace trajsal::nk::detail {

inline double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

/// Turns gate pre-activations (4H x B) into activations in place:
/// sigmoid on input/forget/output blocks, tanh on the cell block.
inline void activate_gates(Matrix& pre, Index hidden) {
  pre.topRows(2 * hidden) = pre.topRows(2 * hidden).unaryExpr([](double v) { return sigmoid(v); });
  pre.middleRows(2 * hidden, hidden) = pre.middleRows(2 * hidden, hidden).array().tanh();
  pre.bottomRows(hidden) = pre.bottomRows(hidden).unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace trajsal::nk::detail
