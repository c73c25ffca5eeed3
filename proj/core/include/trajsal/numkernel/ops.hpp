#pragma once

#include "trajsal/numkernel/matrix.hpp"
#include "trajsal/numkernel/params.hpp"

namespace trajsal::nk {

inline constexpr double kDefaultLeakySlope = 0.01;

/// Owning LSTM weights, mostly for tests and standalone use. Gate blocks
/// stacked (input, forget, cell, output).
struct LstmWeights {
  RowMatrix w_ih;
  RowMatrix w_hh;
  Vector b_ih;
  Vector b_hh;

  static LstmWeights zeros(Index input, Index hidden);
  LstmParams view() const;
  Index input() const { return w_ih.cols(); }
  Index hidden() const { return w_hh.cols(); }
};

struct LstmState {
  Matrix h;
  Matrix c;
};

/// y = W x + b, applied column-wise.
Matrix linear_forward(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const RowMatrix>& w,
                      const Eigen::Ref<const Vector>& b);

/// Elementwise max(x, slope * x); slope in (0, 1).
Matrix leaky_relu(const Eigen::Ref<const Matrix>& x, double slope = kDefaultLeakySlope);

/// One LSTM cell step on a batch of columns.
LstmState lstm_step(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& h,
                    const Eigen::Ref<const Matrix>& c, const LstmParams& p);

double sigmoid(double v);

}  // namespace trajsal::nk
