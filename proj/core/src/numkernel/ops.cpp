#include "trajsal/numkernel/ops.hpp"

#include "kernels.hpp"
#include "trajsal/common/errors.hpp"

namespace trajsal::nk {

LstmWeights LstmWeights::zeros(Index input, Index hidden) {
  LstmWeights w;
  w.w_ih = RowMatrix::Zero(4 * hidden, input);
  w.w_hh = RowMatrix::Zero(4 * hidden, hidden);
  w.b_ih = Vector::Zero(4 * hidden);
  w.b_hh = Vector::Zero(4 * hidden);
  return w;
}

LstmParams LstmWeights::view() const {
  return {RowMap<const double>(w_ih.data(), w_ih.rows(), w_ih.cols()),
          RowMap<const double>(w_hh.data(), w_hh.rows(), w_hh.cols()),
          VecMap<const double>(b_ih.data(), b_ih.size()), VecMap<const double>(b_hh.data(), b_hh.size())};
}

double sigmoid(double v) { return detail::sigmoid(v); }

Matrix linear_forward(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const RowMatrix>& w,
                      const Eigen::Ref<const Vector>& b) {
  require_shape(w.cols() == x.rows(), "linear: weight cols vs input rows");
  require_shape(w.rows() == b.size(), "linear: weight rows vs bias size");
  require_finite(x, "linear input");
  Matrix y = w * x;
  y.colwise() += b;
  return y;
}

Matrix leaky_relu(const Eigen::Ref<const Matrix>& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw DataError("leaky_relu: slope must lie in (0,1)");
  require_finite(x, "leaky_relu input");
  return x.array().max(slope * x.array());
}

LstmState lstm_step(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& h,
                    const Eigen::Ref<const Matrix>& c, const LstmParams& p) {
  const Index hidden = p.w_hh.cols();
  require_shape(p.w_ih.rows() == 4 * hidden && p.w_hh.rows() == 4 * hidden, "lstm: gate rows");
  require_shape(p.w_ih.cols() == x.rows(), "lstm: input size");
  require_shape(h.rows() == hidden && c.rows() == hidden, "lstm: state size");
  require_shape(h.cols() == x.cols() && c.cols() == x.cols(), "lstm: batch size");
  require_finite(x, "lstm input");
  require_finite(h, "lstm hidden state");
  require_finite(c, "lstm cell state");

  Matrix gates = p.w_ih * x + p.w_hh * h;
  gates.colwise() += p.b_ih + p.b_hh;
  detail::activate_gates(gates, hidden);

  LstmState out;
  out.c = gates.middleRows(hidden, hidden).cwiseProduct(c) +
          gates.topRows(hidden).cwiseProduct(gates.middleRows(2 * hidden, hidden));
  out.h = gates.bottomRows(hidden).cwiseProduct(out.c.array().tanh().matrix());
  return out;
}

}  // namespace trajsal::nk
