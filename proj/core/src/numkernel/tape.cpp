#include "trajsal/numkernel/tape.hpp"

#include "kernels.hpp"
#include "trajsal/common/errors.hpp"

#include <optional>

namespace trajsal::nk {

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw ShapeError("tape: invalid variable handle");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw ShapeError("tape: invalid variable handle");
  return nodes_[v.id];
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::push(Matrix value, bool needs_grad, BackwardFn fn) {
  nodes_.push_back({std::move(value), Matrix(), std::move(fn), needs_grad});
  return Var{nodes_.size() - 1};
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Eigen::Ref<const Matrix>& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  require_shape(g.rows() == n.value.rows() && g.cols() == n.value.cols(), "tape: gradient shape");
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Tape::backward(Var root) {
  Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) throw ShapeError("backward: loss root must be a scalar");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  r.grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    // Callbacks only touch the gradients of earlier nodes, never this one.
    n.backward(*this, n.grad);
  }
}

Var linear(Tape& t, Var x, const DenseParams& p, const DenseGrads* grads) {
  const Matrix& xv = t.value(x);
  require_shape(p.weight.cols() == xv.rows(), "linear: weight cols vs input rows");
  Matrix y = p.weight * xv;
  y.colwise() += p.bias;
  const bool input_grad = t.needs_grad(x);
  const bool needs = input_grad || grads != nullptr;
  BackwardFn fn;
  if (needs) {
    fn = [x, p, g = grads ? std::optional<DenseGrads>(*grads) : std::nullopt, input_grad](
             Tape& tape, const Matrix& dy) mutable {
      if (g) {
        g->weight.noalias() += dy * tape.value(x).transpose();
        g->bias += dy.rowwise().sum();
      }
      if (input_grad) tape.accumulate(x, p.weight.transpose() * dy);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var leaky_relu(Tape& t, Var x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw DataError("leaky_relu: slope must lie in (0,1)");
  const Matrix& xv = t.value(x);
  Matrix y = xv.array().max(slope * xv.array());
  const bool needs = t.needs_grad(x);
  BackwardFn fn;
  if (needs) {
    fn = [x, slope](Tape& tape, const Matrix& dy) {
      const Matrix& xv = tape.value(x);
      Matrix dx = (xv.array() > 0.0).select(dy, slope * dy);
      tape.accumulate(x, dx);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

LstmVars lstm(Tape& t, Var x, Var h, Var c, const LstmParams& p, const LstmGrads* grads) {
  const Index hidden = p.w_hh.cols();
  const Matrix& xv = t.value(x);
  const Matrix& hv = t.value(h);
  const Matrix& cv = t.value(c);
  require_shape(p.w_ih.cols() == xv.rows(), "lstm: input size");
  require_shape(hv.rows() == hidden && cv.rows() == hidden, "lstm: state size");
  require_shape(hv.cols() == xv.cols() && cv.cols() == xv.cols(), "lstm: batch size");

  Matrix gates = p.w_ih * xv;
  gates.noalias() += p.w_hh * hv;
  gates.colwise() += p.b_ih + p.b_hh;
  detail::activate_gates(gates, hidden);

  const Index batch = xv.cols();
  Matrix state(2 * hidden, batch);
  auto c_new = state.bottomRows(hidden);
  c_new = gates.middleRows(hidden, hidden).cwiseProduct(cv) +
          gates.topRows(hidden).cwiseProduct(gates.middleRows(2 * hidden, hidden));
  Matrix tanh_c = c_new.array().tanh();
  state.topRows(hidden) = gates.bottomRows(hidden).cwiseProduct(tanh_c);

  const bool gx = t.needs_grad(x), gh = t.needs_grad(h), gc = t.needs_grad(c);
  const bool needs = gx || gh || gc || grads != nullptr;
  BackwardFn fn;
  if (needs) {
    fn = [x, h, c, p, hidden, gx, gh, gc, gates = std::move(gates), tanh_c = std::move(tanh_c),
          g = grads ? std::optional<LstmGrads>(*grads) : std::nullopt](Tape& tape, const Matrix& dstate) mutable {
      const auto dh = dstate.topRows(hidden);
      const auto i = gates.topRows(hidden).array();
      const auto f = gates.middleRows(hidden, hidden).array();
      const auto gg = gates.middleRows(2 * hidden, hidden).array();
      const auto o = gates.bottomRows(hidden).array();
      const auto tc = tanh_c.array();

      Matrix dc = dstate.bottomRows(hidden).array() + dh.array() * o * (1.0 - tc * tc);
      Matrix dpre(4 * hidden, dstate.cols());
      dpre.topRows(hidden) = (dc.array() * gg * i * (1.0 - i)).matrix();
      dpre.middleRows(hidden, hidden) = (dc.array() * tape.value(c).array() * f * (1.0 - f)).matrix();
      dpre.middleRows(2 * hidden, hidden) = (dc.array() * i * (1.0 - gg * gg)).matrix();
      dpre.bottomRows(hidden) = (dh.array() * tc * o * (1.0 - o)).matrix();

      if (g) {
        g->w_ih.noalias() += dpre * tape.value(x).transpose();
        g->w_hh.noalias() += dpre * tape.value(h).transpose();
        const Vector db = dpre.rowwise().sum();
        g->b_ih += db;
        g->b_hh += db;
      }
      if (gx) tape.accumulate(x, p.w_ih.transpose() * dpre);
      if (gh) tape.accumulate(h, p.w_hh.transpose() * dpre);
      if (gc) tape.accumulate(c, (dc.array() * f).matrix());
    };
  }
  Var joint = t.push(std::move(state), needs, std::move(fn));
  return {slice_rows(t, joint, 0, hidden), slice_rows(t, joint, hidden, hidden)};
}

Var slice_rows(Tape& t, Var x, Index start, Index count) {
  const Matrix& xv = t.value(x);
  require_shape(start >= 0 && count >= 0 && start + count <= xv.rows(), "slice_rows: range");
  Matrix y = xv.middleRows(start, count);
  const Index rows = xv.rows();
  const bool needs = t.needs_grad(x);
  BackwardFn fn;
  if (needs) {
    fn = [x, start, count, rows](Tape& tape, const Matrix& dy) {
      Matrix dx = Matrix::Zero(rows, dy.cols());
      dx.middleRows(start, count) = dy;
      tape.accumulate(x, dx);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var slice_cols(Tape& t, Var x, Index start, Index count) {
  const Matrix& xv = t.value(x);
  require_shape(start >= 0 && count >= 0 && start + count <= xv.cols(), "slice_cols: range");
  Matrix y = xv.middleCols(start, count);
  const Index cols = xv.cols();
  const bool needs = t.needs_grad(x);
  BackwardFn fn;
  if (needs) {
    fn = [x, start, count, cols](Tape& tape, const Matrix& dy) {
      Matrix dx = Matrix::Zero(dy.rows(), cols);
      dx.middleCols(start, count) = dy;
      tape.accumulate(x, dx);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var concat_rows(Tape& t, std::span<const Var> parts) {
  require_shape(!parts.empty(), "concat_rows: no operands");
  const Index cols = t.value(parts[0]).cols();
  Index rows = 0;
  bool needs = false;
  for (Var v : parts) {
    require_shape(t.value(v).cols() == cols, "concat_rows: column counts differ");
    rows += t.value(v).rows();
    needs = needs || t.needs_grad(v);
  }
  Matrix y(rows, cols);
  Index r = 0;
  for (Var v : parts) {
    y.middleRows(r, t.value(v).rows()) = t.value(v);
    r += t.value(v).rows();
  }
  BackwardFn fn;
  if (needs) {
    fn = [vars = std::vector<Var>(parts.begin(), parts.end())](Tape& tape, const Matrix& dy) {
      Index r = 0;
      for (Var v : vars) {
        const Index n = tape.value(v).rows();
        if (tape.needs_grad(v)) tape.accumulate(v, dy.middleRows(r, n));
        r += n;
      }
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  require_shape(!parts.empty(), "concat_cols: no operands");
  const Index rows = t.value(parts[0]).rows();
  Index cols = 0;
  bool needs = false;
  for (Var v : parts) {
    require_shape(t.value(v).rows() == rows, "concat_cols: row counts differ");
    cols += t.value(v).cols();
    needs = needs || t.needs_grad(v);
  }
  Matrix y(rows, cols);
  Index c = 0;
  for (Var v : parts) {
    y.middleCols(c, t.value(v).cols()) = t.value(v);
    c += t.value(v).cols();
  }
  BackwardFn fn;
  if (needs) {
    fn = [vars = std::vector<Var>(parts.begin(), parts.end())](Tape& tape, const Matrix& dy) {
      Index c = 0;
      for (Var v : vars) {
        const Index n = tape.value(v).cols();
        if (tape.needs_grad(v)) tape.accumulate(v, dy.middleCols(c, n));
        c += n;
      }
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var weighted_sum(Tape& t, Var a, double wa, Var b, double wb) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_shape(av.rows() == bv.rows() && av.cols() == bv.cols(), "weighted_sum: operand shapes");
  Matrix y = wa * av + wb * bv;
  const bool needs = t.needs_grad(a) || t.needs_grad(b);
  BackwardFn fn;
  if (needs) {
    fn = [a, b, wa, wb](Tape& tape, const Matrix& dy) {
      tape.accumulate(a, wa * dy);
      tape.accumulate(b, wb * dy);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var add(Tape& t, Var a, Var b) { return weighted_sum(t, a, 1.0, b, 1.0); }

Var add_n(Tape& t, std::span<const Var> parts) {
  require_shape(!parts.empty(), "add_n: no operands");
  Matrix y = t.value(parts[0]);
  bool needs = t.needs_grad(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const Matrix& v = t.value(parts[i]);
    require_shape(v.rows() == y.rows() && v.cols() == y.cols(), "add_n: operand shapes");
    y += v;
    needs = needs || t.needs_grad(parts[i]);
  }
  BackwardFn fn;
  if (needs) {
    fn = [vars = std::vector<Var>(parts.begin(), parts.end())](Tape& tape, const Matrix& dy) {
      for (Var v : vars) tape.accumulate(v, dy);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

Var scale(Tape& t, Var a, double s) {
  Matrix y = s * t.value(a);
  const bool needs = t.needs_grad(a);
  BackwardFn fn;
  if (needs) fn = [a, s](Tape& tape, const Matrix& dy) { tape.accumulate(a, s * dy); };
  return t.push(std::move(y), needs, std::move(fn));
}

Var squared_norm(Tape& t, Var x) {
  Matrix y(1, 1);
  y(0, 0) = t.value(x).squaredNorm();
  const bool needs = t.needs_grad(x);
  BackwardFn fn;
  if (needs) fn = [x](Tape& tape, const Matrix& dy) { tape.accumulate(x, 2.0 * dy(0, 0) * tape.value(x)); };
  return t.push(std::move(y), needs, std::move(fn));
}

Var sum_squared_error(Tape& t, Var pred, const Eigen::Ref<const Matrix>& target) {
  const Matrix& pv = t.value(pred);
  require_shape(pv.rows() == target.rows() && pv.cols() == target.cols(), "sum_squared_error: shapes");
  Matrix diff = pv - target;
  Matrix y(1, 1);
  y(0, 0) = diff.squaredNorm();
  const bool needs = t.needs_grad(pred);
  BackwardFn fn;
  if (needs) {
    fn = [pred, diff = std::move(diff)](Tape& tape, const Matrix& dy) {
      tape.accumulate(pred, 2.0 * dy(0, 0) * diff);
    };
  }
  return t.push(std::move(y), needs, std::move(fn));
}

}  // namespace trajsal::nk
