#pragma once

#include "trajsal/numkernel/matrix.hpp"
#include "trajsal/numkernel/params.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace trajsal::nk {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const { return id != npos; }
};

class Tape;

/// Receives the gradient of the node's output and pushes contributions to
/// its inputs with Tape::accumulate (or writes parameter gradients directly).
using BackwardFn = std::function<void(Tape&, const Matrix&)>;

/// Reverse-mode recording of one forward pass. Nodes are appended in
/// evaluation order; backward() walks them in reverse. A tape is used for a
/// single pass and then discarded.
class Tape {
 public:
  Tape() { nodes_.reserve(256); }

  /// Leaf that never receives a gradient (data, random initial states).
  Var constant(Matrix value);
  /// Leaf whose gradient is kept and can be read after backward().
  Var variable(Matrix value);
  /// Extension point for custom ops.
  Var push(Matrix value, bool needs_grad, BackwardFn fn);

  const Matrix& value(Var v) const { return node(v).value; }
  /// Gradient of the root w.r.t. v; zeros if v was never reached.
  Matrix grad(Var v) const;
  bool needs_grad(Var v) const { return node(v).needs_grad; }

  void accumulate(Var v, const Eigen::Ref<const Matrix>& g);

  /// Root must hold a single scalar.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
  };
  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

struct LstmVars {
  Var h;
  Var c;
};

// Ops. Parameter gradients are accumulated (+=) into the given views when
// `grads` is non-null; pass nullptr for inference.

Var linear(Tape& t, Var x, const DenseParams& p, const DenseGrads* grads);
Var leaky_relu(Tape& t, Var x, double slope);
LstmVars lstm(Tape& t, Var x, Var h, Var c, const LstmParams& p, const LstmGrads* grads);

Var slice_rows(Tape& t, Var x, Index start, Index count);
Var slice_cols(Tape& t, Var x, Index start, Index count);
Var concat_rows(Tape& t, std::span<const Var> parts);
Var concat_cols(Tape& t, std::span<const Var> parts);

Var add(Tape& t, Var a, Var b);
/// Sum of any number of same-shape operands.
Var add_n(Tape& t, std::span<const Var> parts);
Var scale(Tape& t, Var a, double s);
/// wa * a + wb * b for same-shape operands.
Var weighted_sum(Tape& t, Var a, double wa, Var b, double wb);

/// Sum of all squared entries.
Var squared_norm(Tape& t, Var x);
/// Sum over entries of (pred - target)^2; target is data.
Var sum_squared_error(Tape& t, Var pred, const Eigen::Ref<const Matrix>& target);

}  // namespace trajsal::nk
