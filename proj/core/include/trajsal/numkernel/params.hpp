#pragma once

#include "trajsal/numkernel/matrix.hpp"

#include <span>
#include <type_traits>
#include <string>
#include <vector>

namespace trajsal::nk {

/// Flat storage for parameters and gradients. The base is aligned to the
/// widest SIMD width so Eigen's vectorised kernels split every tensor the same
/// way on every run; plain heap alignment made sums differ in the last bit.
using ParamBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

/// One named tensor inside a flat parameter buffer.
struct TensorSlot {
  std::string name;
  Index offset = 0;
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
};

struct DenseSlots {
  Index weight = -1;
  Index bias = -1;
  Index in = 0;
  Index out = 0;
};

/// Gate blocks are stacked (input, forget, cell, output) along the rows of
/// every LSTM tensor. Two bias vectors per gate set.
struct LstmSlots {
  Index w_ih = -1;
  Index w_hh = -1;
  Index b_ih = -1;
  Index b_hh = -1;
  Index input = 0;
  Index hidden = 0;
};

/// Describes how the trainable scalars of a network are packed into one
/// contiguous buffer. Values and gradients share the layout.
class ParameterLayout {
 public:
  Index add(std::string name, Index rows, Index cols);
  DenseSlots add_dense(const std::string& prefix, Index in, Index out);
  LstmSlots add_lstm(const std::string& prefix, Index input, Index hidden);

  const TensorSlot& slot(Index i) const { return slots_.at(static_cast<std::size_t>(i)); }
  const std::vector<TensorSlot>& slots() const { return slots_; }
  Index size() const { return size_; }
  Index find(std::string_view name) const;  // -1 if absent

 private:
  std::vector<TensorSlot> slots_;
  Index size_ = 0;
};

template <class Scalar>
using RowMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const RowMatrix, RowMatrix>>;
template <class Scalar>
using VecMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Vector, Vector>>;

template <class Scalar>
struct DenseView {
  RowMap<Scalar> weight;
  VecMap<Scalar> bias;
};

template <class Scalar>
struct LstmView {
  RowMap<Scalar> w_ih;
  RowMap<Scalar> w_hh;
  VecMap<Scalar> b_ih;
  VecMap<Scalar> b_hh;
};

using DenseParams = DenseView<const double>;
using DenseGrads = DenseView<double>;
using LstmParams = LstmView<const double>;
using LstmGrads = LstmView<double>;

template <class Scalar>
RowMap<Scalar> tensor(const ParameterLayout& layout, std::span<Scalar> buf, Index slot) {
  const TensorSlot& s = layout.slot(slot);
  return RowMap<Scalar>(buf.data() + s.offset, s.rows, s.cols);
}

template <class Scalar>
DenseView<Scalar> dense_view(const ParameterLayout& layout, std::span<Scalar> buf, const DenseSlots& d) {
  const TensorSlot& b = layout.slot(d.bias);
  return {tensor(layout, buf, d.weight), VecMap<Scalar>(buf.data() + b.offset, b.size())};
}

template <class Scalar>
LstmView<Scalar> lstm_view(const ParameterLayout& layout, std::span<Scalar> buf, const LstmSlots& l) {
  const TensorSlot& bi = layout.slot(l.b_ih);
  const TensorSlot& bh = layout.slot(l.b_hh);
  return {tensor(layout, buf, l.w_ih), tensor(layout, buf, l.w_hh),
          VecMap<Scalar>(buf.data() + bi.offset, bi.size()),
          VecMap<Scalar>(buf.data() + bh.offset, bh.size())};
}

}  // namespace trajsal::nk
