#include "trajsal/numkernel/params.hpp"

#include "trajsal/common/errors.hpp"

namespace trajsal::nk {

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (!m.allFinite()) throw NumericError("non-finite value in " + std::string(what));
}

void require_shape(bool cond, std::string_view what) {
  if (!cond) throw ShapeError("shape mismatch: " + std::string(what));
}

Index ParameterLayout::add(std::string name, Index rows, Index cols) {
  require_shape(rows > 0 && cols > 0, "tensor dimensions must be positive");
  slots_.push_back({std::move(name), size_, rows, cols});
  size_ += rows * cols;
  return static_cast<Index>(slots_.size()) - 1;
}

DenseSlots ParameterLayout::add_dense(const std::string& prefix, Index in, Index out) {
  DenseSlots d;
  d.weight = add(prefix + ".weight", out, in);
  d.bias = add(prefix + ".bias", out, 1);
  d.in = in;
  d.out = out;
  return d;
}

LstmSlots ParameterLayout::add_lstm(const std::string& prefix, Index input, Index hidden) {
  LstmSlots l;
  l.w_ih = add(prefix + ".weight_ih", 4 * hidden, input);
  l.w_hh = add(prefix + ".weight_hh", 4 * hidden, hidden);
  l.b_ih = add(prefix + ".bias_ih", 4 * hidden, 1);
  l.b_hh = add(prefix + ".bias_hh", 4 * hidden, 1);
  l.input = input;
  l.hidden = hidden;
  return l;
}

Index ParameterLayout::find(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].name == name) return static_cast<Index>(i);
  return -1;
}

}  // namespace trajsal::nk
