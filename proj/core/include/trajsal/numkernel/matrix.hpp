#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace trajsal::nk {

using Index = Eigen::Index;

/// Activations: one column per sample, one row per feature.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weight storage layout (row-major, as written to checkpoints).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what);

/// Throws ShapeError unless `cond` holds.
void require_shape(bool cond, std::string_view what);

}  // namespace trajsal::nk
