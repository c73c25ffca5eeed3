#pragma once

#include "trajsal/autoencoder/model.hpp"
#include "trajsal/numkernel/tape.hpp"

#include <span>
#include <vector>

namespace trajsal::ae {

/// How the consistency term differentiates through the scenario median.
/// `through` routes the gradient to the member(s) selected as median in each
/// component (the almost-everywhere exact derivative); `stop` treats the
/// median as a constant.
enum class MedianGradient { through, stop };

using Groups = std::vector<std::vector<std::size_t>>;

/// Component-wise median of the given columns; even counts average the two
/// middle values.
Code median_code(const nk::Matrix& codes, std::span<const std::size_t> members);
Code median_code(const nk::Matrix& codes);

/// Sum over groups and members of the Euclidean distance to the group median.
double consistency_loss(const nk::Matrix& codes, const Groups& groups);

/// Tape node for consistency_loss over the columns of `codes`.
nk::Var consistency(nk::Tape& tape, nk::Var codes, const Groups& groups, MedianGradient mode);

/// Sum over points of squared position error; sizes must match.
double reconstruction_error(const Trajectory& truth, const Trajectory& reconstruction);

struct LossBreakdown {
  double reconstruction = 0.0;
  double consistency = 0.0;
  double total = 0.0;
};

/// L = L_r + beta * L_c over one batch. When `grad` is non-empty it is
/// overwritten with dL/dtheta (same layout as model.params()).
LossBreakdown total_loss(const Model& model, const Batch& batch, double beta, Rng& rng,
                         std::span<double> grad = {}, MedianGradient mode = MedianGradient::through);

/// Reconstruction term only, summed over the trajectories.
double reconstruction_loss(const Model& model, std::span<const Trajectory> trajectories, Rng& rng);

}  // namespace trajsal::ae
