#pragma once

#include "trajsal/autoencoder/checkpoint.hpp"
#include "trajsal/autoencoder/losses.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace trajsal::ae {

inline constexpr double kBetaStrong = 1e5;  // Vb5
inline constexpr double kBetaWeak = 1e3;    // Vb3

/// "Vb5", "Vb3", "Vb0" for the named weights, "beta=<value>" otherwise.
std::string variant_name(double beta);
/// Accepts the variant names above or a plain number.
double parse_beta(const std::string& text);

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta = kBetaStrong;
  /// Total budget; a resumed run stops at the same iteration as a fresh one.
  std::int64_t iterations = 0;
  std::uint64_t seed = 1;
  std::int64_t checkpoint_every = 0;  // 0: only the final state
  std::int64_t validate_every = 0;    // 0: never
  MedianGradient median_gradient = MedianGradient::through;
  /// Where periodic, final and abort checkpoints go; empty disables them.
  std::filesystem::path checkpoint_path;

  void validate() const;
};

/// Batch drawn at a given iteration. Must be a pure function of the
/// iteration so that resumed runs replay the same stream.
using BatchSource = std::function<Batch(std::int64_t iteration)>;

/// STMS training batches (six scenarios of 10 normal trajectories, each
/// with an optional salient one) seeded per iteration.
BatchSource stms_source(std::uint64_t seed, double noise_scale);

struct ValidationPoint {
  double mean_error = std::numeric_limits<double>::quiet_NaN();
  double f_measure = std::numeric_limits<double>::quiet_NaN();
};
using Validator = std::function<ValidationPoint(const Model&, std::int64_t iteration)>;

struct CurveRow {
  std::int64_t iteration = 0;  // number of updates applied
  double reconstruction = 0.0;
  double consistency = 0.0;
  double total = 0.0;
  ValidationPoint validation;
};

void write_curve_header(std::ostream& out);
void write_curve_row(std::ostream& out, const CurveRow& row);

struct TrainHooks {
  Validator validator;
  std::function<void(const CurveRow&)> on_row;
};

/// Adam on total_loss until state.meta.iteration reaches config.iterations.
/// Starts a fresh optimizer when the checkpoint carries none. A non-finite
/// loss saves the last good state (if a checkpoint path is set) and throws
/// NumericError. Returns one row per update performed.
std::vector<CurveRow> train(Checkpoint& state, const TrainConfig& config, const BatchSource& source,
                            const TrainHooks& hooks = {});

}  // namespace trajsal::ae
