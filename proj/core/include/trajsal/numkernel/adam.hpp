#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace trajsal::nk {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators over a flat parameter buffer.
struct AdamState {
  AdamConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t size)
      : config(cfg), first_moment(size, 0.0), second_moment(size, 0.0) {}
};

/// One bias-corrected Adam update. The step counter is incremented before
/// the correction terms are computed. Throws NumericError on a non-finite
/// gradient, leaving params and state untouched.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace trajsal::nk
