#pragma once

#include "trajsal/autoencoder/losses.hpp"

#include <span>
#include <vector>

namespace trajsal::sal {

using ae::Code;
using nk::Index;
using ae::median_code;

/// d_i = |c_i - median| for every column of `codes`.
std::vector<double> distances(const nk::Matrix& codes, const Code& median);

/// Centre and spread used to normalise distances.
struct DescriptorStats {
  double mean = 0.0;
  double sigma = 0.0;
};

/// Mean and population standard deviation.
DescriptorStats scenario_stats(std::span<const double> d);
/// Median and 1.4826 * median absolute deviation.
DescriptorStats robust_stats(std::span<const double> d);

/// q_i = |d_i - mean| / sigma; all zeros when sigma is 0.
std::vector<double> descriptors(std::span<const double> d, const DescriptorStats& stats);
/// Scenario statistics; needs at least two distances.
std::vector<double> descriptors(std::span<const double> d);

}  // namespace trajsal::sal
