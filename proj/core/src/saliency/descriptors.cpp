#include "trajsal/saliency/descriptors.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/trajdata/preprocess.hpp"

#include <cmath>

namespace trajsal::sal {

std::vector<double> distances(const nk::Matrix& codes, const Code& median) {
  if (codes.rows() != median.size()) throw ShapeError("distances: code dimension mismatch");
  std::vector<double> d(static_cast<std::size_t>(codes.cols()));
  for (Index i = 0; i < codes.cols(); ++i) d[static_cast<std::size_t>(i)] = (codes.col(i) - median).norm();
  return d;
}

DescriptorStats scenario_stats(std::span<const double> d) {
  if (d.empty()) throw DataError("descriptor statistics of an empty scenario");
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

DescriptorStats robust_stats(std::span<const double> d) {
  if (d.empty()) throw DataError("descriptor statistics of an empty scenario");
  const double med = median_of({d.begin(), d.end()});
  std::vector<double> dev;
  for (double v : d) dev.push_back(std::abs(v - med));
  return {med, 1.4826 * median_of(std::move(dev))};
}

std::vector<double> descriptors(std::span<const double> d, const DescriptorStats& stats) {
  std::vector<double> q(d.size(), 0.0);
  if (!(stats.sigma > 0.0)) return q;
  for (std::size_t i = 0; i < d.size(); ++i) q[i] = std::abs(d[i] - stats.mean) / stats.sigma;
  return q;
}

std::vector<double> descriptors(std::span<const double> d) {
  if (d.size() < 2) throw DataError("descriptors need at least two distances");
  return descriptors(d, scenario_stats(d));
}

}  // namespace trajsal::sal
