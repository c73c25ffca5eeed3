#include "trajsal/trajdata/preprocess.hpp"

#include "trajsal/common/errors.hpp"

#include <algorithm>
#include <cmath>

namespace trajsal {

std::vector<Displacement> displacements(const Trajectory& traj) {
  const auto& p = traj.points();
  std::vector<Displacement> d(p.size());
  for (std::size_t i = 1; i < p.size(); ++i) d[i] = {p[i].x - p[i - 1].x, p[i].y - p[i - 1].y};
  return d;
}

double mean_displacement(const Trajectory& traj) {
  const auto& p = traj.points();
  double sum = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) sum += std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);
  return sum / static_cast<double>(p.size() - 1);
}

double arc_length(const Trajectory& traj) {
  const auto& p = traj.points();
  double sum = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) sum += std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);
  return sum;
}

Trajectory translate_to_origin(const Trajectory& traj, double x0, double y0) {
  const double dx = x0 - traj.front().x;
  const double dy = y0 - traj.front().y;
  std::vector<TrajPoint> pts = traj.points();
  for (auto& p : pts) {
    p.x += dx;
    p.y += dy;
  }
  pts[0].x = x0;
  pts[0].y = y0;
  return traj.with_points(std::move(pts));
}

Trajectory subsample(const Trajectory& traj, int k) {
  if (k < 1) throw DataError("subsample: k must be >= 1");
  std::vector<TrajPoint> pts;
  for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(k)) pts.push_back(traj[i]);
  if (pts.size() < 2) throw DataError("subsample: result shorter than 2 points");
  return traj.with_points(std::move(pts));
}

Trajectory rescale(const Trajectory& traj, double factor) {
  if (factor == 0.0) throw DataError("rescale: factor must be non-zero");
  std::vector<TrajPoint> pts = traj.points();
  for (auto& p : pts) {
    p.x /= factor;
    p.y /= factor;
  }
  return traj.with_points(std::move(pts));
}

std::vector<Trajectory> split_on_jumps(const Trajectory& traj, double max_disp) {
  if (!(max_disp > 0.0)) throw DataError("split_on_jumps: max_disp must be positive");
  std::vector<Trajectory> out;
  std::vector<TrajPoint> current{traj.front()};
  auto flush = [&] {
    if (current.size() >= 2) {
      Trajectory frag = traj.with_points(std::move(current));
      frag.set_id(traj.id() + "#" + std::to_string(out.size()));
      out.push_back(std::move(frag));
    }
    current.clear();
  };
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double step = std::hypot(traj[i].x - traj[i - 1].x, traj[i].y - traj[i - 1].y);
    if (step > max_disp) flush();
    current.push_back(traj[i]);
  }
  flush();
  if (out.size() == 1) out.front().set_id(traj.id());
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_step(const std::vector<Trajectory>& trajs) {
  std::vector<double> steps;
  for (const auto& t : trajs)
    for (std::size_t i = 1; i < t.size(); ++i) steps.push_back(std::hypot(t[i].x - t[i - 1].x, t[i].y - t[i - 1].y));
  return median_of(std::move(steps));
}

ErraticSplit filter_erratic(const Scenario& scenario, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw DataError("filter_erratic: tol must lie in (0,1)");
  if (scenario.trajectories.empty()) throw DataError("filter_erratic: empty scenario");

  ErraticSplit split;
  split.kept = scenario;
  // Removing outliers moves the median; repeat until nothing changes so the
  // filter is idempotent.
  while (!split.kept.trajectories.empty()) {
    std::vector<double> lengths;
    for (const auto& t : split.kept.trajectories) lengths.push_back(static_cast<double>(t.size()));
    const double med = median_of(lengths);
    std::vector<Trajectory> keep;
    for (auto& t : split.kept.trajectories) {
      if (std::abs(static_cast<double>(t.size()) - med) <= tol * med)
        keep.push_back(std::move(t));
      else
        split.removed.push_back(std::move(t));
    }
    const bool stable = keep.size() == lengths.size();
    split.kept.trajectories = std::move(keep);
    if (stable) break;
  }
  return split;
}

}  // namespace trajsal
