#pragma once

#include "trajsal/trajdata/trajectory.hpp"

#include <vector>

namespace trajsal {

/// Per-point displacement; the first element is (0, 0).
std::vector<Displacement> displacements(const Trajectory& traj);

/// Mean displacement magnitude over all steps after the first point.
double mean_displacement(const Trajectory& traj);

/// Sum of segment lengths.
double arc_length(const Trajectory& traj);

/// Shifts the trajectory so its first point sits at (x0, y0).
Trajectory translate_to_origin(const Trajectory& traj, double x0 = 0.0, double y0 = 0.0);

/// Keeps points 0, k, 2k, ...; throws DataError if fewer than 2 remain.
Trajectory subsample(const Trajectory& traj, int k);

/// Divides all coordinates by `factor` (non-zero).
Trajectory rescale(const Trajectory& traj, double factor);

/// Cuts the trajectory at every step whose displacement magnitude exceeds
/// max_disp. Fragments shorter than 2 points are dropped.
std::vector<Trajectory> split_on_jumps(const Trajectory& traj, double max_disp);

/// Median of all per-step displacement magnitudes in the set.
double median_step(const std::vector<Trajectory>& trajs);

/// Default jump threshold: 10x the median step of the set.
inline constexpr double kJumpFactor = 10.0;

struct ErraticSplit {
  Scenario kept;
  std::vector<Trajectory> removed;
};

/// Keeps trajectories whose point count is within tol * median of the
/// scenario's median point count.
ErraticSplit filter_erratic(const Scenario& scenario, double tol);

/// Median of a list of values (mean of the two middle ones for even size).
double median_of(std::vector<double> values);

}  // namespace trajsal
