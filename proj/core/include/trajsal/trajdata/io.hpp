#pragma once

#include "trajsal/trajdata/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace trajsal {

// JSON-lines trajectory files, one trajectory per line:
//   {"id": str, "entry": int|null, "exit": int|null,
//    "label": "normal"|"salient"|"unknown", "scenario": str (optional),
//    "points": [[t, x, y], ...]}

std::vector<Trajectory> read_trajectories(std::istream& in);
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);
void save_trajectories(const std::vector<Trajectory>& trajs, const std::filesystem::path& path);

/// Plotting export with columns id,t,x,y.
void export_csv(const std::vector<Trajectory>& trajs, const std::filesystem::path& path);

/// Flattens scenarios into a trajectory list, stamping each member's
/// scenario id.
std::vector<Trajectory> flatten(const std::vector<Scenario>& scenarios);

/// Groups trajectories by their scenario id, in first-appearance order.
/// Trajectories without one are grouped by (entry, exit) gate pair.
std::vector<Scenario> group_scenarios(const std::vector<Trajectory>& trajs);

}  // namespace trajsal
