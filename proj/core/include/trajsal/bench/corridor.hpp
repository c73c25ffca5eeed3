#pragma once

#include "trajsal/common/random.hpp"
#include "trajsal/trajdata/trajectory.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace trajsal::bench {

/// A gate on one wall of the corridor. `index` orders gates along their
/// side, which is what "one/two positions apart" refers to.
struct Gate {
  int id = 0;
  std::string side;  // bottom, top, left, right
  int index = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Synthetic stand-in for a pedestrian corridor with gate-tagged paths.
struct CorridorSpec {
  double length = 300.0;
  double width = 100.0;
  std::vector<Gate> gates;
  double speed_min = 4.0;  // distance per time step
  double speed_max = 6.0;
  double gate_jitter = 4.0;  // entry/exit point spread along the wall
  double noise = 0.3;        // AR(1) innovation scale, as in STMS
  double erratic_fraction = 0.12;
  double detour_min_ratio = 1.25;  // erratic path length over direct length
  double waypoint_margin = 10.0;   // detour waypoints stay this far inside the walls
  double min_pair_distance = 100.0;

  /// 300 x 100 corridor, six gates per long side and one at each end.
  static CorridorSpec standard();
  void validate() const;
  const Gate& gate(int id) const;
};

std::string to_json(const CorridorSpec& spec);
CorridorSpec corridor_from_json(const std::string& text);
CorridorSpec load_corridor_spec(const std::filesystem::path& path);

/// Ordered gate pairs far enough apart to form a scenario.
std::vector<std::pair<int, int>> gate_pairs(const CorridorSpec& spec);

/// `per_pair` paths for every gate pair, in absolute coordinates. Erratic
/// paths (detour through a random waypoint) are labelled salient, direct
/// ones normal.
std::vector<Trajectory> gen_corridor_pool(const CorridorSpec& spec, int per_pair, Rng& rng);

enum class Degree { high, medium, low };
std::string to_string(Degree d);
Degree degree_from_string(const std::string& s);

/// Gate pairs whose paths are salient w.r.t. (entry, exit) at a degree.
/// low/medium: one gate shared, the other one/two positions away on the same
/// side. high: no gate shared and mean directions not parallel (cosine < 0.95).
std::vector<std::pair<int, int>> salient_pairs(const CorridorSpec& spec, std::span<const Trajectory> pool, int entry,
                                               int exit, Degree degree);

inline constexpr std::size_t kMinScenarioNormals = 10;

/// DT saliency: normals are the direct paths of a pair, plus
/// round(ratio * normals) direct paths from salient pairs. Pairs with too
/// few normals or no salient candidates are skipped. Everything is
/// translated to the origin.
std::vector<Scenario> build_dt_scenarios(const CorridorSpec& spec, std::span<const Trajectory> pool, Degree degree,
                                         double ratio, Rng& rng);

/// ET saliency: every path of a pair, erratic ones salient.
std::vector<Scenario> build_et_scenarios(std::span<const Trajectory> pool, Rng& rng);

/// FT saliency: round(ratio * n) of a pair's direct paths are replaced by
/// copies keeping every factor-th point.
std::vector<Scenario> build_ft_scenarios(std::span<const Trajectory> pool, int factor, double ratio, Rng& rng);

/// Fine-tuning batches: `scenarios` random pairs, `per_scenario` random
/// paths each, translated to the origin. Erratic paths are used only when
/// include_erratic is set.
Batch corridor_training_batch(std::span<const Trajectory> pool, int scenarios, int per_scenario, bool include_erratic,
                              Rng& rng);

}  // namespace trajsal::bench
