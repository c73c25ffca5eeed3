#pragma once

#include "trajsal/common/random.hpp"
#include "trajsal/trajdata/trajectory.hpp"

#include <span>
#include <string>
#include <vector>

namespace trajsal::stms {

enum class TrajClass { line, sharp_turn, circular };

std::string_view to_string(TrajClass c);

inline constexpr double kMinSpeed = 5.0;
inline constexpr double kMaxSpeed = 20.0;
inline constexpr int kMinLength = 20;
inline constexpr int kMaxLength = 60;
inline constexpr double kMaxAngularVelocity = 0.10;  // rad / step
inline constexpr double kNoiseCorrelation = 0.9;
inline constexpr double kDefaultNoise = 0.3;
/// Innovations are truncated at this many standard deviations.
inline constexpr double kNoiseTruncation = 3.0;

double min_turn_angle();  // pi/6
double max_turn_angle();  // pi/2

/// Kinematic parameters of one synthetic trajectory.
struct ClassParams {
  TrajClass cls = TrajClass::line;
  double speed = 10.0;             // [5, 20] per step
  double direction = 0.0;          // [0, 2pi)
  double angular_velocity = 0.0;   // circular only, [-0.1, 0.1]
  double turn_angle = 0.0;         // sharp_turn only, |a| in [pi/6, pi/2]
  int turn_instant = 0;            // sharp_turn only, strictly inside (0, length-1)
  int length = 40;                 // points, [20, 60]
  double noise_scale = kDefaultNoise;  // std of the AR(1) innovation
};

/// Throws DataError when a field is out of range.
void validate(const ClassParams& p);

/// Bound on the per-step second difference of the noise process for a
/// given innovation scale.
double noise_second_difference_bound(double noise_scale);

/// Noiseless skeleton plus AR(1) position noise; starts at (0, 0).
Trajectory gen_trajectory(const ClassParams& params, Rng& rng, std::string id = "traj");

/// Per-trajectory variation around the scenario base. Widths are the
/// half-ranges of uniform jitter.
struct Jitter {
  double speed_frac = 0.05;
  double direction = 0.05;           // rad
  double angular_velocity = 0.005;   // rad / step
  double turn_angle_frac = 0.05;
  double turn_instant_frac = 0.05;   // of the length
  double length_frac = 0.05;
};

/// Salient trajectories shift one class parameter by a number of jitter
/// widths drawn uniformly from [min_widths, max_widths].
struct SalientOffset {
  double min_widths = 3.0;
  double max_widths = 6.0;
};

struct ScenarioSpec {
  ClassParams base;
  double turn_fraction = 0.5;  // sharp_turn: base turn instant as a fraction of the length
  Jitter jitter;
  int n_normal = 10;
  double salient_probability = 0.5;
  SalientOffset offset;
};

void validate(const ScenarioSpec& spec);

/// Draws a scenario base uniformly over the class parameter ranges.
ScenarioSpec random_scenario_spec(Rng& rng, int n_normal, double salient_probability,
                                  double noise_scale = kDefaultNoise);

/// n_normal jittered normal trajectories plus, with the spec's probability,
/// one salient trajectory appended last.
Scenario gen_scenario(const ScenarioSpec& spec, Rng& rng, std::string id = "scenario");

inline constexpr int kTrainScenariosPerBatch = 6;
inline constexpr int kTrainNormals = 10;
inline constexpr int kEvalNormals = 20;
inline constexpr double kSalientProbability = 0.5;

/// One training batch from exactly 6 scenario specs (60 to 66 trajectories).
Batch gen_training_batch(std::span<const ScenarioSpec> specs, Rng& rng);

/// Convenience: draws 6 random training specs and the batch.
Batch gen_training_batch(Rng& rng, double noise_scale = kDefaultNoise);

/// Validation/test scenarios: 20 normals plus a salient one with p = 0.5.
std::vector<Scenario> gen_eval_set(int n_scenarios, Rng& rng, double noise_scale = kDefaultNoise);

enum class Split { train, val, test };
Split split_from_string(std::string_view s);

/// Scenarios for a named split, from the split's own stream of `seed`.
std::vector<Scenario> gen_split(Split split, int n_scenarios, std::uint64_t seed,
                                double noise_scale = kDefaultNoise);

}  // namespace trajsal::stms
