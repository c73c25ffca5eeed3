#include "trajsal/stms/generator.hpp"

#include "trajsal/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace trajsal::stms {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

double truncated_normal(Rng& rng) {
  for (;;) {
    const double z = standard_normal(rng);
    if (std::abs(z) <= kNoiseTruncation) return z;
  }
}

double jitter(Rng& rng, double width) { return width > 0 ? uniform(rng, -width, width) : 0.0; }

enum class Knob { speed, direction, angular_velocity, turn_angle, turn_instant };

}  // namespace

std::string_view to_string(TrajClass c) {
  switch (c) {
    case TrajClass::line: return "line";
    case TrajClass::sharp_turn: return "sharp_turn";
    case TrajClass::circular: return "circular";
  }
  return "line";
}

double min_turn_angle() { return std::numbers::pi / 6.0; }
double max_turn_angle() { return std::numbers::pi / 2.0; }

void validate(const ClassParams& p) {
  const double tol = 1e-12;
  if (p.speed < kMinSpeed - tol || p.speed > kMaxSpeed + tol) throw DataError("speed outside [5, 20]");
  if (!(p.direction >= 0.0 && p.direction < kTwoPi)) throw DataError("direction outside [0, 2pi)");
  if (p.length < kMinLength || p.length > kMaxLength) throw DataError("length outside [20, 60]");
  if (!(p.noise_scale >= 0.0) || !std::isfinite(p.noise_scale)) throw DataError("noise_scale must be >= 0");
  if (p.cls == TrajClass::circular && std::abs(p.angular_velocity) > kMaxAngularVelocity + tol)
    throw DataError("angular velocity outside [-0.1, 0.1]");
  if (p.cls == TrajClass::sharp_turn) {
    const double a = std::abs(p.turn_angle);
    if (a < min_turn_angle() - tol || a > max_turn_angle() + tol)
      throw DataError("turn angle magnitude outside [pi/6, pi/2]");
    if (p.turn_instant <= 0 || p.turn_instant >= p.length - 1)
      throw DataError("turn instant must lie strictly inside the trajectory");
  }
}

double noise_second_difference_bound(double noise_scale) {
  // n(t+1) - 2n(t) + n(t-1) = (1-rho)^2 n(t-1) + e(t+1) - (2-rho) e(t), with
  // |e| <= k sigma and |n| <= k sigma / (1 - rho).
  return (4.0 - 2.0 * kNoiseCorrelation) * kNoiseTruncation * noise_scale;
}

Trajectory gen_trajectory(const ClassParams& p, Rng& rng, std::string id) {
  validate(p);
  std::vector<TrajPoint> pts(static_cast<std::size_t>(p.length));
  double x = 0.0, y = 0.0, nx = 0.0, ny = 0.0;
  pts[0] = {0, 0.0, 0.0};
  for (int t = 1; t < p.length; ++t) {
    double heading = p.direction;
    if (p.cls == TrajClass::circular) heading += p.angular_velocity * (t - 1);
    if (p.cls == TrajClass::sharp_turn && t > p.turn_instant) heading += p.turn_angle;
    x += p.speed * std::cos(heading);
    y += p.speed * std::sin(heading);
    if (p.noise_scale > 0.0) {
      nx = kNoiseCorrelation * nx + p.noise_scale * truncated_normal(rng);
      ny = kNoiseCorrelation * ny + p.noise_scale * truncated_normal(rng);
    }
    pts[static_cast<std::size_t>(t)] = {t, x + nx, y + ny};
  }
  return Trajectory(std::move(id), std::move(pts), Label::normal);
}

void validate(const ScenarioSpec& spec) {
  validate(spec.base);
  if (spec.n_normal < 1) throw DataError("scenario needs at least one normal trajectory");
  if (!(spec.salient_probability >= 0.0 && spec.salient_probability <= 1.0))
    throw DataError("salient probability outside [0, 1]");
  if (spec.offset.min_widths <= 0.0 || spec.offset.max_widths < spec.offset.min_widths)
    throw DataError("invalid salient offset bounds");
  if (spec.turn_fraction <= 0.0 || spec.turn_fraction >= 1.0) throw DataError("turn fraction outside (0, 1)");
}

ScenarioSpec random_scenario_spec(Rng& rng, int n_normal, double salient_probability, double noise_scale) {
  ScenarioSpec spec;
  spec.n_normal = n_normal;
  spec.salient_probability = salient_probability;
  ClassParams& b = spec.base;
  b.cls = static_cast<TrajClass>(uniform_int(rng, 0, 2));
  b.speed = uniform(rng, kMinSpeed, kMaxSpeed);
  b.direction = wrap_angle(uniform(rng, 0.0, kTwoPi));
  b.length = uniform_int(rng, kMinLength, kMaxLength);
  b.noise_scale = noise_scale;
  if (b.cls == TrajClass::circular) b.angular_velocity = uniform(rng, -kMaxAngularVelocity, kMaxAngularVelocity);
  if (b.cls == TrajClass::sharp_turn) {
    const double mag = uniform(rng, min_turn_angle(), max_turn_angle());
    b.turn_angle = bernoulli(rng, 0.5) ? mag : -mag;
    // Middle 60% of the trajectory.
    spec.turn_fraction = uniform(rng, 0.2, 0.8);
    b.turn_instant = std::clamp(static_cast<int>(std::lround(spec.turn_fraction * (b.length - 1))), 1, b.length - 2);
  }
  return spec;
}

namespace {

struct Shift {
  Knob knob = Knob::speed;
  double amount = 0.0;  // signed, in the knob's own units (fraction for turn instant)
};

Shift draw_shift(const ScenarioSpec& spec, Rng& rng) {
  const ClassParams& b = spec.base;
  std::vector<Knob> knobs{Knob::speed, Knob::direction};
  if (b.cls == TrajClass::circular) knobs.push_back(Knob::angular_velocity);
  if (b.cls == TrajClass::sharp_turn) {
    knobs.push_back(Knob::turn_angle);
    knobs.push_back(Knob::turn_instant);
  }
  Shift s;
  s.knob = knobs[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(knobs.size()) - 1))];
  const double widths = uniform(rng, spec.offset.min_widths, spec.offset.max_widths);
  const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
  const Jitter& j = spec.jitter;
  switch (s.knob) {
    case Knob::speed: {
      const double w = j.speed_frac * b.speed * widths;
      s.amount = (b.speed + sign * w <= kMaxSpeed && b.speed + sign * w >= kMinSpeed) ? sign * w : -sign * w;
      break;
    }
    case Knob::direction: s.amount = sign * j.direction * widths; break;
    case Knob::angular_velocity: {
      const double w = j.angular_velocity * widths;
      const double v = b.angular_velocity + sign * w;
      s.amount = std::abs(v) <= kMaxAngularVelocity ? sign * w : -sign * w;
      break;
    }
    case Knob::turn_angle: {
      const double w = j.turn_angle_frac * std::abs(b.turn_angle) * widths;
      const double m = std::abs(b.turn_angle) + sign * w;
      s.amount = (m >= min_turn_angle() && m <= max_turn_angle()) ? sign * w : -sign * w;
      break;
    }
    case Knob::turn_instant: {
      const double w = j.turn_instant_frac * widths;
      const double f = spec.turn_fraction + sign * w;
      s.amount = (f >= 0.05 && f <= 0.95) ? sign * w : -sign * w;
      break;
    }
  }
  return s;
}

ClassParams member_params(const ScenarioSpec& spec, Rng& rng, const Shift* shift) {
  const ClassParams& b = spec.base;
  const Jitter& j = spec.jitter;
  auto shifted = [&](Knob k) { return shift && shift->knob == k ? shift->amount : 0.0; };

  ClassParams p = b;
  p.speed = std::clamp(b.speed + shifted(Knob::speed) + b.speed * jitter(rng, j.speed_frac), kMinSpeed, kMaxSpeed);
  p.direction = wrap_angle(b.direction + shifted(Knob::direction) + jitter(rng, j.direction));
  p.length = std::clamp(static_cast<int>(std::lround(b.length * (1.0 + jitter(rng, j.length_frac)))), kMinLength,
                        kMaxLength);
  if (b.cls == TrajClass::circular) {
    p.angular_velocity = std::clamp(b.angular_velocity + shifted(Knob::angular_velocity) + jitter(rng, j.angular_velocity),
                                    -kMaxAngularVelocity, kMaxAngularVelocity);
  }
  if (b.cls == TrajClass::sharp_turn) {
    const double sign = b.turn_angle < 0 ? -1.0 : 1.0;
    const double mag = std::abs(b.turn_angle) + shifted(Knob::turn_angle) +
                       std::abs(b.turn_angle) * jitter(rng, j.turn_angle_frac);
    p.turn_angle = sign * std::clamp(mag, min_turn_angle(), max_turn_angle());
    const double frac = spec.turn_fraction + shifted(Knob::turn_instant) + jitter(rng, j.turn_instant_frac);
    p.turn_instant = std::clamp(static_cast<int>(std::lround(frac * (p.length - 1))), 1, p.length - 2);
  }
  return p;
}

}  // namespace

Scenario gen_scenario(const ScenarioSpec& spec, Rng& rng, std::string id) {
  validate(spec);
  Scenario s;
  s.id = std::move(id);
  s.context = std::string(to_string(spec.base.cls));
  for (int i = 0; i < spec.n_normal; ++i) {
    Trajectory t = gen_trajectory(member_params(spec, rng, nullptr), rng, s.id + "-" + std::to_string(i));
    t.set_scenario(s.id);
    s.trajectories.push_back(std::move(t));
  }
  if (bernoulli(rng, spec.salient_probability)) {
    const Shift shift = draw_shift(spec, rng);
    Trajectory t = gen_trajectory(member_params(spec, rng, &shift), rng, s.id + "-" + std::to_string(spec.n_normal));
    t.set_label(Label::salient);
    t.set_scenario(s.id);
    s.trajectories.push_back(std::move(t));
  }
  return s;
}

Batch gen_training_batch(std::span<const ScenarioSpec> specs, Rng& rng) {
  if (specs.size() != static_cast<std::size_t>(kTrainScenariosPerBatch))
    throw DataError("a training batch is built from exactly 6 scenarios");
  Batch batch;
  for (std::size_t k = 0; k < specs.size(); ++k) batch.add(gen_scenario(specs[k], rng, "b" + std::to_string(k)));
  return batch;
}

Batch gen_training_batch(Rng& rng, double noise_scale) {
  std::vector<ScenarioSpec> specs;
  for (int k = 0; k < kTrainScenariosPerBatch; ++k)
    specs.push_back(random_scenario_spec(rng, kTrainNormals, kSalientProbability, noise_scale));
  return gen_training_batch(specs, rng);
}

std::vector<Scenario> gen_eval_set(int n_scenarios, Rng& rng, double noise_scale) {
  if (n_scenarios < 1) throw DataError("evaluation set needs at least one scenario");
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(n_scenarios));
  for (int i = 0; i < n_scenarios; ++i) {
    const ScenarioSpec spec = random_scenario_spec(rng, kEvalNormals, kSalientProbability, noise_scale);
    out.push_back(gen_scenario(spec, rng, "s" + std::to_string(i)));
  }
  return out;
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + std::string(s) + "' (train, val, test)");
}

std::vector<Scenario> gen_split(Split split, int n_scenarios, std::uint64_t seed, double noise_scale) {
  if (n_scenarios < 1) throw DataError("split needs at least one scenario");
  Rng rng = derive_rng(seed, {0x57a5, static_cast<std::uint64_t>(split)});
  const std::string prefix = split == Split::train ? "train" : split == Split::val ? "val" : "test";
  const int normals = split == Split::train ? kTrainNormals : kEvalNormals;
  std::vector<Scenario> out;
  for (int i = 0; i < n_scenarios; ++i) {
    const ScenarioSpec spec = random_scenario_spec(rng, normals, kSalientProbability, noise_scale);
    out.push_back(gen_scenario(spec, rng, prefix + "-" + std::to_string(i)));
  }
  return out;
}

}  // namespace trajsal::stms
