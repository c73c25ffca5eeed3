#include "trajsal/trajdata/trajectory.hpp"

#include "trajsal/common/errors.hpp"

#include <cmath>

namespace trajsal {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::normal: return "normal";
    case Label::salient: return "salient";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

Label label_from_string(std::string_view s) {
  if (s == "normal") return Label::normal;
  if (s == "salient") return Label::salient;
  if (s == "unknown") return Label::unknown;
  throw DataError("unknown label '" + std::string(s) + "'");
}

Trajectory::Trajectory(std::string id, std::vector<TrajPoint> points, Label label, std::optional<int> entry,
                       std::optional<int> exit)
    : id_(std::move(id)), points_(std::move(points)), label_(label), entry_(entry), exit_(exit) {
  if (points_.size() < 2) throw DataError("trajectory '" + id_ + "' needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y))
      throw DataError("trajectory '" + id_ + "' has a non-finite coordinate");
    if (i > 0 && points_[i].t <= points_[i - 1].t)
      throw DataError("trajectory '" + id_ + "' timestamps must be strictly increasing");
  }
}

Trajectory Trajectory::with_points(std::vector<TrajPoint> points) const {
  Trajectory t(id_, std::move(points), label_, entry_, exit_);
  t.scenario_ = scenario_;
  return t;
}

std::size_t Scenario::salient_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.label() == Label::salient;
  return n;
}

void validate_scenario(const Scenario& s) {
  if (s.trajectories.empty()) throw DataError("scenario '" + s.id + "' is empty");
  if (2 * s.salient_count() >= s.size())
    throw DataError("scenario '" + s.id + "': salient trajectories must be a strict minority");
}

void Batch::add(const Scenario& s) {
  const std::size_t k = scenario_ids.size();
  scenario_ids.push_back(s.id);
  for (const auto& t : s.trajectories) {
    trajectories.push_back(t);
    scenario_of.push_back(k);
  }
}

std::vector<std::vector<std::size_t>> Batch::groups() const {
  std::vector<std::vector<std::size_t>> g(scenario_ids.size());
  for (std::size_t i = 0; i < scenario_of.size(); ++i) g.at(scenario_of[i]).push_back(i);
  return g;
}

}  // namespace trajsal
