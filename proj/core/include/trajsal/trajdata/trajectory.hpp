#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trajsal {

enum class Label { normal, salient, unknown };

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);  // throws DataError

struct TrajPoint {
  std::int64_t t = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrajPoint&, const TrajPoint&) = default;
};

struct Displacement {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

/// Ordered, timestamped 2D positions. Always holds at least two points with
/// strictly increasing t and finite coordinates.
class Trajectory {
 public:
  Trajectory(std::string id, std::vector<TrajPoint> points, Label label = Label::unknown,
             std::optional<int> entry = std::nullopt, std::optional<int> exit = std::nullopt);

  const std::string& id() const { return id_; }
  const std::vector<TrajPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const TrajPoint& operator[](std::size_t i) const { return points_[i]; }
  const TrajPoint& front() const { return points_.front(); }
  const TrajPoint& back() const { return points_.back(); }

  Label label() const { return label_; }
  std::optional<int> entry() const { return entry_; }
  std::optional<int> exit() const { return exit_; }
  /// Originating scenario id; empty when unknown.
  const std::string& scenario() const { return scenario_; }

  void set_id(std::string id) { id_ = std::move(id); }
  void set_label(Label label) { label_ = label; }
  void set_gates(std::optional<int> entry, std::optional<int> exit) {
    entry_ = entry;
    exit_ = exit;
  }
  void set_scenario(std::string scenario) { scenario_ = std::move(scenario); }

  /// Copy with new points and the same metadata.
  Trajectory with_points(std::vector<TrajPoint> points) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::string id_;
  std::vector<TrajPoint> points_;
  Label label_ = Label::unknown;
  std::optional<int> entry_;
  std::optional<int> exit_;
  std::string scenario_;
};

/// A set of trajectories sharing one motion context.
struct Scenario {
  std::string id;
  std::string context;
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  std::size_t salient_count() const;
};

/// Throws DataError if the scenario is empty or salient members are not a
/// strict minority.
void validate_scenario(const Scenario& s);

/// Trajectories tagged by the scenario they were drawn from.
struct Batch {
  std::vector<Trajectory> trajectories;
  std::vector<std::size_t> scenario_of;  // index into the batch's scenario list
  std::vector<std::string> scenario_ids;

  void add(const Scenario& s);
  std::size_t size() const { return trajectories.size(); }
  /// Member indices per scenario, in insertion order.
  std::vector<std::vector<std::size_t>> groups() const;
};

}  // namespace trajsal
