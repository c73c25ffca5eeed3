#include "trajsal/bench/corridor.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/trajdata/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace trajsal::bench {

namespace {

using Pair = std::pair<int, int>;
using PairMap = std::map<Pair, std::vector<std::size_t>>;

constexpr double kParallelCosine = 0.95;

struct Pt {
  double x, y;
};

double dist(Pt a, Pt b) { return std::hypot(b.x - a.x, b.y - a.y); }

double polyline_length(const std::vector<Pt>& p) {
  double l = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) l += dist(p[i - 1], p[i]);
  return l;
}

Pt point_at(const std::vector<Pt>& p, double s) {
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double seg = dist(p[i - 1], p[i]);
    if (s <= seg || i + 1 == p.size()) {
      const double f = seg > 0.0 ? std::min(s / seg, 1.0) : 0.0;
      return {p[i - 1].x + f * (p[i].x - p[i - 1].x), p[i - 1].y + f * (p[i].y - p[i - 1].y)};
    }
    s -= seg;
  }
  return p.back();
}

double clipped_normal(Rng& rng) { return std::clamp(standard_normal(rng), -3.0, 3.0); }

Pt gate_point(const Gate& g, double jitter, Rng& rng) {
  const double j = jitter > 0.0 ? uniform(rng, -jitter, jitter) : 0.0;
  if (g.side == "bottom" || g.side == "top") return {g.x + j, g.y};
  return {g.x, g.y + j};
}

PairMap index_pairs(std::span<const Trajectory> pool, bool direct_only) {
  PairMap m;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& t = pool[i];
    if (!t.entry() || !t.exit()) throw DataError("corridor pool trajectory " + t.id() + " lacks gate tags");
    if (direct_only && t.label() == Label::salient) continue;
    m[{*t.entry(), *t.exit()}].push_back(i);
  }
  return m;
}

/// Partial Fisher-Yates: the first k entries become a uniform sample.
void sample_front(std::vector<std::size_t>& v, std::size_t k, Rng& rng) {
  k = std::min(k, v.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(i), static_cast<int>(v.size()) - 1));
    std::swap(v[i], v[j]);
  }
}

Trajectory at_origin(const Trajectory& t, const std::string& scenario) {
  Trajectory o = translate_to_origin(t);
  o.set_scenario(scenario);
  return o;
}

std::array<double, 2> mean_direction(std::span<const Trajectory> pool, const std::vector<std::size_t>& members) {
  double ux = 0.0, uy = 0.0;
  for (std::size_t i : members) {
    const auto& t = pool[i];
    for (std::size_t k = 1; k < t.size(); ++k) {
      const double dx = t[k].x - t[k - 1].x, dy = t[k].y - t[k - 1].y;
      const double n = std::hypot(dx, dy);
      if (n > 0.0) {
        ux += dx / n;
        uy += dy / n;
      }
    }
  }
  const double n = std::hypot(ux, uy);
  return n > 0.0 ? std::array<double, 2>{ux / n, uy / n} : std::array<double, 2>{0.0, 0.0};
}

std::string pair_tag(Pair p) { return std::to_string(p.first) + "-" + std::to_string(p.second); }

}  // namespace

CorridorSpec CorridorSpec::standard() {
  CorridorSpec s;
  int id = 0;
  for (const char* side : {"bottom", "top"})
    for (int i = 0; i < 6; ++i)
      s.gates.push_back({id++, side, i, 25.0 + 50.0 * i, std::string(side) == "bottom" ? 0.0 : s.width});
  s.gates.push_back({id++, "left", 0, 0.0, s.width / 2});
  s.gates.push_back({id++, "right", 0, s.length, s.width / 2});
  return s;
}

void CorridorSpec::validate() const {
  if (gates.size() < 4) throw DataError("corridor needs at least 4 gates");
  if (!(length > 0.0) || !(width > 0.0)) throw DataError("corridor dimensions must be positive");
  if (!(speed_min > 0.0) || speed_max < speed_min) throw DataError("invalid corridor speed range");
  if (gate_jitter < 0.0 || noise < 0.0) throw DataError("corridor jitter and noise must be >= 0");
  if (!(erratic_fraction >= 0.0 && erratic_fraction < 0.5)) throw DataError("erratic fraction must lie in [0, 0.5)");
  if (!(detour_min_ratio > 1.0)) throw DataError("detour ratio must exceed 1");
  if (!(waypoint_margin >= 0.0) || 2 * waypoint_margin >= std::min(length, width))
    throw DataError("waypoint margin too large");
  std::set<int> ids;
  std::set<std::pair<std::string, int>> slots;
  for (const auto& g : gates) {
    if (!ids.insert(g.id).second) throw DataError("duplicate gate id " + std::to_string(g.id));
    if (!slots.insert({g.side, g.index}).second) throw DataError("two gates share a side position");
    if (g.side != "bottom" && g.side != "top" && g.side != "left" && g.side != "right")
      throw DataError("unknown gate side '" + g.side + "'");
  }
}

const Gate& CorridorSpec::gate(int id) const {
  for (const auto& g : gates)
    if (g.id == id) return g;
  throw DataError("unknown gate " + std::to_string(id));
}

std::string to_json(const CorridorSpec& s) {
  nlohmann::ordered_json j;
  j["length"] = s.length;
  j["width"] = s.width;
  j["speed_min"] = s.speed_min;
  j["speed_max"] = s.speed_max;
  j["gate_jitter"] = s.gate_jitter;
  j["noise"] = s.noise;
  j["erratic_fraction"] = s.erratic_fraction;
  j["detour_min_ratio"] = s.detour_min_ratio;
  j["waypoint_margin"] = s.waypoint_margin;
  j["min_pair_distance"] = s.min_pair_distance;
  j["gates"] = nlohmann::ordered_json::array();
  for (const auto& g : s.gates)
    j["gates"].push_back({{"id", g.id}, {"side", g.side}, {"index", g.index}, {"x", g.x}, {"y", g.y}});
  return j.dump(2);
}

CorridorSpec corridor_from_json(const std::string& text) {
  CorridorSpec s = CorridorSpec::standard();
  try {
    const auto j = nlohmann::json::parse(text);
    s.length = j.value("length", s.length);
    s.width = j.value("width", s.width);
    s.speed_min = j.value("speed_min", s.speed_min);
    s.speed_max = j.value("speed_max", s.speed_max);
    s.gate_jitter = j.value("gate_jitter", s.gate_jitter);
    s.noise = j.value("noise", s.noise);
    s.erratic_fraction = j.value("erratic_fraction", s.erratic_fraction);
    s.detour_min_ratio = j.value("detour_min_ratio", s.detour_min_ratio);
    s.waypoint_margin = j.value("waypoint_margin", s.waypoint_margin);
    s.min_pair_distance = j.value("min_pair_distance", s.min_pair_distance);
    if (j.contains("gates")) {
      s.gates.clear();
      for (const auto& g : j.at("gates"))
        s.gates.push_back({g.at("id").get<int>(), g.at("side").get<std::string>(), g.at("index").get<int>(),
                           g.at("x").get<double>(), g.at("y").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corridor spec: ") + e.what());
  }
  s.validate();
  return s;
}

CorridorSpec load_corridor_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corridor spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return corridor_from_json(ss.str());
}

std::vector<std::pair<int, int>> gate_pairs(const CorridorSpec& spec) {
  std::vector<Pair> out;
  for (const auto& a : spec.gates)
    for (const auto& b : spec.gates)
      if (a.id != b.id && std::hypot(b.x - a.x, b.y - a.y) >= spec.min_pair_distance) out.push_back({a.id, b.id});
  return out;
}

std::vector<Trajectory> gen_corridor_pool(const CorridorSpec& spec, int per_pair, Rng& rng) {
  spec.validate();
  if (per_pair < 1) throw DataError("per_pair must be >= 1");
  std::vector<Trajectory> pool;
  for (const auto& [e, x] : gate_pairs(spec)) {
    const Gate& ge = spec.gate(e);
    const Gate& gx = spec.gate(x);
    for (int k = 0; k < per_pair; ++k) {
      const Pt s = gate_point(ge, spec.gate_jitter, rng);
      const Pt f = gate_point(gx, spec.gate_jitter, rng);
      const double speed = uniform(rng, spec.speed_min, spec.speed_max);
      const bool erratic = bernoulli(rng, spec.erratic_fraction);
      std::vector<Pt> path{s, f};
      if (erratic) {
        const double need = spec.detour_min_ratio * dist(s, f);
        const double m = spec.waypoint_margin;
        auto waypoint = [&] { return Pt{uniform(rng, m, spec.length - m), uniform(rng, m, spec.width - m)}; };
        bool ok = false;
        // One waypoint usually suffices; long end-to-end pairs need two.
        for (int attempt = 0; attempt < 400 && !ok; ++attempt) {
          path = {s, waypoint()};
          if (attempt >= 50) path.push_back(waypoint());
          path.push_back(f);
          ok = polyline_length(path) >= need;
        }
        if (!ok) throw NumericError("could not build a detour for gates " + pair_tag({e, x}));
      }
      const double total = polyline_length(path);
      const int steps = std::max(1, static_cast<int>(std::lround(total / speed)));
      std::vector<TrajPoint> pts;
      double nx = 0.0, ny = 0.0;
      for (int t = 0; t <= steps; ++t) {
        const Pt p = point_at(path, total * t / steps);
        if (t > 0 && spec.noise > 0.0) {
          nx = 0.9 * nx + spec.noise * clipped_normal(rng);
          ny = 0.9 * ny + spec.noise * clipped_normal(rng);
        }
        pts.push_back({t, p.x + nx, p.y + ny});
      }
      pool.emplace_back("c" + pair_tag({e, x}) + "-" + std::to_string(k), std::move(pts),
                        erratic ? Label::salient : Label::normal, e, x);
    }
  }
  return pool;
}

std::string to_string(Degree d) {
  switch (d) {
    case Degree::high:
      return "high";
    case Degree::medium:
      return "medium";
    case Degree::low:
      return "low";
  }
  return "?";
}

Degree degree_from_string(const std::string& s) {
  if (s == "high") return Degree::high;
  if (s == "medium") return Degree::medium;
  if (s == "low") return Degree::low;
  throw DataError("unknown saliency degree '" + s + "'");
}

std::vector<std::pair<int, int>> salient_pairs(const CorridorSpec& spec, std::span<const Trajectory> pool, int entry,
                                               int exit, Degree degree) {
  const PairMap direct = index_pairs(pool, true);
  std::vector<Pair> out;
  if (degree == Degree::high) {
    const auto it = direct.find({entry, exit});
    if (it == direct.end()) return out;
    const auto d0 = mean_direction(pool, it->second);
    for (const auto& [p, members] : direct) {
      if (p.first == entry || p.first == exit || p.second == entry || p.second == exit) continue;
      const auto d = mean_direction(pool, members);
      if (d0[0] * d[0] + d0[1] * d[1] < kParallelCosine) out.push_back(p);
    }
    return out;
  }
  const int gap = degree == Degree::medium ? 2 : 1;
  auto neighbours = [&](int id) {
    std::vector<int> n;
    const Gate& g = spec.gate(id);
    for (const auto& o : spec.gates)
      if (o.side == g.side && std::abs(o.index - g.index) == gap) n.push_back(o.id);
    return n;
  };
  for (int x2 : neighbours(exit))
    if (x2 != entry && direct.count({entry, x2})) out.push_back({entry, x2});
  for (int e2 : neighbours(entry))
    if (e2 != exit && direct.count({e2, exit})) out.push_back({e2, exit});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Scenario> build_dt_scenarios(const CorridorSpec& spec, std::span<const Trajectory> pool, Degree degree,
                                         double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio < 0.5)) throw DataError("saliency ratio must lie in (0, 0.5)");
  const PairMap direct = index_pairs(pool, true);
  std::vector<Scenario> out;
  for (const auto& [pair, members] : direct) {
    if (members.size() < kMinScenarioNormals) continue;
    std::vector<std::size_t> candidates;
    for (const auto& sp : salient_pairs(spec, pool, pair.first, pair.second, degree)) {
      const auto& c = direct.at(sp);
      candidates.insert(candidates.end(), c.begin(), c.end());
    }
    if (candidates.empty()) continue;
    const auto n_sal = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(members.size())));
    sample_front(candidates, n_sal, rng);

    Scenario sc;
    sc.id = "DT-" + to_string(degree) + "-" + pair_tag(pair);
    sc.context = pair_tag(pair);
    for (std::size_t i : members) sc.trajectories.push_back(at_origin(pool[i], sc.id));
    for (std::size_t k = 0; k < std::min(n_sal, candidates.size()); ++k) {
      Trajectory t = at_origin(pool[candidates[k]], sc.id);
      t.set_id(t.id() + "@" + pair_tag(pair));
      t.set_label(Label::salient);
      sc.trajectories.push_back(std::move(t));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> build_et_scenarios(std::span<const Trajectory> pool, Rng& rng) {
  (void)rng;  // the ET split is fully determined by the pool
  const PairMap all = index_pairs(pool, false);
  std::vector<Scenario> out;
  for (const auto& [pair, members] : all) {
    Scenario sc;
    sc.id = "ET-" + pair_tag(pair);
    sc.context = pair_tag(pair);
    for (std::size_t i : members) sc.trajectories.push_back(at_origin(pool[i], sc.id));
    const std::size_t normals = sc.size() - sc.salient_count();
    if (normals < kMinScenarioNormals || 2 * sc.salient_count() >= sc.size()) continue;
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> build_ft_scenarios(std::span<const Trajectory> pool, int factor, double ratio, Rng& rng) {
  if (factor < 2) throw DataError("FT subsampling factor must be >= 2");
  if (!(ratio > 0.0 && ratio < 0.5)) throw DataError("saliency ratio must lie in (0, 0.5)");
  const PairMap direct = index_pairs(pool, true);
  std::vector<Scenario> out;
  for (auto [pair, members] : direct) {
    if (members.size() < kMinScenarioNormals) continue;
    const auto n_sal = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(members.size())));
    sample_front(members, n_sal, rng);
    Scenario sc;
    sc.id = "FT-" + pair_tag(pair);
    sc.context = pair_tag(pair);
    for (std::size_t k = n_sal; k < members.size(); ++k) sc.trajectories.push_back(at_origin(pool[members[k]], sc.id));
    for (std::size_t k = 0; k < n_sal; ++k) {
      const auto& src = pool[members[k]];
      if (src.size() < static_cast<std::size_t>(factor) + 1) continue;
      Trajectory t = at_origin(subsample(src, factor), sc.id);
      t.set_id(src.id() + "/x" + std::to_string(factor));
      t.set_label(Label::salient);
      sc.trajectories.push_back(std::move(t));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

Batch corridor_training_batch(std::span<const Trajectory> pool, int scenarios, int per_scenario, bool include_erratic,
                              Rng& rng) {
  if (scenarios < 1 || per_scenario < 2) throw DataError("invalid corridor batch shape");
  const PairMap groups = index_pairs(pool, !include_erratic);
  std::vector<const std::vector<std::size_t>*> eligible;
  std::vector<Pair> keys;
  for (const auto& [pair, members] : groups)
    if (members.size() >= static_cast<std::size_t>(per_scenario)) {
      eligible.push_back(&members);
      keys.push_back(pair);
    }
  if (eligible.size() < static_cast<std::size_t>(scenarios)) throw DataError("corridor pool too small for batch");

  std::vector<std::size_t> order(eligible.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  sample_front(order, static_cast<std::size_t>(scenarios), rng);
  Batch batch;
  for (int s = 0; s < scenarios; ++s) {
    const std::size_t g = order[static_cast<std::size_t>(s)];
    std::vector<std::size_t> members = *eligible[g];
    sample_front(members, static_cast<std::size_t>(per_scenario), rng);
    Scenario sc;
    sc.id = "train-" + pair_tag(keys[g]);
    for (int k = 0; k < per_scenario; ++k) sc.trajectories.push_back(at_origin(pool[members[static_cast<std::size_t>(k)]], sc.id));
    batch.add(sc);
  }
  return batch;
}

}  // namespace trajsal::bench
