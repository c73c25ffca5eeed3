#include "trajsal/trajdata/io.hpp"

#include "trajsal/common/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace trajsal {

using nlohmann::ordered_json;

namespace {

std::optional<int> read_gate(const ordered_json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number_integer()) throw ParseError(line, std::string("'") + key + "' must be an integer or null");
  return j[key].get<int>();
}

Trajectory parse_record(const std::string& text, std::size_t line) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError(line, "missing string 'id'");
  if (!j.contains("points") || !j["points"].is_array()) throw ParseError(line, "missing 'points' array");

  std::vector<TrajPoint> pts;
  pts.reserve(j["points"].size());
  for (const auto& p : j["points"]) {
    if (!p.is_array() || p.size() != 3) throw ParseError(line, "each point must be [t, x, y]");
    if (!p[0].is_number_integer()) throw ParseError(line, "point time must be an integer");
    if (!p[1].is_number() || !p[2].is_number()) throw ParseError(line, "point coordinates must be numbers");
    pts.push_back({p[0].get<std::int64_t>(), p[1].get<double>(), p[2].get<double>()});
  }

  Label label = Label::unknown;
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ParseError(line, "'label' must be a string");
    try {
      label = label_from_string(j["label"].get<std::string>());
    } catch (const DataError& e) {
      throw ParseError(line, e.what());
    }
  }
  try {
    Trajectory t(j["id"].get<std::string>(), std::move(pts), label, read_gate(j, "entry", line),
                 read_gate(j, "exit", line));
    if (j.contains("scenario") && j["scenario"].is_string()) t.set_scenario(j["scenario"].get<std::string>());
    return t;
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::vector<Trajectory> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(text, line));
  }
  return out;
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_trajectories(in);
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
  for (const auto& t : trajs) {
    ordered_json j;
    j["id"] = t.id();
    j["entry"] = t.entry() ? ordered_json(*t.entry()) : ordered_json(nullptr);
    j["exit"] = t.exit() ? ordered_json(*t.exit()) : ordered_json(nullptr);
    j["label"] = std::string(to_string(t.label()));
    if (!t.scenario().empty()) j["scenario"] = t.scenario();
    auto pts = ordered_json::array();
    for (const auto& p : t.points()) pts.push_back(ordered_json::array({p.t, p.x, p.y}));
    j["points"] = std::move(pts);
    out << j.dump() << '\n';
  }
}

void save_trajectories(const std::vector<Trajectory>& trajs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_trajectories(out, trajs);
}

void export_csv(const std::vector<Trajectory>& trajs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id,t,x,y\n";
  char buf[96];
  for (const auto& t : trajs)
    for (const auto& p : t.points()) {
      std::snprintf(buf, sizeof buf, ",%lld,%.17g,%.17g\n", static_cast<long long>(p.t), p.x, p.y);
      out << t.id() << buf;
    }
}

std::vector<Trajectory> flatten(const std::vector<Scenario>& scenarios) {
  std::vector<Trajectory> out;
  for (const auto& s : scenarios)
    for (auto t : s.trajectories) {
      t.set_scenario(s.id);
      out.push_back(std::move(t));
    }
  return out;
}

std::vector<Scenario> group_scenarios(const std::vector<Trajectory>& trajs) {
  std::vector<Scenario> out;
  std::map<std::string, std::size_t> index;
  for (const auto& t : trajs) {
    std::string key = t.scenario();
    if (key.empty()) {
      std::ostringstream k;
      k << "G" << (t.entry() ? std::to_string(*t.entry()) : "?") << "-"
        << (t.exit() ? std::to_string(*t.exit()) : "?");
      key = k.str();
    }
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) out.push_back(Scenario{key, key, {}});
    out[it->second].trajectories.push_back(t);
  }
  return out;
}

}  // namespace trajsal
