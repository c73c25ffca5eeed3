#include "trajsal/saliency/detect.hpp"

#include "trajsal/autoencoder/network.hpp"
#include "trajsal/common/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace trajsal::sal {

namespace {

DescriptorStats stats_for(std::span<const double> d, const DetectOptions& o) {
  switch (o.mode) {
    case StatsMode::scenario:
      return scenario_stats(d);
    case StatsMode::robust:
      return robust_stats(d);
    case StatsMode::fixed:
      break;
  }
  return o.fixed;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<bool> DetectionReport::verdicts() const {
  std::vector<bool> v;
  for (const auto& t : trajectories) v.push_back(t.salient);
  return v;
}

std::vector<Label> DetectionReport::truth() const {
  std::vector<Label> v;
  for (const auto& t : trajectories) v.push_back(t.truth);
  return v;
}

std::vector<bool> threshold(std::span<const double> q, double lambda) {
  std::vector<bool> v;
  v.reserve(q.size());
  for (double x : q) v.push_back(x > lambda);
  return v;
}

DetectionReport detect_codes(const nk::Matrix& codes, const Scenario& scenario, double lambda,
                             const DetectOptions& options) {
  if (!(lambda >= 0.0)) throw DataError("lambda must be >= 0");
  if (scenario.size() < 2) throw DataError("scenario " + scenario.id + " has fewer than 2 trajectories");
  if (static_cast<std::size_t>(codes.cols()) != scenario.size()) throw ShapeError("one code per trajectory expected");

  DetectionReport r;
  r.scenario = scenario.id;
  r.lambda = lambda;
  r.median = median_code(codes);
  const auto d = distances(codes, r.median);
  r.stats = stats_for(d, options);
  const auto q = descriptors(d, r.stats);
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    const auto& t = scenario.trajectories[i];
    r.trajectories.push_back({t.id(), t.label(), codes.col(static_cast<Index>(i)), d[i], q[i], q[i] > lambda});
  }
  return r;
}

DetectionReport detect(const Scenario& scenario, const ae::Model& model, double lambda, Rng& rng,
                       const DetectOptions& options) {
  if (scenario.size() < 2) throw DataError("scenario " + scenario.id + " has fewer than 2 trajectories");
  return detect_codes(ae::encode_all(model, scenario.trajectories, rng), scenario, lambda, options);
}

ScoredScenario score_codes(const nk::Matrix& codes, const Scenario& scenario, const DetectOptions& options) {
  const auto r = detect_codes(codes, scenario, 0.0, options);
  ScoredScenario s{scenario.id, {}, r.truth()};
  for (const auto& t : r.trajectories) s.q.push_back(t.descriptor);
  return s;
}

std::vector<ScoredScenario> score_scenarios(std::span<const Scenario> scenarios, const ae::Model& model, Rng& rng,
                                            const DetectOptions& options) {
  std::vector<ScoredScenario> out;
  out.reserve(scenarios.size());
  for (const auto& sc : scenarios) out.push_back(score_codes(ae::encode_all(model, sc.trajectories, rng), sc, options));
  return out;
}

bench::Confusion pooled_confusion(std::span<const ScoredScenario> scored, double lambda) {
  bench::Confusion c;
  for (const auto& s : scored) c += bench::confusion(threshold(s.q, lambda), s.truth);
  return c;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i * 0.05);
  return g;
}

SweepResult sweep_lambda(std::span<const ScoredScenario> scored, std::span<const double> grid) {
  if (grid.empty()) throw DataError("empty lambda grid");
  SweepResult res;
  bool first = true;
  for (double l : grid) {
    auto rep = bench::prf(pooled_confusion(scored, l));
    rep.lambda = l;
    res.table.push_back({l, rep});
    if (first || rep.f_measure > res.best_f_measure ||
        (rep.f_measure == res.best_f_measure && l > res.best_lambda)) {
      res.best_lambda = l;
      res.best_f_measure = rep.f_measure;
      first = false;
    }
  }
  return res;
}

SweepResult sweep_lambda(std::span<const ScoredScenario> scored) {
  const auto grid = default_lambda_grid();
  return sweep_lambda(scored, grid);
}

double fpr(const std::vector<bool>& verdicts, std::span<const Label> truth) {
  const auto c = bench::confusion(verdicts, truth);
  const auto normals = c.fp + c.tn;
  if (normals == 0) throw DataError("fpr: no normal trajectories");
  return static_cast<double>(c.fp) / static_cast<double>(normals);
}

void write_report_jsonl(std::ostream& out, std::span<const DetectionReport> reports) {
  for (const auto& r : reports) {
    for (const auto& t : r.trajectories) {
      nlohmann::ordered_json j;
      j["scenario"] = r.scenario;
      j["id"] = t.id;
      j["label"] = std::string(to_string(t.truth));
      j["d"] = t.distance;
      j["q"] = t.descriptor;
      j["verdict"] = t.salient ? "salient" : "normal";
      j["code"] = std::vector<double>(t.code.data(), t.code.data() + t.code.size());
      out << j.dump() << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const DetectionReport> reports) {
  out << "scenario,size,mean_d,sigma,lambda,flagged\n";
  for (const auto& r : reports) {
    std::size_t flagged = 0;
    for (const auto& t : r.trajectories) flagged += t.salient ? 1 : 0;
    out << r.scenario << ',' << r.trajectories.size() << ',' << num(r.stats.mean) << ',' << num(r.stats.sigma) << ','
        << num(r.lambda) << ',' << flagged << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "lambda,precision,recall,f_measure,fpr,tp,fp,fn,tn\n";
  for (const auto& row : sweep.table) {
    const auto& r = row.report;
    out << num(row.lambda) << ',' << num(r.precision) << ',' << num(r.recall) << ',' << num(r.f_measure) << ','
        << num(r.fpr) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.tn << '\n';
  }
}

}  // namespace trajsal::sal
