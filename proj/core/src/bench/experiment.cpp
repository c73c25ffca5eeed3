#include "trajsal/bench/experiment.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/saliency/detect.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

namespace trajsal::bench {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pct_name(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "baseline-%g%%", 100.0 * p);
  return buf;
}

struct Cell {
  std::string degree;
  double ratio;
  std::vector<Scenario> scenarios;
};

}  // namespace

std::string to_string(SaliencyKind k) {
  switch (k) {
    case SaliencyKind::dt:
      return "DT";
    case SaliencyKind::et:
      return "ET";
    case SaliencyKind::ft:
      return "FT";
  }
  return "?";
}

SaliencyKind kind_from_string(const std::string& s) {
  if (s == "DT" || s == "dt") return SaliencyKind::dt;
  if (s == "ET" || s == "et") return SaliencyKind::et;
  if (s == "FT" || s == "ft") return SaliencyKind::ft;
  throw DataError("unknown saliency kind '" + s + "'");
}

std::vector<EvalReport> run_experiment(const ae::Model& model, const CorridorSpec& spec,
                                       std::span<const Trajectory> pool, const ExperimentConfig& config) {
  if (!(config.lambda >= 0.0)) throw DataError("lambda must be >= 0");
  std::vector<Cell> cells;
  const auto ratio_tag = [](double r) { return static_cast<std::uint64_t>(std::llround(r * 1e6)); };
  switch (config.kind) {
    case SaliencyKind::dt:
      for (Degree d : config.degrees)
        for (double r : config.ratios) {
          Rng rng = derive_rng(config.seed, {1, static_cast<std::uint64_t>(d), ratio_tag(r)});
          cells.push_back({to_string(d), r, build_dt_scenarios(spec, pool, d, r, rng)});
        }
      break;
    case SaliencyKind::et: {
      Rng rng = derive_rng(config.seed, {2});
      auto sc = build_et_scenarios(pool, rng);
      std::size_t sal = 0, all = 0;
      for (const auto& s : sc) {
        sal += s.salient_count();
        all += s.size();
      }
      cells.push_back({"-", all ? static_cast<double>(sal) / static_cast<double>(all) : 0.0, std::move(sc)});
      break;
    }
    case SaliencyKind::ft:
      for (double r : config.ratios) {
        Rng rng = derive_rng(config.seed, {3, ratio_tag(r)});
        cells.push_back({"-", r, build_ft_scenarios(pool, config.ft_factor, r, rng)});
      }
      break;
  }

  std::vector<EvalReport> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    if (cell.scenarios.empty()) continue;
    auto echo = [&](EvalReport r, const std::string& variant) {
      r.variant = variant;
      r.kind = to_string(config.kind);
      r.degree = cell.degree;
      r.ratio = cell.ratio;
      r.lambda = config.lambda;
      return r;
    };
    Rng rng = derive_rng(config.seed, {4, c});
    Confusion model_counts;
    std::vector<Confusion> base(config.baseline_pcts.size());
    for (const auto& sc : cell.scenarios) {
      const auto rep = sal::detect(sc, model, config.lambda, rng);
      const auto truth = rep.truth();
      model_counts += confusion(rep.verdicts(), truth);
      for (std::size_t b = 0; b < base.size(); ++b)
        base[b] += confusion(baseline_length(sc, config.baseline_pcts[b]), truth);
    }
    out.push_back(echo(prf(model_counts), config.variant));
    for (std::size_t b = 0; b < base.size(); ++b) out.push_back(echo(prf(base[b]), pct_name(config.baseline_pcts[b])));
  }
  return out;
}

ae::BatchSource corridor_source(std::vector<Trajectory> pool, std::uint64_t seed, int scenarios, int per_scenario,
                                bool include_erratic) {
  auto shared = std::make_shared<const std::vector<Trajectory>>(std::move(pool));
  return [shared, seed, scenarios, per_scenario, include_erratic](std::int64_t iteration) {
    Rng rng = derive_rng(seed, {0x636f, static_cast<std::uint64_t>(iteration)});
    return corridor_training_batch(*shared, scenarios, per_scenario, include_erratic, rng);
  };
}

void write_results_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "variant,saliency_kind,degree,ratio,lambda,precision,recall,f_measure,fpr\n";
  for (const auto& r : reports)
    out << r.variant << ',' << r.kind << ',' << r.degree << ',' << num(r.ratio) << ',' << num(r.lambda) << ','
        << num(r.precision) << ',' << num(r.recall) << ',' << num(r.f_measure) << ',' << num(r.fpr) << '\n';
}

}  // namespace trajsal::bench
