#pragma once

#include "trajsal/autoencoder/train.hpp"
#include "trajsal/bench/corridor.hpp"
#include "trajsal/bench/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace trajsal::bench {

enum class SaliencyKind { dt, et, ft };
std::string to_string(SaliencyKind k);
SaliencyKind kind_from_string(const std::string& s);

struct ExperimentConfig {
  SaliencyKind kind = SaliencyKind::dt;
  std::vector<Degree> degrees{Degree::high, Degree::medium, Degree::low};  // DT only
  std::vector<double> ratios{0.05, 0.10, 0.15};                            // DT and FT
  double lambda = 2.0;
  int ft_factor = 3;
  std::vector<double> baseline_pcts{0.10, 0.15};
  std::string variant = "model";
  std::uint64_t seed = 1;
};

/// Builds the scenarios of every grid cell from the pool, runs detection at
/// the fixed threshold and the length baselines, and returns one pooled
/// report per (method, degree, ratio). Cells without scenarios are omitted.
std::vector<EvalReport> run_experiment(const ae::Model& model, const CorridorSpec& spec,
                                       std::span<const Trajectory> pool, const ExperimentConfig& config);

/// Corridor fine-tuning stream: `scenarios` gate pairs of `per_scenario`
/// paths each, seeded per iteration.
ae::BatchSource corridor_source(std::vector<Trajectory> pool, std::uint64_t seed, int scenarios = 8,
                                int per_scenario = 8, bool include_erratic = false);

/// Columns: variant, saliency_kind, degree, ratio, lambda, precision, recall,
/// f_measure, fpr.
void write_results_csv(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace trajsal::bench
