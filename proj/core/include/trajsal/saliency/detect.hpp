#pragma once

#include "trajsal/autoencoder/model.hpp"
#include "trajsal/bench/metrics.hpp"
#include "trajsal/saliency/descriptors.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajsal::sal {

/// How d-bar and sigma are obtained. The two alternatives exist for
/// ablation; `scenario` is the default and the better performer.
enum class StatsMode { scenario, fixed, robust };

struct DetectOptions {
  StatsMode mode = StatsMode::scenario;
  /// Used when mode == fixed (e.g. estimated on validation normals).
  DescriptorStats fixed;
};

struct TrajectoryVerdict {
  std::string id;
  Label truth = Label::unknown;
  Code code;
  double distance = 0.0;
  double descriptor = 0.0;
  bool salient = false;
};

struct DetectionReport {
  std::string scenario;
  Code median;
  DescriptorStats stats;
  double lambda = 0.0;
  std::vector<TrajectoryVerdict> trajectories;

  std::vector<bool> verdicts() const;
  std::vector<Label> truth() const;
};

/// Detection from precomputed codes (one column per scenario member).
DetectionReport detect_codes(const nk::Matrix& codes, const Scenario& scenario, double lambda,
                             const DetectOptions& options = {});

/// Encodes the scenario and flags members with q_i > lambda.
DetectionReport detect(const Scenario& scenario, const ae::Model& model, double lambda, Rng& rng,
                       const DetectOptions& options = {});

/// Descriptors and labels of one scenario, threshold-free.
struct ScoredScenario {
  std::string scenario;
  std::vector<double> q;
  std::vector<Label> truth;
};

ScoredScenario score_codes(const nk::Matrix& codes, const Scenario& scenario, const DetectOptions& options = {});
std::vector<ScoredScenario> score_scenarios(std::span<const Scenario> scenarios, const ae::Model& model, Rng& rng,
                                            const DetectOptions& options = {});

/// Verdicts q > lambda.
std::vector<bool> threshold(std::span<const double> q, double lambda);

/// Pooled confusion counts over all scenarios at one threshold.
bench::Confusion pooled_confusion(std::span<const ScoredScenario> scored, double lambda);

/// 101 values, 0 to 5 in steps of 0.05.
std::vector<double> default_lambda_grid();

struct SweepRow {
  double lambda = 0.0;
  bench::EvalReport report;
};

struct SweepResult {
  double best_lambda = 0.0;
  double best_f_measure = 0.0;
  std::vector<SweepRow> table;
};

/// Threshold maximising the pooled salient-class F-measure; ties go to the
/// larger lambda.
SweepResult sweep_lambda(std::span<const ScoredScenario> scored, std::span<const double> grid);
SweepResult sweep_lambda(std::span<const ScoredScenario> scored);

/// False positives over normal trajectories; throws when there are none.
double fpr(const std::vector<bool>& verdicts, std::span<const Label> truth);

/// One JSON object per trajectory: scenario, id, label, d, q, verdict, code.
void write_report_jsonl(std::ostream& out, std::span<const DetectionReport> reports);
/// One row per scenario: scenario, size, mean_d, sigma, lambda, flagged.
void write_summary_csv(std::ostream& out, std::span<const DetectionReport> reports);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

}  // namespace trajsal::sal
