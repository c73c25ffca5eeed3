#pragma once

#include "trajsal/common/random.hpp"
#include "trajsal/trajdata/trajectory.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace trajsal::ae {
class Model;
}

namespace trajsal::bench {

/// Counts w.r.t. the salient class.
struct Confusion {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Trajectories labelled unknown are skipped.
Confusion confusion(const std::vector<bool>& verdicts, std::span<const Label> truth);

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double fpr = 0.0;  // 0 when there are no normal trajectories
  Confusion counts;
  // Configuration echo.
  std::string variant;
  std::string kind;
  std::string degree;
  double ratio = 0.0;
  double lambda = 0.0;
};

/// Precision, recall and F-measure of the salient class. No predicted and
/// no true positives gives P = R = FM = 1; predicted positives with none
/// correct gives P = 0.
EvalReport prf(const Confusion& c);
/// Throws DataError on empty or misaligned input.
EvalReport prf(const std::vector<bool>& verdicts, std::span<const Label> truth);

/// Harmonic mean; 0 when both are 0.
double f_measure(double precision, double recall);

struct ReconScore {
  double mean_error = 0.0;         // mean over trajectories of the mean per-point error
  double mean_displacement = 0.0;  // mean |(u, v)| over every displacement in the set
  double r = 0.0;                  // mean_error / mean_displacement
};

/// Score of given reconstructions (same order and lengths as `truth`).
ReconScore reconstruction_score(std::span<const Trajectory> truth, std::span<const Trajectory> reconstruction);
ReconScore reconstruction_score(const ae::Model& model, std::span<const Trajectory> dataset, Rng& rng);

/// Flags trajectories whose point count differs from the scenario median by
/// more than pct * median. pct in (0, 1).
std::vector<bool> baseline_length(const Scenario& scenario, double pct);

}  // namespace trajsal::bench
