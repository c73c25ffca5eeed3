#include "trajsal/bench/metrics.hpp"

#include "trajsal/autoencoder/network.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/trajdata/preprocess.hpp"

#include <cmath>

namespace trajsal::bench {

Confusion confusion(const std::vector<bool>& verdicts, std::span<const Label> truth) {
  if (verdicts.size() != truth.size()) throw DataError("verdicts and labels are not aligned");
  Confusion c;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (truth[i] == Label::unknown) continue;
    const bool salient = truth[i] == Label::salient;
    if (verdicts[i])
      ++(salient ? c.tp : c.fp);
    else
      ++(salient ? c.fn : c.tn);
  }
  return c;
}

double f_measure(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

EvalReport prf(const Confusion& c) {
  EvalReport r;
  r.counts = c;
  const auto predicted = c.tp + c.fp;
  const auto actual = c.tp + c.fn;
  if (predicted == 0 && actual == 0) {
    r.precision = r.recall = r.f_measure = 1.0;
  } else {
    r.precision = predicted > 0 ? static_cast<double>(c.tp) / static_cast<double>(predicted) : 0.0;
    r.recall = actual > 0 ? static_cast<double>(c.tp) / static_cast<double>(actual) : 0.0;
    r.f_measure = f_measure(r.precision, r.recall);
  }
  const auto normals = c.fp + c.tn;
  r.fpr = normals > 0 ? static_cast<double>(c.fp) / static_cast<double>(normals) : 0.0;
  return r;
}

EvalReport prf(const std::vector<bool>& verdicts, std::span<const Label> truth) {
  if (verdicts.empty()) throw DataError("prf: empty input");
  return prf(confusion(verdicts, truth));
}

ReconScore reconstruction_score(std::span<const Trajectory> truth, std::span<const Trajectory> reconstruction) {
  if (truth.empty()) throw DataError("reconstruction_score: empty dataset");
  if (truth.size() != reconstruction.size()) throw DataError("reconstruction_score: sizes differ");
  ReconScore s;
  double disp_sum = 0.0;
  std::size_t disp_count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& a = truth[i];
    const auto& b = reconstruction[i];
    if (a.size() != b.size()) throw DataError("reconstruction_score: lengths differ for " + a.id());
    double e = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) e += std::hypot(a[t].x - b[t].x, a[t].y - b[t].y);
    s.mean_error += e / static_cast<double>(a.size());
    for (std::size_t t = 1; t < a.size(); ++t) disp_sum += std::hypot(a[t].x - a[t - 1].x, a[t].y - a[t - 1].y);
    disp_count += a.size() - 1;
  }
  s.mean_error /= static_cast<double>(truth.size());
  s.mean_displacement = disp_sum / static_cast<double>(disp_count);
  if (!(s.mean_displacement > 0.0)) throw DataError("reconstruction_score: dataset does not move");
  s.r = s.mean_error / s.mean_displacement;
  return s;
}

ReconScore reconstruction_score(const ae::Model& model, std::span<const Trajectory> dataset, Rng& rng) {
  const auto rec = ae::reconstruct(model, dataset, rng);
  return reconstruction_score(dataset, rec);
}

std::vector<bool> baseline_length(const Scenario& scenario, double pct) {
  if (!(pct > 0.0 && pct < 1.0)) throw DataError("baseline_length: pct must lie in (0,1)");
  std::vector<double> lengths;
  for (const auto& t : scenario.trajectories) lengths.push_back(static_cast<double>(t.size()));
  if (lengths.empty()) return {};
  const double med = median_of(lengths);
  std::vector<bool> out;
  for (double l : lengths) out.push_back(std::abs(l - med) > pct * med);
  return out;
}

}  // namespace trajsal::bench
