#include "trajsal/autoencoder/losses.hpp"

#include "graph.hpp"
#include "trajsal/autoencoder/network.hpp"
#include "trajsal/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trajsal::ae {

namespace {

/// Members (positions in `members`) holding the median of component j:
/// one for odd counts, the two middle ones for even counts. Ties are broken
/// by member order so the choice is deterministic.
struct Pick {
  std::size_t lo, hi;
};

Pick median_pick(const nk::Matrix& codes, std::span<const std::size_t> members, Index j, std::vector<std::size_t>& idx) {
  const std::size_t n = members.size();
  idx.resize(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double va = codes(j, static_cast<Index>(members[a])), vb = codes(j, static_cast<Index>(members[b]));
    return va < vb || (va == vb && a < b);
  });
  if (n % 2 == 1) return {idx[n / 2], idx[n / 2]};
  return {idx[n / 2 - 1], idx[n / 2]};
}

void check_members(const nk::Matrix& codes, std::span<const std::size_t> members) {
  if (members.empty()) throw DataError("median of an empty group");
  for (std::size_t m : members)
    if (m >= static_cast<std::size_t>(codes.cols())) throw ShapeError("group member out of range");
}

}  // namespace

Code median_code(const nk::Matrix& codes, std::span<const std::size_t> members) {
  check_members(codes, members);
  Code med(codes.rows());
  std::vector<std::size_t> idx;
  for (Index j = 0; j < codes.rows(); ++j) {
    const Pick p = median_pick(codes, members, j, idx);
    med(j) = 0.5 * (codes(j, static_cast<Index>(members[p.lo])) + codes(j, static_cast<Index>(members[p.hi])));
  }
  return med;
}

Code median_code(const nk::Matrix& codes) {
  std::vector<std::size_t> all(static_cast<std::size_t>(codes.cols()));
  std::iota(all.begin(), all.end(), 0);
  return median_code(codes, all);
}

double consistency_loss(const nk::Matrix& codes, const Groups& groups) {
  double total = 0.0;
  for (const auto& g : groups) {
    const Code med = median_code(codes, g);
    for (std::size_t i : g) total += (codes.col(static_cast<Index>(i)) - med).norm();
  }
  return total;
}

nk::Var consistency(nk::Tape& tape, nk::Var codes, const Groups& groups, MedianGradient mode) {
  nk::Matrix y(1, 1);
  y(0, 0) = consistency_loss(tape.value(codes), groups);
  const bool needs = tape.needs_grad(codes);
  nk::BackwardFn fn;
  if (needs) {
    fn = [codes, groups, mode](nk::Tape& t, const nk::Matrix& dy) {
      const nk::Matrix& c = t.value(codes);
      nk::Matrix dc = nk::Matrix::Zero(c.rows(), c.cols());
      std::vector<std::size_t> idx;
      for (const auto& g : groups) {
        const Code med = median_code(c, g);
        nk::Vector pull = nk::Vector::Zero(c.rows());  // sum of unit residuals
        for (std::size_t i : g) {
          const nk::Vector r = c.col(static_cast<Index>(i)) - med;
          const double n = r.norm();
          if (n == 0.0) continue;  // subgradient 0 at the kink
          const nk::Vector u = r / n;
          dc.col(static_cast<Index>(i)) += dy(0, 0) * u;
          pull += u;
        }
        if (mode == MedianGradient::stop) continue;
        for (Index j = 0; j < c.rows(); ++j) {
          const Pick p = median_pick(c, g, j, idx);
          const double back = dy(0, 0) * pull(j);
          if (p.lo == p.hi) {
            dc(j, static_cast<Index>(g[p.lo])) -= back;
          } else {
            dc(j, static_cast<Index>(g[p.lo])) -= 0.5 * back;
            dc(j, static_cast<Index>(g[p.hi])) -= 0.5 * back;
          }
        }
      }
      t.accumulate(codes, dc);
    };
  }
  return tape.push(std::move(y), needs, std::move(fn));
}

double reconstruction_error(const Trajectory& truth, const Trajectory& reconstruction) {
  if (truth.size() != reconstruction.size()) throw ShapeError("reconstruction length differs from input");
  double e = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const double dx = truth[t].x - reconstruction[t].x, dy = truth[t].y - reconstruction[t].y;
    e += dx * dx + dy * dy;
  }
  return e;
}

LossBreakdown total_loss(const Model& model, const Batch& batch, double beta, Rng& rng, std::span<double> grad,
                         MedianGradient mode) {
  if (!grad.empty() && grad.size() != model.param_count()) throw ShapeError("gradient buffer size mismatch");
  const auto& cfg = model.config();
  const auto pb = detail::pack(batch.trajectories, cfg, true);
  const auto st = draw_initial_states(cfg, batch.size(), rng, true);
  std::fill(grad.begin(), grad.end(), 0.0);

  nk::Tape tape;
  const nk::Var codes = detail::encode_graph(tape, model, pb, st.encoder_h, st.encoder_c, grad);
  const auto dec = detail::decode_graph(tape, model, pb, codes, st.decoder_h, st.decoder_c, grad, false);

  Groups sorted = batch.groups();
  for (auto& g : sorted)
    for (auto& i : g) i = pb.column[i];
  const nk::Var lc = consistency(tape, codes, sorted, mode);
  const nk::Var total = nk::weighted_sum(tape, dec.loss, 1.0, lc, beta);

  LossBreakdown out{tape.value(dec.loss)(0, 0), tape.value(lc)(0, 0), tape.value(total)(0, 0)};
  if (!grad.empty() && std::isfinite(out.total)) tape.backward(total);
  return out;
}

double reconstruction_loss(const Model& model, std::span<const Trajectory> trajectories, Rng& rng) {
  const auto rec = reconstruct(model, trajectories, rng);
  double total = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) total += reconstruction_error(trajectories[i], rec[i]);
  return total;
}

}  // namespace trajsal::ae
