#include "trajsal/autoencoder/network.hpp"

#include "graph.hpp"
#include "trajsal/common/errors.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace trajsal::ae {

namespace detail {

namespace {

void finish_layout(PackedBatch& pb) {
  const std::size_t n = pb.lengths.size();
  pb.column.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) pb.column[pb.order[k]] = k;
  const std::size_t steps = pb.lengths.front();
  pb.active.assign(steps, 0);
  pb.offset.assign(steps, 0);
  Index off = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    Index k = 0;
    while (static_cast<std::size_t>(k) < n && pb.lengths[static_cast<std::size_t>(k)] > t) ++k;
    pb.active[t] = k;
    pb.offset[t] = off;
    off += k;
  }
}

std::vector<std::size_t> sort_by_length(std::span<const std::size_t> lengths) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] > lengths[b]; });
  return order;
}

}  // namespace

PackedBatch pack(std::span<const Trajectory> trajectories, const ModelConfig& config, bool with_targets) {
  if (trajectories.empty()) throw DataError("empty batch");
  std::vector<std::size_t> lens;
  for (const auto& tr : trajectories) lens.push_back(tr.size());
  PackedBatch pb;
  pb.order = sort_by_length(lens);
  for (std::size_t k : pb.order) pb.lengths.push_back(lens[k]);
  finish_layout(pb);

  const Index total = pb.offset.back() + pb.active.back();
  pb.inputs.resize(ModelConfig::kInputDim, total);
  pb.start.resize(2, static_cast<Index>(pb.batch()));
  const double ps = 1.0 / config.position_scale, ds = 1.0 / config.displacement_scale;
  for (std::size_t k = 0; k < pb.batch(); ++k) {
    const auto& pts = trajectories[pb.order[k]].points();
    pb.start(0, static_cast<Index>(k)) = pts[0].x;
    pb.start(1, static_cast<Index>(k)) = pts[0].y;
    for (std::size_t t = 0; t < pts.size(); ++t) {
      const Index col = pb.offset[t] + static_cast<Index>(k);
      const double u = t == 0 ? 0.0 : pts[t].x - pts[t - 1].x;
      const double v = t == 0 ? 0.0 : pts[t].y - pts[t - 1].y;
      pb.inputs(0, col) = pts[t].x * ps;
      pb.inputs(1, col) = pts[t].y * ps;
      pb.inputs(2, col) = u * ds;
      pb.inputs(3, col) = v * ds;
    }
  }
  if (with_targets) {
    pb.targets.resize(pb.steps());
    for (std::size_t t = 1; t < pb.steps(); ++t) {
      nk::Matrix& m = pb.targets[t];
      m.resize(2, pb.active[t]);
      for (Index k = 0; k < pb.active[t]; ++k) {
        const auto& p = trajectories[pb.order[static_cast<std::size_t>(k)]][t];
        m(0, k) = p.x;
        m(1, k) = p.y;
      }
    }
  }
  return pb;
}

PackedBatch pack_lengths(std::span<const std::size_t> lengths, const nk::Matrix& start) {
  if (lengths.empty()) throw DataError("empty batch");
  for (std::size_t l : lengths)
    if (l < 2) throw DataError("decoded length must be at least 2");
  PackedBatch pb;
  pb.order = sort_by_length(lengths);
  for (std::size_t k : pb.order) pb.lengths.push_back(lengths[k]);
  finish_layout(pb);
  pb.start = to_sorted(pb, start);
  return pb;
}

nk::Matrix to_sorted(const PackedBatch& pb, const nk::Matrix& m) {
  nk::Matrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < pb.batch(); ++k) out.col(static_cast<Index>(k)) = m.col(static_cast<Index>(pb.order[k]));
  return out;
}

nk::Var encode_graph(nk::Tape& tape, const Model& model, const PackedBatch& pb, const nk::Matrix& h0,
                     const nk::Matrix& c0, std::span<double> grad) {
  const auto& cfg = model.config();
  const auto& layout = model.layout();
  const bool train = !grad.empty();

  nk::Var f = tape.constant(pb.inputs);
  for (const auto& slots : model.encoder_fc()) {
    const auto p = nk::dense_view(layout, model.params(), slots);
    std::optional<nk::DenseGrads> g;
    if (train) g = nk::dense_view(layout, grad, slots);
    f = nk::leaky_relu(tape, nk::linear(tape, f, p, g ? &*g : nullptr), cfg.leaky_slope);
  }

  const auto lp = nk::lstm_view(layout, model.params(), model.encoder_lstm());
  std::optional<nk::LstmGrads> lg;
  if (train) lg = nk::lstm_view(layout, grad, model.encoder_lstm());

  nk::Var h = tape.constant(to_sorted(pb, h0));
  nk::Var c = tape.constant(to_sorted(pb, c0));
  std::vector<nk::Var> finished;  // shortest sequences first
  Index live = static_cast<Index>(pb.batch());
  for (std::size_t t = 0; t < pb.steps(); ++t) {
    const Index k = pb.active[t];
    if (k < live) {
      finished.push_back(nk::slice_cols(tape, h, k, live - k));
      h = nk::slice_cols(tape, h, 0, k);
      c = nk::slice_cols(tape, c, 0, k);
      live = k;
    }
    const nk::Var x = nk::slice_cols(tape, f, pb.offset[t], k);
    const auto s = nk::lstm(tape, x, h, c, lp, lg ? &*lg : nullptr);
    h = s.h;
    c = s.c;
  }
  finished.push_back(h);
  if (finished.size() == 1) return h;
  std::reverse(finished.begin(), finished.end());
  return nk::concat_cols(tape, finished);
}

DecodeGraph decode_graph(nk::Tape& tape, const Model& model, const PackedBatch& pb, nk::Var codes,
                         const nk::Matrix& h0, const nk::Matrix& c0, std::span<double> grad, bool keep_positions) {
  const auto& cfg = model.config();
  const auto& layout = model.layout();
  const bool train = !grad.empty();

  const auto lp = nk::lstm_view(layout, model.params(), model.decoder_lstm());
  std::optional<nk::LstmGrads> lg;
  if (train) lg = nk::lstm_view(layout, grad, model.decoder_lstm());
  std::vector<nk::DenseParams> fc;
  std::vector<std::optional<nk::DenseGrads>> fg;
  for (const auto& slots : model.decoder_fc()) {
    fc.push_back(nk::dense_view(layout, model.params(), slots));
    fg.emplace_back();
    if (train) fg.back() = nk::dense_view(layout, grad, slots);
  }

  DecodeGraph out;
  if (keep_positions) out.positions.resize(pb.steps());
  std::vector<nk::Var> losses;
  nk::Var code = codes;
  nk::Var h = tape.constant(to_sorted(pb, h0));
  nk::Var c = tape.constant(to_sorted(pb, c0));
  nk::Var pos = tape.constant(pb.start);
  Index live = static_cast<Index>(pb.batch());
  for (std::size_t t = 1; t < pb.steps(); ++t) {
    const Index k = pb.active[t];
    if (k < live) {
      code = nk::slice_cols(tape, code, 0, k);
      h = nk::slice_cols(tape, h, 0, k);
      c = nk::slice_cols(tape, c, 0, k);
      pos = nk::slice_cols(tape, pos, 0, k);
      live = k;
    }
    const nk::Var in_parts[] = {code, nk::scale(tape, pos, 1.0 / cfg.position_scale)};
    const auto s = nk::lstm(tape, nk::concat_rows(tape, in_parts), h, c, lp, lg ? &*lg : nullptr);
    h = s.h;
    c = s.c;
    nk::Var z = h;
    for (std::size_t i = 0; i < fc.size(); ++i) {
      z = nk::linear(tape, z, fc[i], fg[i] ? &*fg[i] : nullptr);
      if (i + 1 < fc.size()) z = nk::leaky_relu(tape, z, cfg.leaky_slope);
    }
    pos = nk::weighted_sum(tape, pos, 1.0, z, cfg.displacement_scale);
    if (!pb.targets.empty()) losses.push_back(nk::sum_squared_error(tape, pos, pb.targets[t]));
    if (keep_positions) out.positions[t] = tape.value(pos);
  }
  if (!losses.empty()) out.loss = nk::add_n(tape, losses);
  return out;
}

}  // namespace detail

InitialStates draw_initial_states(const ModelConfig& config, std::size_t batch, Rng& rng, bool with_decoder) {
  auto draw = [&](Index rows) {
    nk::Matrix m(rows, static_cast<Index>(batch));
    // Column by column so a trajectory's state does not depend on batch size.
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng);
    return m;
  };
  InitialStates s;
  s.encoder_h = draw(config.code_dim);
  s.encoder_c = draw(config.code_dim);
  if (with_decoder) {
    s.decoder_h = draw(config.decoder_hidden);
    s.decoder_c = draw(config.decoder_hidden);
  }
  return s;
}

namespace {

constexpr std::size_t kChunk = 256;

nk::Matrix unsort(const detail::PackedBatch& pb, const nk::Matrix& sorted) {
  nk::Matrix out(sorted.rows(), sorted.cols());
  for (std::size_t k = 0; k < pb.batch(); ++k) out.col(static_cast<Index>(pb.order[k])) = sorted.col(static_cast<Index>(k));
  return out;
}

}  // namespace

nk::Matrix encode_all(const Model& model, std::span<const Trajectory> trajectories, Rng& rng) {
  const auto& cfg = model.config();
  nk::Matrix codes(cfg.code_dim, static_cast<Index>(trajectories.size()));
  for (std::size_t begin = 0; begin < trajectories.size(); begin += kChunk) {
    const auto chunk = trajectories.subspan(begin, std::min(kChunk, trajectories.size() - begin));
    const auto pb = detail::pack(chunk, cfg, false);
    const auto st = draw_initial_states(cfg, chunk.size(), rng, false);
    nk::Tape tape;
    const nk::Var v = detail::encode_graph(tape, model, pb, st.encoder_h, st.encoder_c, {});
    codes.middleCols(static_cast<Index>(begin), static_cast<Index>(chunk.size())) = unsort(pb, tape.value(v));
  }
  return codes;
}

Code encode(const Model& model, const Trajectory& trajectory, Rng& rng) {
  return encode_all(model, std::span(&trajectory, 1), rng).col(0);
}

Trajectory decode(const Model& model, const Code& code, std::size_t length, TrajPoint start, Rng& rng) {
  const auto& cfg = model.config();
  if (code.size() != cfg.code_dim) throw ShapeError("decode: code dimension mismatch");
  nk::Matrix s(2, 1);
  s << start.x, start.y;
  const std::size_t lens[] = {length};
  const auto pb = detail::pack_lengths(lens, s);
  const auto st = draw_initial_states(cfg, 1, rng, true);
  nk::Tape tape;
  const nk::Var codes = tape.constant(code);
  const auto dec = detail::decode_graph(tape, model, pb, codes, st.decoder_h, st.decoder_c, {}, true);
  std::vector<TrajPoint> pts{start};
  for (std::size_t t = 1; t < length; ++t)
    pts.push_back({start.t + static_cast<std::int64_t>(t), dec.positions[t](0, 0), dec.positions[t](1, 0)});
  return Trajectory("decoded", std::move(pts));
}

std::vector<Trajectory> reconstruct(const Model& model, std::span<const Trajectory> trajectories, Rng& rng) {
  const auto& cfg = model.config();
  std::vector<Trajectory> out;
  out.reserve(trajectories.size());
  for (std::size_t begin = 0; begin < trajectories.size(); begin += kChunk) {
    const auto chunk = trajectories.subspan(begin, std::min(kChunk, trajectories.size() - begin));
    const auto pb = detail::pack(chunk, cfg, false);
    const auto st = draw_initial_states(cfg, chunk.size(), rng, true);
    nk::Tape tape;
    const nk::Var codes = detail::encode_graph(tape, model, pb, st.encoder_h, st.encoder_c, {});
    const auto dec = detail::decode_graph(tape, model, pb, codes, st.decoder_h, st.decoder_c, {}, true);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto& src = chunk[i];
      const Index k = static_cast<Index>(pb.column[i]);
      std::vector<TrajPoint> pts{src.front()};
      for (std::size_t t = 1; t < src.size(); ++t)
        pts.push_back({src[t].t, dec.positions[t](0, k), dec.positions[t](1, k)});
      out.push_back(src.with_points(std::move(pts)));
    }
  }
  return out;
}

}  // namespace trajsal::ae
