#pragma once

// Batched encoder/decoder graphs. Trajectories are sorted by length
// (longest first) and laid out time-major, so at step t the sequences still
// running occupy the leading active[t] columns.

#include "trajsal/autoencoder/model.hpp"
#include "trajsal/numkernel/tape.hpp"

#include <span>
#include <vector>

namespace trajsal::ae::detail {

struct PackedBatch {
  std::vector<std::size_t> order;    // sorted column -> input index
  std::vector<std::size_t> column;   // input index -> sorted column
  std::vector<std::size_t> lengths;  // per sorted column
  std::vector<Index> active;         // per step
  std::vector<Index> offset;         // first encoder column of each step
  nk::Matrix inputs;                 // 4 x total points, network units
  nk::Matrix start;                  // 2 x batch, data units
  std::vector<nk::Matrix> targets;   // per step t >= 1: 2 x active[t]; empty when decoding only

  std::size_t batch() const { return order.size(); }
  std::size_t steps() const { return active.size(); }
};

PackedBatch pack(std::span<const Trajectory> trajectories, const ModelConfig& config, bool with_targets);

/// Decoder-only layout from lengths and start points (input order).
PackedBatch pack_lengths(std::span<const std::size_t> lengths, const nk::Matrix& start);

/// Reorders the columns of a batch-ordered matrix into sorted order.
nk::Matrix to_sorted(const PackedBatch& pb, const nk::Matrix& m);

/// Final encoder hidden state per sorted column (code_dim x batch).
nk::Var encode_graph(nk::Tape& tape, const Model& model, const PackedBatch& pb, const nk::Matrix& h0,
                     const nk::Matrix& c0, std::span<double> grad);

struct DecodeGraph {
  nk::Var loss;                         // invalid when pb has no targets
  std::vector<nk::Matrix> positions;    // per step t >= 1 when kept: 2 x active[t]
};

DecodeGraph decode_graph(nk::Tape& tape, const Model& model, const PackedBatch& pb, nk::Var codes,
                         const nk::Matrix& h0, const nk::Matrix& c0, std::span<double> grad, bool keep_positions);

}  // namespace trajsal::ae::detail
