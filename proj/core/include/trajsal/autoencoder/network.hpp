#pragma once

#include "trajsal/autoencoder/model.hpp"

#include <span>
#include <vector>

namespace trajsal::ae {

/// Initial LSTM states, one column per trajectory in batch order. Every
/// pass draws them from a standard normal: encoder h, encoder c, then (when
/// decoding) decoder h, decoder c.
struct InitialStates {
  nk::Matrix encoder_h, encoder_c;
  nk::Matrix decoder_h, decoder_c;
};

InitialStates draw_initial_states(const ModelConfig& config, std::size_t batch, Rng& rng, bool with_decoder);

/// Latent code of one trajectory.
Code encode(const Model& model, const Trajectory& trajectory, Rng& rng);

/// Codes for many trajectories (code_dim x count), processed in chunks.
nk::Matrix encode_all(const Model& model, std::span<const Trajectory> trajectories, Rng& rng);

/// Autoregressive decoding of `length` points starting at `start`; point 0
/// is `start` itself and timestamps advance by one.
Trajectory decode(const Model& model, const Code& code, std::size_t length, TrajPoint start, Rng& rng);

/// Encode then decode each trajectory at its own length and start point.
/// Ids, labels and timestamps are copied from the inputs.
std::vector<Trajectory> reconstruct(const Model& model, std::span<const Trajectory> trajectories, Rng& rng);

}  // namespace trajsal::ae
