#pragma once

#include "trajsal/common/random.hpp"
#include "trajsal/numkernel/params.hpp"
#include "trajsal/trajdata/trajectory.hpp"

#include <span>
#include <vector>

namespace trajsal::ae {

using nk::Index;
using Code = nk::Vector;

/// Architecture. Defaults: per-step FC
/// 4 -> 256 -> 192 -> 128 (leaky ReLU), LSTM 128 -> 32 (the code), decoder
/// LSTM (32 + 2) -> 64 and FC 64 -> 64 -> 32 -> 2 (leaky ReLU on the first two).
struct ModelConfig {
  std::vector<Index> encoder_dims{256, 192, 128};
  Index code_dim = 32;
  Index decoder_hidden = 64;
  std::vector<Index> decoder_dims{64, 32, 2};
  double leaky_slope = 0.01;
  /// Fixed, non-trainable input normalisation: the network sees positions
  /// divided by position_scale and displacements divided by
  /// displacement_scale; the decoder's raw output is multiplied by
  /// displacement_scale. Losses are always in data units.
  double position_scale = 100.0;
  double displacement_scale = 10.0;

  static constexpr Index kInputDim = 4;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// All trainable parameters of the encoder/decoder, packed in one flat
/// row-major buffer (see nk::ParameterLayout).
class Model {
 public:
  explicit Model(ModelConfig config = {});

  /// Parameters drawn uniformly in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per tensor;
  /// the fan-in of an LSTM tensor is input + hidden.
  static Model initialized(ModelConfig config, Rng& rng);

  const ModelConfig& config() const { return config_; }
  const nk::ParameterLayout& layout() const { return layout_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::size_t param_count() const { return params_.size(); }
  std::size_t encoder_param_count() const { return encoder_size_; }
  std::size_t decoder_param_count() const { return params_.size() - encoder_size_; }

  const std::vector<nk::DenseSlots>& encoder_fc() const { return encoder_fc_; }
  const nk::LstmSlots& encoder_lstm() const { return encoder_lstm_; }
  const nk::LstmSlots& decoder_lstm() const { return decoder_lstm_; }
  const std::vector<nk::DenseSlots>& decoder_fc() const { return decoder_fc_; }

  friend bool operator==(const Model& a, const Model& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  ModelConfig config_;
  nk::ParameterLayout layout_;
  std::vector<nk::DenseSlots> encoder_fc_;
  nk::LstmSlots encoder_lstm_;
  nk::LstmSlots decoder_lstm_;
  std::vector<nk::DenseSlots> decoder_fc_;
  std::size_t encoder_size_ = 0;
  nk::ParamBuffer params_;
};

/// Closed-form trainable scalar count for a configuration.
std::size_t param_count(const ModelConfig& config);

}  // namespace trajsal::ae
