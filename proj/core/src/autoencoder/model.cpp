#include "trajsal/autoencoder/model.hpp"

#include "trajsal/common/errors.hpp"

#include <cmath>

namespace trajsal::ae {

void ModelConfig::validate() const {
  if (encoder_dims.empty() || decoder_dims.empty()) throw DataError("model needs at least one FC layer per side");
  for (Index d : encoder_dims)
    if (d <= 0) throw DataError("encoder dimensions must be positive");
  for (Index d : decoder_dims)
    if (d <= 0) throw DataError("decoder dimensions must be positive");
  if (decoder_dims.back() != 2) throw DataError("decoder must end with a 2D displacement");
  if (code_dim <= 0 || decoder_hidden <= 0) throw DataError("code and decoder hidden sizes must be positive");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw DataError("leaky slope must lie in (0,1)");
  if (!(position_scale > 0.0) || !(displacement_scale > 0.0)) throw DataError("input scales must be positive");
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  Index in = ModelConfig::kInputDim;
  for (std::size_t i = 0; i < config_.encoder_dims.size(); ++i) {
    encoder_fc_.push_back(layout_.add_dense("encoder.fc" + std::to_string(i), in, config_.encoder_dims[i]));
    in = config_.encoder_dims[i];
  }
  encoder_lstm_ = layout_.add_lstm("encoder.lstm", in, config_.code_dim);
  encoder_size_ = static_cast<std::size_t>(layout_.size());

  decoder_lstm_ = layout_.add_lstm("decoder.lstm", config_.code_dim + 2, config_.decoder_hidden);
  in = config_.decoder_hidden;
  for (std::size_t i = 0; i < config_.decoder_dims.size(); ++i) {
    decoder_fc_.push_back(layout_.add_dense("decoder.fc" + std::to_string(i), in, config_.decoder_dims[i]));
    in = config_.decoder_dims[i];
  }
  params_.assign(static_cast<std::size_t>(layout_.size()), 0.0);
}

Model Model::initialized(ModelConfig config, Rng& rng) {
  Model m(std::move(config));
  auto fill = [&](Index slot, Index fan_in) {
    const auto& s = m.layout_.slot(slot);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < s.size(); ++i) m.params_[static_cast<std::size_t>(s.offset + i)] = uniform(rng, -bound, bound);
  };
  auto fill_dense = [&](const nk::DenseSlots& d) {
    fill(d.weight, d.in);
    fill(d.bias, d.in);
  };
  auto fill_lstm = [&](const nk::LstmSlots& l) {
    const Index fan_in = l.input + l.hidden;
    fill(l.w_ih, fan_in);
    fill(l.w_hh, fan_in);
    fill(l.b_ih, fan_in);
    fill(l.b_hh, fan_in);
  };
  for (const auto& d : m.encoder_fc_) fill_dense(d);
  fill_lstm(m.encoder_lstm_);
  fill_lstm(m.decoder_lstm_);
  for (const auto& d : m.decoder_fc_) fill_dense(d);
  return m;
}

std::size_t param_count(const ModelConfig& config) {
  auto dense = [](Index in, Index out) { return out * in + out; };
  auto lstm = [](Index in, Index hidden) { return 4 * hidden * (in + hidden) + 2 * 4 * hidden; };
  Index total = 0;
  Index in = ModelConfig::kInputDim;
  for (Index d : config.encoder_dims) {
    total += dense(in, d);
    in = d;
  }
  total += lstm(in, config.code_dim);
  total += lstm(config.code_dim + 2, config.decoder_hidden);
  in = config.decoder_hidden;
  for (Index d : config.decoder_dims) {
    total += dense(in, d);
    in = d;
  }
  return static_cast<std::size_t>(total);
}

}  // namespace trajsal::ae
