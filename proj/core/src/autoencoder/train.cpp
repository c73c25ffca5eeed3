#include "trajsal/autoencoder/train.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/stms/generator.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace trajsal::ae {

namespace {

// Stream tags for derive_rng.
constexpr std::uint64_t kBatchStream = 0x6261;
constexpr std::uint64_t kStateStream = 0x7374;

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string variant_name(double beta) {
  if (beta == kBetaStrong) return "Vb5";
  if (beta == kBetaWeak) return "Vb3";
  if (beta == 0.0) return "Vb0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "beta=%g", beta);
  return buf;
}

double parse_beta(const std::string& text) {
  if (text == "Vb5") return kBetaStrong;
  if (text == "Vb3") return kBetaWeak;
  if (text == "Vb0") return 0.0;
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v) || v < 0.0)
    throw DataError("beta must be Vb5, Vb3, Vb0 or a non-negative number, got '" + text + "'");
  return v;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DataError("learning rate must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DataError("beta must be >= 0");
  if (iterations < 0 || checkpoint_every < 0 || validate_every < 0)
    throw DataError("iteration counts must be non-negative");
}

BatchSource stms_source(std::uint64_t seed, double noise_scale) {
  return [seed, noise_scale](std::int64_t iteration) {
    Rng rng = derive_rng(seed, {kBatchStream, static_cast<std::uint64_t>(iteration)});
    return stms::gen_training_batch(rng, noise_scale);
  };
}

void write_curve_header(std::ostream& out) { out << "iteration,L_r,L_c,L,val_mean_error,val_f_measure\n"; }

void write_curve_row(std::ostream& out, const CurveRow& r) {
  out << r.iteration << ',' << fmt(r.reconstruction) << ',' << fmt(r.consistency) << ',' << fmt(r.total) << ','
      << fmt(r.validation.mean_error) << ',' << fmt(r.validation.f_measure) << '\n';
}

std::vector<CurveRow> train(Checkpoint& state, const TrainConfig& config, const BatchSource& source,
                            const TrainHooks& hooks) {
  config.validate();
  Model& model = state.model;
  if (!state.optimizer) state.optimizer.emplace(nk::AdamConfig{config.learning_rate}, model.param_count());
  nk::AdamState& adam = *state.optimizer;
  adam.config.learning_rate = config.learning_rate;
  state.meta.beta = config.beta;
  state.meta.seed = config.seed;
  state.meta.variant = variant_name(config.beta);

  const bool persist = !config.checkpoint_path.empty();
  std::vector<CurveRow> rows;
  nk::ParamBuffer grad(model.param_count());
  while (state.meta.iteration < config.iterations) {
    const std::int64_t it = state.meta.iteration;
    const Batch batch = source(it);
    Rng rng = derive_rng(config.seed, {kStateStream, static_cast<std::uint64_t>(it)});
    const LossBreakdown loss = total_loss(model, batch, config.beta, rng, grad, config.median_gradient);
    if (!std::isfinite(loss.total)) {
      if (persist) save_checkpoint(config.checkpoint_path, state);
      throw NumericError("non-finite loss at iteration " + std::to_string(it));
    }
    try {
      nk::adam_step(model.params(), grad, adam);
    } catch (const NumericError&) {
      if (persist) save_checkpoint(config.checkpoint_path, state);
      throw;
    }
    state.meta.iteration = it + 1;

    CurveRow row{state.meta.iteration, loss.reconstruction, loss.consistency, loss.total, {}};
    if (config.validate_every > 0 && hooks.validator && state.meta.iteration % config.validate_every == 0)
      row.validation = hooks.validator(model, state.meta.iteration);
    if (hooks.on_row) hooks.on_row(row);
    rows.push_back(row);

    if (persist && config.checkpoint_every > 0 && state.meta.iteration % config.checkpoint_every == 0)
      save_checkpoint(config.checkpoint_path, state);
  }
  if (persist) save_checkpoint(config.checkpoint_path, state);
  return rows;
}

}  // namespace trajsal::ae
