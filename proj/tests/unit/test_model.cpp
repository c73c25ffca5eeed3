#include "oracles.hpp"
#include "trajsal/autoencoder/checkpoint.hpp"
#include "trajsal/autoencoder/losses.hpp"
#include "trajsal/autoencoder/network.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/stms/generator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace trajsal;
using namespace trajsal::ae;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.encoder_dims = {8, 6};
  c.code_dim = 5;
  c.decoder_hidden = 7;
  c.decoder_dims = {6, 2};
  return c;
}

std::vector<Trajectory> sample_trajectories(std::uint64_t seed, int n) {
  Rng r(seed);
  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) {
    auto spec = stms::random_scenario_spec(r, 1, 0.0);
    spec.base.length = stms::kMinLength + (i * 7) % 15;
    spec.base.turn_instant = spec.base.length / 2;
    out.push_back(stms::gen_scenario(spec, r, "s" + std::to_string(i)).trajectories[0]);
  }
  return out;
}

}  // namespace

TEST(Model, DefaultParameterCountIsExact) {
  EXPECT_EQ(param_count(ModelConfig{}), 127970u);
  Rng r(1);
  const auto m = Model::initialized({}, r);
  EXPECT_EQ(m.param_count(), 127970u);
  EXPECT_EQ(m.encoder_param_count(), 96064u);
  EXPECT_EQ(m.decoder_param_count(), 31906u);
}

TEST(Model, ClosedFormMatchesLayoutForOtherShapes) {
  for (const auto& c : {small_config(), ModelConfig{{16}, 4, 3, {2}}}) {
    EXPECT_EQ(param_count(c), Model(c).param_count());
  }
  ModelConfig bad;
  bad.decoder_dims = {64, 3};
  EXPECT_THROW(Model{bad}, DataError);
}

TEST(Model, TensorNamesAndShapes) {
  const Model m;
  const auto& l = m.layout();
  const auto shape = [&](const char* n) {
    const auto& s = l.slot(l.find(n));
    return std::pair{s.rows, s.cols};
  };
  EXPECT_EQ(shape("encoder.fc0.weight"), (std::pair<Index, Index>{256, 4}));
  EXPECT_EQ(shape("encoder.lstm.weight_ih"), (std::pair<Index, Index>{128, 128}));
  EXPECT_EQ(shape("encoder.lstm.bias_hh"), (std::pair<Index, Index>{128, 1}));
  EXPECT_EQ(shape("decoder.lstm.weight_ih"), (std::pair<Index, Index>{256, 34}));
  EXPECT_EQ(shape("decoder.fc2.weight"), (std::pair<Index, Index>{2, 32}));
  EXPECT_EQ(l.find("nope"), -1);
}

TEST(Model, InitialisationStaysInsideFanInBounds) {
  Rng r(2);
  const auto m = Model::initialized({}, r);
  for (const auto& s : m.layout().slots()) {
    Index fan_in = s.cols;
    if (s.name.find("lstm") != std::string::npos) {
      const std::string base = s.name.substr(0, s.name.rfind('.'));
      fan_in = m.layout().slot(m.layout().find(base + ".weight_ih")).cols +
               m.layout().slot(m.layout().find(base + ".weight_hh")).cols;
    } else if (s.cols == 1) {
      fan_in = m.layout().slot(m.layout().find(s.name.substr(0, s.name.rfind('.')) + ".weight")).cols;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    double lo = 0, hi = 0;
    for (Index i = 0; i < s.size(); ++i) {
      const double v = m.params()[static_cast<std::size_t>(s.offset + i)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_LE(hi, bound) << s.name;
    EXPECT_GE(lo, -bound) << s.name;
    if (s.size() >= 64) {
      EXPECT_GT(hi - lo, bound) << s.name;  // actually spread over the range
    }
  }
}

TEST(Network, EncodeMatchesScalarOracle) {
  Rng ir(3);
  const auto m = Model::initialized(small_config(), ir);
  const auto trajs = sample_trajectories(4, 9);  // mixed lengths exercise the sorted packing
  Rng r1(5), r2(5);
  const auto codes = encode_all(m, trajs, r1);
  const auto st = oracle::draw_states(m.config(), trajs.size(), r2);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto ref = oracle::encode(m, trajs[i], st.enc_h[i], st.enc_c[i]);
    for (std::size_t j = 0; j < ref.size(); ++j) ASSERT_NEAR(codes(static_cast<Index>(j), static_cast<Index>(i)), ref[j], 1e-12);
  }
}

TEST(Network, ReconstructMatchesScalarOracle) {
  Rng ir(6);
  const auto m = Model::initialized(small_config(), ir);
  const auto trajs = sample_trajectories(7, 6);
  Rng r1(8), r2(8);
  const auto rec = reconstruct(m, trajs, r1);
  double total = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    ASSERT_EQ(rec[i].size(), trajs[i].size());
    EXPECT_EQ(rec[i].front(), trajs[i].front());
    EXPECT_EQ(rec[i].id(), trajs[i].id());
    total += reconstruction_error(trajs[i], rec[i]);
  }
  EXPECT_NEAR(total, oracle::reconstruction_loss(m, trajs, r2), 1e-9 * total);
}

TEST(Network, DecodeStartsAtTheGivenPoint) {
  Rng ir(9);
  const auto m = Model::initialized(small_config(), ir);
  Rng r(10);
  const Code code = Code::Random(5);
  const auto t = decode(m, code, 12, {3, 1.5, -2.0}, r);
  ASSERT_EQ(t.size(), 12u);
  EXPECT_EQ(t.front(), (TrajPoint{3, 1.5, -2.0}));
  EXPECT_EQ(t.back().t, 14);
  EXPECT_THROW(decode(m, Code::Zero(4), 12, {}, r), ShapeError);
  EXPECT_THROW(decode(m, code, 1, {}, r), DataError);
}

TEST(Network, EncodingIsSeedDeterministic) {
  Rng ir(11);
  const auto m = Model::initialized({}, ir);
  const auto trajs = sample_trajectories(12, 4);
  Rng a(1), b(1), c(2);
  const auto x = encode_all(m, trajs, a);
  EXPECT_EQ(x, encode_all(m, trajs, b));
  EXPECT_NE(x, encode_all(m, trajs, c));  // random initial states matter
}

TEST(Network, LargeSetsAreChunked) {
  Rng ir(13);
  const auto m = Model::initialized(small_config(), ir);
  const auto trajs = sample_trajectories(14, 300);
  Rng r(1);
  const auto codes = encode_all(m, trajs, r);
  EXPECT_EQ(codes.cols(), 300);
  EXPECT_TRUE(codes.allFinite());
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  Rng r(15);
  Checkpoint c{Model::initialized(small_config(), r), {123, 1e5, 7, "Vb5"}, std::nullopt};
  nk::AdamState s({1e-3, 0.9, 0.999, 1e-8}, c.model.param_count());
  s.step = 123;
  for (std::size_t i = 0; i < s.first_moment.size(); ++i) {
    s.first_moment[i] = uniform(r, -1, 1);
    s.second_moment[i] = uniform(r, 0, 1);
  }
  c.optimizer = s;
  std::stringstream buf;
  write_checkpoint(buf, c);
  const auto d = read_checkpoint(buf);
  EXPECT_EQ(d.model, c.model);
  EXPECT_EQ(d.meta, c.meta);
  ASSERT_TRUE(d.optimizer);
  EXPECT_EQ(d.optimizer->step, 123);
  EXPECT_EQ(d.optimizer->first_moment, s.first_moment);
  EXPECT_EQ(d.optimizer->second_moment, s.second_moment);
  EXPECT_EQ(d.optimizer->config.learning_rate, 1e-3);
}

TEST(Checkpoint, CorruptionIsDetected) {
  Rng r(16);
  const Checkpoint c{Model::initialized(small_config(), r), {1, 0, 1, "Vb0"}, std::nullopt};
  std::stringstream buf;
  write_checkpoint(buf, c);
  const std::string bytes = buf.str();

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  std::istringstream a(flipped);
  EXPECT_THROW(read_checkpoint(a), DataError);

  std::istringstream b(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(b), DataError);

  std::istringstream c2(bytes + "x");
  EXPECT_THROW(read_checkpoint(c2), DataError);

  std::istringstream d("TSAX");
  EXPECT_THROW(read_checkpoint(d), DataError);
}

TEST(Checkpoint, FileHelpers) {
  Rng r(17);
  const auto m = Model::initialized(small_config(), r);
  const auto path = std::filesystem::temp_directory_path() / "trajsal_model.ckpt";
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), DataError);
}
