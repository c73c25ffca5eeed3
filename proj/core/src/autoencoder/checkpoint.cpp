#include "trajsal/autoencoder/checkpoint.hpp"

#include "trajsal/common/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace trajsal::ae {

namespace {

using nlohmann::ordered_json;

constexpr char kMagic[4] = {'T', 'S', 'A', 'E'};
constexpr std::uint64_t kMaxManifest = 1u << 24;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) hash_ = (hash_ ^ c[i]) * 1099511628211ull;
  }
  template <class T>
  void put(T v) {
    v = to_little(v);
    bytes(&v, sizeof v);
  }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  std::uint64_t hash() const { return hash_; }

 private:
  std::ostream& out_;
  std::uint64_t hash_ = 1469598103934665603ull;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("checkpoint truncated");
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) hash_ = (hash_ ^ c[i]) * 1099511628211ull;
  }
  template <class T>
  T get() {
    T v;
    bytes(&v, sizeof v);
    return to_little(v);
  }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::uint64_t hash() const { return hash_; }

 private:
  std::istream& in_;
  std::uint64_t hash_ = 1469598103934665603ull;
};

ordered_json config_json(const ModelConfig& c) {
  return {{"input_dim", ModelConfig::kInputDim},
          {"encoder_dims", c.encoder_dims},
          {"code_dim", c.code_dim},
          {"decoder_hidden", c.decoder_hidden},
          {"decoder_dims", c.decoder_dims},
          {"leaky_slope", c.leaky_slope},
          {"position_scale", c.position_scale},
          {"displacement_scale", c.displacement_scale},
          {"gate_order", "input,forget,cell,output"}};
}

ModelConfig config_from_json(const ordered_json& j) {
  ModelConfig c;
  if (j.at("input_dim").get<Index>() != ModelConfig::kInputDim) throw DataError("checkpoint: unsupported input_dim");
  c.encoder_dims = j.at("encoder_dims").get<std::vector<Index>>();
  c.code_dim = j.at("code_dim").get<Index>();
  c.decoder_hidden = j.at("decoder_hidden").get<Index>();
  c.decoder_dims = j.at("decoder_dims").get<std::vector<Index>>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.position_scale = j.at("position_scale").get<double>();
  c.displacement_scale = j.at("displacement_scale").get<double>();
  return c;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const Model& m = ckpt.model;
  Writer w(out);
  w.bytes(kMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);

  ordered_json manifest = {{"format", "trajsal-checkpoint"},
                           {"model", config_json(m.config())},
                           {"param_count", m.param_count()},
                           {"training",
                            {{"iteration", ckpt.meta.iteration},
                             {"beta", ckpt.meta.beta},
                             {"seed", ckpt.meta.seed},
                             {"variant", ckpt.meta.variant}}}};
  const std::string text = manifest.dump();
  w.put<std::uint64_t>(text.size());
  w.str(text);

  const auto& slots = m.layout().slots();
  w.put<std::uint64_t>(slots.size());
  for (const auto& s : slots) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.name.size()));
    w.str(s.name);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(s.rows));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(s.cols));
    for (Index i = 0; i < s.size(); ++i) w.put<double>(m.params()[static_cast<std::size_t>(s.offset + i)]);
  }

  w.put<std::uint8_t>(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const auto& a = *ckpt.optimizer;
    if (a.first_moment.size() != m.param_count() || a.second_moment.size() != m.param_count())
      throw ShapeError("optimizer state does not match the model");
    w.put<std::int64_t>(a.step);
    w.put<double>(a.config.learning_rate);
    w.put<double>(a.config.beta1);
    w.put<double>(a.config.beta2);
    w.put<double>(a.config.epsilon);
    for (double v : a.first_moment) w.put<double>(v);
    for (double v : a.second_moment) w.put<double>(v);
  }
  const std::uint64_t h = w.hash();
  w.put<std::uint64_t>(h);
  if (!out) throw Error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw DataError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                    std::to_string(kCheckpointVersion) + ")");

  const auto mlen = r.get<std::uint64_t>();
  if (mlen > kMaxManifest) throw DataError("checkpoint manifest too large");
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(r.str(static_cast<std::size_t>(mlen)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }

  Checkpoint ck{Model(), {}, std::nullopt};
  try {
    ck.model = Model(config_from_json(manifest.at("model")));
    const auto& t = manifest.at("training");
    ck.meta.iteration = t.at("iteration").get<std::int64_t>();
    ck.meta.beta = t.at("beta").get<double>();
    ck.meta.seed = t.at("seed").get<std::uint64_t>();
    ck.meta.variant = t.at("variant").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }

  Model& m = ck.model;
  const auto count = r.get<std::uint64_t>();
  if (count != m.layout().slots().size()) throw DataError("checkpoint tensor count does not match the configuration");
  for (const auto& s : m.layout().slots()) {
    const auto nlen = r.get<std::uint32_t>();
    if (nlen > 4096) throw DataError("checkpoint tensor name too long");
    const std::string name = r.str(nlen);
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (name != s.name || rows != static_cast<std::uint64_t>(s.rows) || cols != static_cast<std::uint64_t>(s.cols))
      throw DataError("checkpoint tensor '" + name + "' does not match layout slot '" + s.name + "'");
    for (Index i = 0; i < s.size(); ++i) m.params()[static_cast<std::size_t>(s.offset + i)] = r.get<double>();
  }

  const auto flag = r.get<std::uint8_t>();
  if (flag > 1) throw DataError("checkpoint optimizer flag corrupt");
  if (flag == 1) {
    nk::AdamState a;
    a.step = r.get<std::int64_t>();
    a.config.learning_rate = r.get<double>();
    a.config.beta1 = r.get<double>();
    a.config.beta2 = r.get<double>();
    a.config.epsilon = r.get<double>();
    a.first_moment.resize(m.param_count());
    a.second_moment.resize(m.param_count());
    for (double& v : a.first_moment) v = r.get<double>();
    for (double& v : a.second_moment) v = r.get<double>();
    ck.optimizer = std::move(a);
  }
  const std::uint64_t expect = r.hash();
  if (r.get<std::uint64_t>() != expect) throw DataError("checkpoint checksum mismatch");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    write_checkpoint(out, ckpt);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

void save_model(const std::filesystem::path& path, const Model& model) {
  save_checkpoint(path, Checkpoint{model, {}, std::nullopt});
}

Model load_model(const std::filesystem::path& path) { return load_checkpoint(path).model; }

}  // namespace trajsal::ae
