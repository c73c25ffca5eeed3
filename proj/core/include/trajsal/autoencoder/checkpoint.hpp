#pragma once

#include "trajsal/autoencoder/model.hpp"
#include "trajsal/numkernel/adam.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace trajsal::ae {

/// Checkpoint container, all integers and floats little-endian:
///
///   "TSAE" | u32 version | u64 n + n bytes JSON manifest
///   | u64 tensor count | per tensor: u32 name length, name, u64 rows,
///     u64 cols, rows*cols f64 row-major
///   | u8 optimizer flag [| i64 step, 4 f64 hyper-parameters, f64 first
///     moments, f64 second moments]
///   | u64 FNV-1a hash of everything before it
///
/// The manifest echoes the model configuration and training metadata. LSTM
/// gate blocks are stacked (input, forget, cell, output) along tensor rows.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMeta {
  std::int64_t iteration = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string variant;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct Checkpoint {
  Model model;
  TrainingMeta meta;
  std::optional<nk::AdamState> optimizer;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

/// Writes through a temporary file and renames, so a crash never leaves a
/// half-written checkpoint behind.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace trajsal::ae
