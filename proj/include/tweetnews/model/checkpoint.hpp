#pragma once

#include <filesystem>
#include <optional>

#include "tweetnews/model/config.hpp"
#include "tweetnews/model/transformer.hpp"

namespace tweetnews::model {

/// Binary checkpoint: "sfck" magic, u32 version, the model config, then named
/// f64 blocks. Integers and doubles are written little-endian regardless of
/// host order, so a save/load round trip is bit-exact.
struct Checkpoint {
  ModelConfig config;
  ParameterList blocks;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws DataError on a bad magic, unsupported version or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Model parameters plus, when given, discriminator parameters (their names
/// already carry the "disc." prefix).
void save_model(const std::filesystem::path& path, const StyleTransferModel& model,
                const Discriminator* disc = nullptr);
StyleTransferModel model_from_checkpoint(const Checkpoint& ckpt);
/// Rebuilds the discriminator stored in a checkpoint, if any.
std::optional<Discriminator> discriminator_from_checkpoint(const Checkpoint& ckpt);

}  // namespace tweetnews::model
