#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "addn/adam.hpp"
#include "addn/model.hpp"

namespace addn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// On disk: "ADDN", u32 version, the run config as text, u64 epoch, then
/// length-prefixed (name, shape, float64 values) blocks and an optional Adam
/// section. All integers and floats little-endian.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_text;
  std::uint64_t epoch = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;
  std::optional<AdamState> adam;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// In-memory forms of the same container, used by the file functions.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes);

Checkpoint make_checkpoint(const ModelParams& params, std::string config_text, std::uint64_t epoch,
                           const AdamState* adam = nullptr);

/// Copies checkpoint values into `params`, whose shapes come from the current
/// configuration. The first missing or differently shaped tensor raises a
/// ShapeMismatch error naming it.
void restore_params(const Checkpoint& checkpoint, ModelParams& params);

}  // namespace addn
