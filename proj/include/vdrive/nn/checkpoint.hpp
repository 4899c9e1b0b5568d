#pragma once

// Checkpoint file, format "vdrive-checkpoint" version 1 (JSON):
//   {"format": "vdrive-checkpoint", "version": 1, "kind": "<agent kind>",
//    "config": {"<key>": "<value>", ...},
//    "blocks": [{"name": "...", "shape": [..], "values": [..]}, ...]}
// Values are written with round-trip precision, so load(save(p)) == p bitwise.

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vdrive/nn/param_block.hpp"

namespace vdrive::nn {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "vdrive-checkpoint";

/// Unreadable, wrong-version, or shape-incompatible checkpoint.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  int version = kCheckpointVersion;
  std::string kind;
  std::map<std::string, std::string> config;
  std::vector<ParamBlock> blocks;
};

nlohmann::json checkpoint_to_json(const std::string& kind,
                                  const std::map<std::string, std::string>& config,
                                  std::span<ParamBlock* const> blocks);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& config,
                     std::span<ParamBlock* const> blocks);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into blocks matched by position; names and shapes
/// must agree.
void assign_blocks(const Checkpoint& checkpoint, std::span<ParamBlock* const> blocks);

}  // namespace vdrive::nn
