#include "vdrive/nn/checkpoint.hpp"

#include <fstream>

namespace vdrive::nn {

using nlohmann::json;

json checkpoint_to_json(const std::string& kind, const std::map<std::string, std::string>& config,
                        std::span<ParamBlock* const> blocks) {
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["kind"] = kind;
  doc["config"] = config;
  json jb = json::array();
  for (const ParamBlock* b : blocks) {
    jb.push_back({{"name", b->name}, {"shape", b->shape}, {"values", b->values}});
  }
  doc["blocks"] = std::move(jb);
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != kCheckpointFormat) {
      throw CheckpointError("not a vdrive checkpoint");
    }
    Checkpoint cp;
    cp.version = doc.at("version").get<int>();
    if (cp.version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(cp.version) +
                            " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    cp.kind = doc.at("kind").get<std::string>();
    cp.config = doc.at("config").get<std::map<std::string, std::string>>();
    for (const json& jb : doc.at("blocks")) {
      ParamBlock b(jb.at("name").get<std::string>(), jb.at("shape").get<std::vector<std::size_t>>());
      auto values = jb.at("values").get<std::vector<double>>();
      if (values.size() != b.size()) throw CheckpointError("block " + b.name + " has the wrong value count");
      b.values = std::move(values);
      cp.blocks.push_back(std::move(b));
    }
    return cp;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& config,
                     std::span<ParamBlock* const> blocks) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(kind, config, blocks).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(doc);
}

void assign_blocks(const Checkpoint& checkpoint, std::span<ParamBlock* const> blocks) {
  if (checkpoint.blocks.size() != blocks.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(checkpoint.blocks.size()) +
                          " parameter blocks, model expects " + std::to_string(blocks.size()));
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const ParamBlock& src = checkpoint.blocks[k];
    ParamBlock& dst = *blocks[k];
    if (src.name != dst.name || src.shape != dst.shape) {
      throw CheckpointError("checkpoint block " + src.name + " does not match model block " + dst.name);
    }
    dst.values = src.values;
    dst.zero_grad();
  }
}

}  // namespace vdrive::nn
