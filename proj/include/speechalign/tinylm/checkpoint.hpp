#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "speechalign/tinylm/params.hpp"
#include "speechalign/tinylm/vocab.hpp"

namespace speechalign::tinylm {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::optional<Vocab> vocab;
};

// JSON document:
//   {"format": "speechalign-checkpoint", "format_version": 1,
//    "config": {...}, "vocab": [...]?,
//    "tensors": [{"name", "group", "layer", "shape": [r, c], "data": [...]}]}
// Doubles are written in shortest round-trip form, so a reload is bit-exact.
nlohmann::json checkpoint_to_json(const ModelParams& params, const Vocab* vocab = nullptr);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const Vocab* vocab = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace speechalign::tinylm
