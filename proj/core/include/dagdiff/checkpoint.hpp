#pragma once

#include <string>

#include "dagdiff/model.hpp"

namespace dagdiff {

/// Versioned binary checkpoint: magic "DAGD", u32 version, length-prefixed
/// config JSON, then length-prefixed named tensors as little-endian f32
/// arrays. Doubles are quantized to f32 on write.
void save_checkpoint(const std::string& path, const ModelParams& params);

ModelParams load_checkpoint(const std::string& path);

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace dagdiff
