#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "streamflow/model.hpp"

namespace streamflow {

inline constexpr int kCheckpointFormatVersion = 1;

/// Parameters plus an open metadata object (normalisation statistics,
/// lineage, training provenance) carried alongside.
struct Checkpoint {
    ParameterSet params;
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json model_config_to_json(const ModelConfig& config);
/// Missing keys fall back to ModelConfig defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// JSON container: {"format", "format_version", "config", "parameter_count",
/// "representation_hash", "parameters", "metadata"}. Doubles round-trip bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace streamflow
