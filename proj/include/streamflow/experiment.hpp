#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/suite.hpp"
#include "streamflow/synthetic.hpp"

namespace streamflow {

/// Where a domain comes from: a dataset directory or a synthetic spec,
/// optionally with injected gaps.
struct DomainSource {
    std::optional<std::filesystem::path> path;
    std::optional<SyntheticSpec> synthetic;
    double gap_fraction = 0.0;
    std::uint64_t gap_seed = 0;
    SchemaConfig schema;

    DomainDataset load() const;
};

struct ExperimentConfig {
    std::optional<DomainSource> source;
    std::optional<DomainSource> target;
    ModelConfig model;
    TrainConfig source_train;
    TrainConfig target_train;
    TransferConfig transfer;
    std::vector<Variant> variants = all_variants();
    std::vector<std::uint64_t> seeds{0};
    std::size_t jobs = 1;
    std::filesystem::path output = "streamflow_output";

    /// Paths must exist, seeds must be non-empty.
    void validate() const;
    SuiteConfig suite_config() const;
};

/// Relative paths resolve against `data_root` (the config file's directory
/// unless STREAMFLOW_DATA_ROOT is set). Unknown keys are rejected.
///
/// {
///   "source": {"path": "..."} | {"synthetic": {...}, "gap_fraction": 0.5, "gap_seed": 1},
///   "target": same,
///   "model": {...}, "source_train": {...}, "target_train": {...}, "transfer": {...},
///   "variants": ["LSTM", ...], "seeds": [0, 1], "jobs": 1, "output": "dir"
/// }
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& data_root);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);
nlohmann::json experiment_config_to_json(const ExperimentConfig& c);

/// STREAMFLOW_DATA_ROOT if set, else `fallback`.
std::filesystem::path data_root_or(const std::filesystem::path& fallback);

}  // namespace streamflow
