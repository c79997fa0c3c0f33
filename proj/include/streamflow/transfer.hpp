#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamflow/checkpoint.hpp"
#include "streamflow/dataset.hpp"
#include "streamflow/training.hpp"

namespace streamflow {

enum class Variant { lstm, lstm_sca, lstm_tl, lstm_tl_sca };

std::string_view variant_name(Variant v);  // LSTM, LSTM_SCA, LSTM_TL, LSTM_TL_SCA
Variant parse_variant(std::string_view name);
std::vector<Variant> all_variants();
bool is_transfer(Variant v);
bool uses_static(Variant v);

enum class BasinSelection { off, below_half_median };
std::string_view basin_selection_name(BasinSelection s);
BasinSelection parse_basin_selection(std::string_view name);

struct TransferConfig {
    Variant variant = Variant::lstm_tl;
    bool freeze_representation = false;
    std::uint64_t head_seed = 0;
    TrainConfig finetune;
    BasinSelection basin_selection = BasinSelection::off;
    std::size_t selection_epochs = 5;
    bool reuse_source_norm = true;  // normalise target inputs with source statistics
};

nlohmann::json transfer_config_to_json(const TransferConfig& c);
TransferConfig transfer_config_from_json(const nlohmann::json& j, TransferConfig base = {});

/// Median of the finite entries; candidates are basins below half the median
/// (below the median when it is not positive). Seeded uniform pick among the
/// candidates, else the lowest-NSE basin (ties: smallest id).
std::string select_lagging_basin(const std::map<std::string, double>& per_basin_nse, std::uint64_t seed);

/// A trained model together with what is needed to reuse it elsewhere.
struct DomainModel {
    ParameterSet params;
    NormStats norm;
    std::vector<std::string> static_schema;
    std::uint64_t representation_hash = 0;
    std::optional<std::string> selected_basin;

    explicit DomainModel(const ModelConfig& c) : params(c) {}
    const ModelConfig& config() const { return params.config(); }
};

Checkpoint to_checkpoint(const DomainModel& m, nlohmann::json extra = nlohmann::json::object());
/// Verifies the stored representation hash against the parameters.
DomainModel from_checkpoint(const Checkpoint& c);

struct SourceRun {
    TrainingRun run;
    DomainModel model;      // handoff parameters (after the selection pass, if any)
    std::vector<std::string> train_basins;
    std::vector<std::string> validation_basins;
    std::map<std::string, double> validation_nse;
    std::optional<TrainingRun> selection_run;
    std::size_t selection_samples = 0;  // samples seen by the selection pass
    std::size_t selection_basin_samples = 0;  // samples the selected basin owns

    SourceRun(const ModelConfig& c) : run(c), model(c) {}
};

/// Trains on `dataset` (any role); validation basins are a seeded
/// `train_config.validation_fraction` slice held out of training.
SourceRun train_domain(const ModelConfig& model_config, const DomainDataset& dataset, const TrainConfig& train_config,
                       const TransferConfig& transfer_config);
/// train_domain restricted to source datasets.
SourceRun pretrain_source(const ModelConfig& model_config, const DomainDataset& source, const TrainConfig& train_config,
                          const TransferConfig& transfer_config);

struct TransferRun {
    std::uint64_t source_representation_hash = 0;
    std::uint64_t handoff_representation_hash = 0;
    std::uint64_t final_representation_hash = 0;
    std::optional<std::string> selected_basin;
    TrainingRun target_run;
    DomainModel model;
    EvaluationResult evaluation;
    bool frozen_representation_intact = true;

    TransferRun(const ModelConfig& c) : target_run(c), model(c) {}
};

/// Throws SchemaError naming every attribute that differs.
void check_schema_compatible(const std::vector<std::string>& source, const std::vector<std::string>& target,
                             bool uses_static);

/// Head swap, lineage check, fine-tuning on the target training range with
/// target-basin loss statistics, evaluation on the target test range.
TransferRun transfer_and_finetune(const DomainModel& source, const DomainDataset& target,
                                  const TransferConfig& config);

/// Scratch baseline on the target: train on the training range, evaluate on
/// the test range with the target's own normalisation.
TransferRun train_scratch(const ModelConfig& model_config, const DomainDataset& target, const TrainConfig& config);

}  // namespace streamflow
