#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/metrics.hpp"
#include "streamflow/model.hpp"
#include "streamflow/samples.hpp"

namespace streamflow {

enum class LossKind { nse, mse };

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 256;
    double lr_first_epoch = 1e-3;
    double lr_rest = 5e-4;
    AdamHyper adam;
    double clip_norm = 1.0;
    double weight_decay = 0.0;
    LossKind loss = LossKind::nse;
    double nse_epsilon = 0.1;
    std::uint64_t seed = 0;
    std::size_t samples_per_epoch = 0;  // 0: every sample, every epoch
    double validation_fraction = 0.1;   // held-out basins, used by callers that split
    bool keep_best = false;             // also keep the best-validation-median parameters
    bool freeze_representation = false; // only the head is updated

    void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& c);
/// Starts from `base` and overrides the keys present in `j`.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Learning rate for a 0-based epoch index.
double lr_schedule(const TrainConfig& config, std::size_t epoch_index);

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update, in place. Throws NumericalError naming the
/// parameter block when a gradient is non-finite (nothing is modified then).
void adam_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state, double lr,
               const AdamHyper& hyper = {});

struct StepInfo {
    std::size_t epoch = 0;  // 0-based
    std::size_t step = 0;   // optimizer step count after the update
    double lr = 0.0;
    double batch_loss = 0.0;
    double pre_clip_norm = 0.0;
    double post_clip_norm = 0.0;
    std::size_t batch_size = 0;
    std::span<const SampleRef> batch;
};
using StepHook = std::function<void(const StepInfo&)>;

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double lr = 0.0;
    double train_loss = 0.0;
    std::size_t samples = 0;
    std::optional<NseSummary> validation;
};

enum class RunStatus { completed, diverged };

struct TrainingRun {
    ModelConfig model_config;
    TrainConfig config;
    std::uint64_t seed = 0;
    std::vector<EpochRecord> history;
    ParameterSet final_params;
    std::optional<ParameterSet> best_params;
    double best_validation_median = 0.0;
    RunStatus status = RunStatus::completed;
    std::string message;
    std::size_t samples_seen = 0;
    std::vector<std::filesystem::path> checkpoints;

    explicit TrainingRun(const ModelConfig& mc) : model_config(mc), final_params(mc) {}
};

using EpochHook = std::function<void(const EpochRecord&, const ParameterSet&)>;

struct TrainOptions {
    const SampleSet* validation = nullptr;
    std::optional<ParameterSet> initial;  // default: init_parameters(model, seed)
    StepHook on_step;
    EpochHook on_epoch;
    std::filesystem::path checkpoint_dir;  // empty: nothing written
};

/// Mini-batch training with seeded per-epoch shuffling, global-norm gradient
/// clipping, Adam on the scheduled learning rate and per-epoch validation.
/// A non-finite loss stops the run with status `diverged` and the parameters
/// of the last completed epoch.
TrainingRun train(const ModelConfig& model, const SampleSet& samples, const TrainConfig& config,
                  const TrainOptions& options = {});

/// One JSON object per epoch: epoch, lr, train_loss, validation (or null).
std::string training_log_jsonl(const TrainingRun& run);

struct BasinScore {
    std::string basin_id;
    double nse = 0.0;
    std::size_t samples = 0;
};

struct BasinPrediction {
    std::string basin_id;
    std::vector<Date> dates;
    std::vector<double> predicted;
    std::vector<double> observed;
    std::vector<std::uint8_t> observed_mask;
};

struct EvaluationResult {
    std::vector<BasinScore> scores;  // basin order
    std::optional<NseSummary> summary;
    std::vector<std::string> excluded;
    std::vector<std::string> warnings;
    std::vector<BasinPrediction> predictions;

    std::map<std::string, double> nse_map() const;
};

/// Predicts every sample, then computes NSE per basin over its observed
/// targets. Basins with fewer than two targets or constant targets are
/// excluded with a warning.
EvaluationResult evaluate(const ParameterSet& params, const SampleSet& samples);
EvaluationResult evaluate(const ParameterSet& params, const DomainDataset& dataset, RangeKind range,
                          const NormStats* norm = nullptr);

/// basin_id,nse,samples
std::string per_basin_nse_csv(const EvaluationResult& result);

/// Splits basins into (train ids, validation ids); ceil(fraction * n)
/// held out, chosen by a seeded shuffle, never all of them.
std::pair<std::vector<std::string>, std::vector<std::string>> split_validation_basins(
    const DomainDataset& dataset, double fraction, std::uint64_t seed);

}  // namespace streamflow
