#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/transfer.hpp"

namespace streamflow {

struct SuiteConfig {
    ModelConfig model;
    TrainConfig source_train;
    TrainConfig target_train;  // scratch training and fine-tuning
    TransferConfig transfer;   // freeze / selection knobs; variant and finetune are set per cell
    std::vector<Variant> variants = all_variants();
    std::vector<std::uint64_t> seeds{0};
    std::size_t jobs = 1;
};

struct CellResult {
    Variant variant = Variant::lstm;
    std::uint64_t seed = 0;
    EvaluationResult evaluation;
    std::vector<EpochRecord> target_history;
    std::vector<EpochRecord> source_history;
    std::optional<std::string> selected_basin;
    std::uint64_t source_representation_hash = 0;
    std::uint64_t handoff_representation_hash = 0;
    std::uint64_t final_representation_hash = 0;
    bool lineage_ok = true;
    bool frozen_intact = true;
    std::optional<Checkpoint> checkpoint;
};

/// Mean over seeds of each per-seed statistic, plus the spread of the median.
struct SeedAggregate {
    double median = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    double std = 0.0;
    double count_positive = 0.0;
    double median_std = 0.0;  // population std across seeds of the per-seed median
    std::size_t seeds = 0;
};

struct VariantResult {
    Variant variant = Variant::lstm;
    std::vector<std::optional<NseSummary>> per_seed;  // seed order
    SeedAggregate aggregate;
    /// basins x seeds, NaN where a basin was excluded
    std::vector<std::vector<double>> nse_matrix;
};

struct SuiteResult {
    std::vector<std::string> basins;  // target basin order
    std::vector<std::uint64_t> seeds;
    std::vector<CellResult> cells;    // variant-major
    std::vector<VariantResult> variants;

    const CellResult& cell(Variant v, std::uint64_t seed) const;
    const VariantResult& variant(Variant v) const;
};

SeedAggregate aggregate_over_seeds(const std::vector<std::optional<NseSummary>>& per_seed);

/// Runs every variant x seed cell (up to `jobs` at once; cells share nothing
/// mutable) and aggregates.
SuiteResult run_variant_suite(const SuiteConfig& config, const DomainDataset& source, const DomainDataset& target);

std::string table_csv(const SuiteResult& r);
std::string colormap_csv(const SuiteResult& r, Variant v);
/// One row per day of the target test range, blank where no value exists.
std::string hydrograph_csv(const SuiteResult& r, const DomainDataset& target, const std::string& basin_id,
                           std::uint64_t seed);
nlohmann::json suite_summary_json(const SuiteResult& r, const SuiteConfig& config);

/// summary_table.csv, colormap_<variant>.csv, hydrographs/<basin>.csv (first seed),
/// summary.json and cells/<variant>_seed<seed>/.
void write_suite_outputs(const SuiteResult& r, const SuiteConfig& config, const DomainDataset& target,
                         const std::filesystem::path& dir);

nlohmann::json suite_config_to_json(const SuiteConfig& c);

}  // namespace streamflow
