#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "streamflow/dataset.hpp"
#include "streamflow/model.hpp"

namespace streamflow {

/// One range of one basin, already normalised: days x input_dim rows laid
/// out so that every window is a contiguous slice.
struct BasinFeatures {
    std::string basin_id;
    Date start;
    std::size_t days = 0;
    std::vector<double> features;
    MaskedSeries targets;           // physical units
    BasinNormStats loss_stats;      // from the basin's training-range observations
    bool has_loss_stats = false;
};

struct SampleRef {
    std::uint32_t basin = 0;
    std::uint32_t day = 0;  // target day, index into BasinFeatures
};

/// A sequence-to-one training example.
struct Sample {
    ConstMatrixView window;
    double target = 0.0;
    bool target_observed = true;
    std::size_t basin_index = 0;
    const std::string* basin_id = nullptr;
    Date target_date;
};

/// Windowed view over a DomainDataset range. Windows are not materialised;
/// `at(i)` points into the per-basin feature matrices.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(ModelConfig config, std::vector<BasinFeatures> basins, std::vector<SampleRef> refs);
    SampleSet(ModelConfig config, std::shared_ptr<const std::vector<BasinFeatures>> basins,
              std::vector<SampleRef> refs);

    const ModelConfig& config() const { return config_; }
    std::size_t size() const { return refs_.size(); }
    bool empty() const { return refs_.empty(); }
    Sample at(std::size_t i) const;
    const std::vector<BasinFeatures>& basins() const { return *basins_; }
    const std::vector<SampleRef>& refs() const { return refs_; }
    const BasinNormStats& loss_stats(std::size_t i) const;

    /// Samples belonging to the named basins only (basin table is shared).
    SampleSet restricted_to(std::span<const std::string> basin_ids) const;
    /// Number of samples per basin, in basin order.
    std::vector<std::size_t> counts_per_basin() const;

private:
    ModelConfig config_;
    std::shared_ptr<const std::vector<BasinFeatures>> basins_ =
        std::make_shared<const std::vector<BasinFeatures>>();
    std::vector<SampleRef> refs_;
};

struct SampleOptions {
    const NormStats* norm = nullptr;  // dataset's own statistics when null
    double nse_epsilon = 0.1;
    bool require_observed_target = true;
};

/// One sample per (basin, day) inside `range` whose target is observed and
/// whose whole window (inside the range) has valid forcings. Inputs are
/// z-scored; targets stay in physical units. Each basin's loss statistics
/// come from its observed training-range discharge plus `nse_epsilon`.
/// With `require_observed_target = false` days with a missing target are
/// emitted too (for gap-filling predictions), flagged in Sample.
SampleSet make_samples(const DomainDataset& dataset, RangeKind range, const ModelConfig& config,
                       const SampleOptions& options = {});

/// Model dimensions implied by a dataset (dynamic/static widths).
ModelConfig config_for_dataset(const DomainDataset& dataset, ModelConfig base, bool use_static);

}  // namespace streamflow
