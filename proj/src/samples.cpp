#include "streamflow/samples.hpp"

#include <algorithm>

#include "streamflow/errors.hpp"

namespace streamflow {

SampleSet::SampleSet(ModelConfig config, std::vector<BasinFeatures> basins, std::vector<SampleRef> refs)
    : config_(config),
      basins_(std::make_shared<const std::vector<BasinFeatures>>(std::move(basins))),
      refs_(std::move(refs)) {}

SampleSet::SampleSet(ModelConfig config, std::shared_ptr<const std::vector<BasinFeatures>> basins,
                     std::vector<SampleRef> refs)
    : config_(config), basins_(std::move(basins)), refs_(std::move(refs)) {}

Sample SampleSet::at(std::size_t i) const {
    const SampleRef& r = refs_.at(i);
    const BasinFeatures& b = (*basins_)[r.basin];
    const std::size_t T = config_.sequence_length;
    const std::size_t width = config_.input_dim();
    const std::size_t first = r.day + 1 - T;
    Sample s;
    s.window = ConstMatrixView{std::span<const double>(b.features).subspan(first * width, T * width), T, width};
    s.target = b.targets.values[r.day];
    s.target_observed = b.targets.is_observed(r.day);
    s.basin_index = r.basin;
    s.basin_id = &b.basin_id;
    s.target_date = b.start + std::int64_t(r.day);
    return s;
}

const BasinNormStats& SampleSet::loss_stats(std::size_t i) const {
    const BasinFeatures& b = (*basins_)[refs_.at(i).basin];
    if (!b.has_loss_stats) {
        throw InsufficientDataError("basin '" + b.basin_id + "' has no training-period observations");
    }
    return b.loss_stats;
}

SampleSet SampleSet::restricted_to(std::span<const std::string> basin_ids) const {
    const auto& basins = *basins_;
    std::vector<std::uint8_t> keep(basins.size(), 0);
    for (const auto& id : basin_ids) {
        bool found = false;
        for (std::size_t b = 0; b < basins.size(); ++b) {
            if (basins[b].basin_id == id) {
                keep[b] = 1;
                found = true;
            }
        }
        if (!found) throw DataError("unknown basin '" + id + "'");
    }
    std::vector<SampleRef> refs;
    for (const auto& r : refs_) {
        if (keep[r.basin]) refs.push_back(r);
    }
    return SampleSet(config_, basins_, std::move(refs));
}

std::vector<std::size_t> SampleSet::counts_per_basin() const {
    std::vector<std::size_t> counts(basins_->size(), 0);
    for (const auto& r : refs_) ++counts[r.basin];
    return counts;
}

ModelConfig config_for_dataset(const DomainDataset& dataset, ModelConfig base, bool use_static) {
    base.dynamic_dim = kForcingDim;
    base.static_dim = dataset.static_schema.size();
    base.use_static = use_static;
    base.validate();
    return base;
}

SampleSet make_samples(const DomainDataset& dataset, RangeKind range_kind, const ModelConfig& config,
                       const SampleOptions& options) {
    const NormStats* norm = options.norm;
    config.validate();
    if (config.dynamic_dim != kForcingDim) {
        throw ShapeError("model dynamic_dim", kForcingDim, config.dynamic_dim);
    }
    if (config.use_static && config.static_dim != dataset.static_schema.size()) {
        throw ShapeError("model static_dim", dataset.static_schema.size(), config.static_dim);
    }
    const NormStats& stats = norm ? *norm : dataset.norm_stats;
    if (stats.dynamic.mean.size() != kForcingDim ||
        (config.use_static && stats.statics.mean.size() != dataset.static_schema.size())) {
        throw ShapeError("normalisation statistics", kForcingDim, stats.dynamic.mean.size());
    }
    const DateRange& range = dataset.range(range_kind);
    const std::size_t T = config.sequence_length;
    const std::size_t width = config.input_dim();

    std::vector<BasinFeatures> features;
    std::vector<SampleRef> refs;
    for (std::size_t bi = 0; bi < dataset.basins.size(); ++bi) {
        const BasinRecord& rec = dataset.basins[bi];
        BasinFeatures bf;
        bf.basin_id = rec.basin_id;

        // Training-period loss normaliser, whatever range is being windowed.
        MaskedSeries train_obs;
        for (std::size_t d = 0; d < rec.days(); ++d) {
            if (dataset.train_range.contains(rec.date(d)) && rec.discharge.is_observed(d)) {
                train_obs.values.push_back(rec.discharge.values[d]);
                train_obs.observed.push_back(1);
            }
        }
        if (!train_obs.values.empty()) {
            bf.loss_stats = basin_norm_stats(train_obs, options.nse_epsilon);
            bf.has_loss_stats = true;
        }

        const Date lo = std::max(range.start, rec.start);
        const Date hi = std::min(range.end, rec.end());
        if (hi <= lo) {
            bf.start = range.start;
            features.push_back(std::move(bf));
            continue;
        }
        bf.start = lo;
        bf.days = std::size_t(hi - lo);
        const std::size_t offset = std::size_t(lo - rec.start);
        bf.features.assign(bf.days * width, 0.0);
        bf.targets.values.assign(bf.days, 0.0);
        bf.targets.observed.assign(bf.days, 0);
        std::vector<double> statics;
        if (config.use_static) {
            for (std::size_t s = 0; s < config.static_dim; ++s) {
                statics.push_back(stats.statics.normalize(s, rec.static_attributes[s]));
            }
        }
        std::size_t valid_run = 0;
        for (std::size_t d = 0; d < bf.days; ++d) {
            const std::size_t src = offset + d;
            double* row = bf.features.data() + d * width;
            if (rec.forcing_valid[src]) {
                const auto f = rec.forcing_row(src);
                for (std::size_t k = 0; k < kForcingDim; ++k) row[k] = stats.dynamic.normalize(k, f[k]);
                ++valid_run;
            } else {
                valid_run = 0;
            }
            std::copy(statics.begin(), statics.end(), row + kForcingDim);
            bf.targets.values[d] = rec.discharge.values[src];
            bf.targets.observed[d] = rec.discharge.observed[src];
            if (valid_run >= T && (rec.discharge.is_observed(src) || !options.require_observed_target)) {
                refs.push_back({std::uint32_t(bi), std::uint32_t(d)});
            }
        }
        features.push_back(std::move(bf));
    }
    return SampleSet(config, std::move(features), std::move(refs));
}

}  // namespace streamflow
