#include "streamflow/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "streamflow/errors.hpp"
#include "streamflow/model.hpp"

namespace streamflow {

std::vector<std::string> default_static_schema() {
    return {"area",
            "elevation",
            "slope",
            "mean_precip",
            "high_precip_freq",
            "high_precip_dur",
            "low_precip_freq",
            "low_precip_dur",
            "mean_pet",
            "aridity",
            "lai",
            "ndvi"};
}

void BasinRecord::validate(std::size_t static_dim) const {
    const std::string where = "basin '" + basin_id + "'";
    if (basin_id.empty()) throw DataError("basin with empty id");
    if (forcings.size() != days() * kForcingDim) {
        throw DataError(where + ": forcing matrix has " + std::to_string(forcings.size()) +
                        " values for " + std::to_string(days()) + " days");
    }
    if (forcing_valid.size() != days() || discharge.observed.size() != days()) {
        throw DataError(where + ": mask lengths disagree with the calendar");
    }
    if (static_attributes.size() != static_dim) {
        throw SchemaError(where + ": expected " + std::to_string(static_dim) + " static attributes, got " +
                          std::to_string(static_attributes.size()));
    }
    for (std::size_t d = 0; d < days(); ++d) {
        if (forcing_valid[d]) {
            for (double v : forcing_row(d)) {
                if (!std::isfinite(v)) throw DataError(where + ": non-finite forcing on " + date(d).to_string());
            }
        }
        if (discharge.is_observed(d) && !std::isfinite(discharge.values[d])) {
            throw DataError(where + ": non-finite discharge on " + date(d).to_string());
        }
    }
    for (double v : static_attributes) {
        if (!std::isfinite(v)) throw SchemaError(where + ": non-finite static attribute");
    }
}

std::string_view role_name(DomainRole role) { return role == DomainRole::source ? "source" : "target"; }

DomainRole parse_role(std::string_view name) {
    if (name == "source") return DomainRole::source;
    if (name == "target") return DomainRole::target;
    throw DataError("unknown dataset role '" + std::string(name) + "'");
}

double FeatureStats::normalize(std::size_t feature, double value) const {
    const double s = std[feature];
    return s > 0.0 ? (value - mean[feature]) / s : value - mean[feature];
}

nlohmann::json norm_stats_to_json(const NormStats& s) {
    return {{"dynamic_mean", s.dynamic.mean}, {"dynamic_std", s.dynamic.std},
            {"static_mean", s.statics.mean},  {"static_std", s.statics.std}};
}

NormStats norm_stats_from_json(const nlohmann::json& j) {
    NormStats s;
    s.dynamic.mean = j.at("dynamic_mean").get<std::vector<double>>();
    s.dynamic.std = j.at("dynamic_std").get<std::vector<double>>();
    s.statics.mean = j.at("static_mean").get<std::vector<double>>();
    s.statics.std = j.at("static_std").get<std::vector<double>>();
    if (s.dynamic.mean.size() != kForcingDim || s.dynamic.std.size() != kForcingDim ||
        s.statics.mean.size() != s.statics.std.size()) {
        throw DataError("malformed normalisation statistics");
    }
    return s;
}

const BasinRecord& DomainDataset::basin(std::string_view id) const {
    for (const auto& b : basins) {
        if (b.basin_id == id) return b;
    }
    throw DataError("unknown basin '" + std::string(id) + "'");
}

std::vector<std::string> DomainDataset::basin_ids() const {
    std::vector<std::string> ids;
    ids.reserve(basins.size());
    for (const auto& b : basins) ids.push_back(b.basin_id);
    return ids;
}

DateRange default_train_range(DomainRole role) {
    if (role == DomainRole::source) return {Date{1999, 10, 1}, Date{2008, 10, 1}};
    return {Date{2015, 9, 1}, Date{2018, 2, 22}};
}

DateRange default_test_range(DomainRole role) {
    if (role == DomainRole::source) return {Date{1989, 10, 1}, Date{1999, 10, 1}};
    return {Date{2018, 2, 22}, Date{2019, 10, 16}};
}

NormStats compute_norm_stats(std::span<const BasinRecord> basins, const DateRange& train_range,
                             std::size_t static_dim) {
    NormStats stats;
    std::vector<double> sum(kForcingDim, 0.0);
    std::size_t n = 0;
    for (const auto& b : basins) {
        for (std::size_t d = 0; d < b.days(); ++d) {
            if (!b.forcing_valid[d] || !train_range.contains(b.date(d))) continue;
            const auto row = b.forcing_row(d);
            for (std::size_t f = 0; f < kForcingDim; ++f) sum[f] += row[f];
            ++n;
        }
    }
    if (n == 0) throw InsufficientDataError("no valid forcing days inside the training range");
    stats.dynamic.mean.resize(kForcingDim);
    stats.dynamic.std.assign(kForcingDim, 0.0);
    for (std::size_t f = 0; f < kForcingDim; ++f) stats.dynamic.mean[f] = sum[f] / double(n);
    std::vector<double> ss(kForcingDim, 0.0);
    for (const auto& b : basins) {
        for (std::size_t d = 0; d < b.days(); ++d) {
            if (!b.forcing_valid[d] || !train_range.contains(b.date(d))) continue;
            const auto row = b.forcing_row(d);
            for (std::size_t f = 0; f < kForcingDim; ++f) {
                const double dev = row[f] - stats.dynamic.mean[f];
                ss[f] += dev * dev;
            }
        }
    }
    for (std::size_t f = 0; f < kForcingDim; ++f) stats.dynamic.std[f] = std::sqrt(ss[f] / double(n));

    stats.statics.mean.assign(static_dim, 0.0);
    stats.statics.std.assign(static_dim, 0.0);
    if (!basins.empty()) {
        for (const auto& b : basins) {
            for (std::size_t s = 0; s < static_dim; ++s) stats.statics.mean[s] += b.static_attributes[s];
        }
        for (auto& m : stats.statics.mean) m /= double(basins.size());
        for (const auto& b : basins) {
            for (std::size_t s = 0; s < static_dim; ++s) {
                const double dev = b.static_attributes[s] - stats.statics.mean[s];
                stats.statics.std[s] += dev * dev;
            }
        }
        for (auto& v : stats.statics.std) v = std::sqrt(v / double(basins.size()));
    }
    return stats;
}

DomainDataset make_domain(DomainRole role, std::vector<std::string> static_schema,
                          std::vector<BasinRecord> basins, DateRange train_range, DateRange test_range) {
    if (train_range.days() <= 0 || test_range.days() <= 0) {
        throw DataError("train and test ranges must be non-empty");
    }
    if (train_range.overlaps(test_range)) {
        throw DataError("train range " + train_range.start.to_string() + ".." + train_range.end.to_string() +
                        " overlaps test range " + test_range.start.to_string() + ".." +
                        test_range.end.to_string());
    }
    std::set<std::string> seen_attr(static_schema.begin(), static_schema.end());
    if (seen_attr.size() != static_schema.size()) throw SchemaError("duplicate static attribute names in schema");
    std::set<std::string> seen;
    for (const auto& b : basins) {
        b.validate(static_schema.size());
        if (!seen.insert(b.basin_id).second) throw DataError("duplicate basin id '" + b.basin_id + "'");
    }
    if (basins.empty()) throw DataError("dataset has no basins");
    DomainDataset ds;
    ds.role = role;
    ds.static_schema = std::move(static_schema);
    ds.basins = std::move(basins);
    ds.train_range = train_range;
    ds.test_range = test_range;
    ds.norm_stats = compute_norm_stats(ds.basins, ds.train_range, ds.static_schema.size());
    return ds;
}

DomainDataset subset(const DomainDataset& dataset, std::span<const std::string> ids) {
    DomainDataset out;
    out.role = dataset.role;
    out.static_schema = dataset.static_schema;
    out.train_range = dataset.train_range;
    out.test_range = dataset.test_range;
    out.norm_stats = dataset.norm_stats;
    out.units = dataset.units;
    for (const auto& id : ids) out.basins.push_back(dataset.basin(id));
    return out;
}

bool datasets_bitwise_equal(const DomainDataset& a, const DomainDataset& b) {
    if (a.role != b.role || a.static_schema != b.static_schema || !(a.train_range == b.train_range) ||
        !(a.test_range == b.test_range) || a.basins.size() != b.basins.size()) {
        return false;
    }
    auto same = [](const NormStats& x, const NormStats& y) {
        return bitwise_equal(x.dynamic.mean, y.dynamic.mean) && bitwise_equal(x.dynamic.std, y.dynamic.std) &&
               bitwise_equal(x.statics.mean, y.statics.mean) && bitwise_equal(x.statics.std, y.statics.std);
    };
    if (!same(a.norm_stats, b.norm_stats)) return false;
    for (std::size_t i = 0; i < a.basins.size(); ++i) {
        const auto& x = a.basins[i];
        const auto& y = b.basins[i];
        if (x.basin_id != y.basin_id || x.start != y.start || x.forcing_valid != y.forcing_valid ||
            x.discharge.observed != y.discharge.observed || !bitwise_equal(x.static_attributes, y.static_attributes)) {
            return false;
        }
        for (std::size_t d = 0; d < x.days(); ++d) {
            if (x.forcing_valid[d] && !bitwise_equal(x.forcing_row(d), y.forcing_row(d))) return false;
            if (x.discharge.is_observed(d) &&
                !bitwise_equal(std::span(&x.discharge.values[d], 1), std::span(&y.discharge.values[d], 1))) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace streamflow
