#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/dates.hpp"
#include "streamflow/metrics.hpp"

namespace streamflow {

/// Dynamic forcing columns, in window order.
inline constexpr std::array<std::string_view, 4> kForcingNames = {"precip", "tmin", "tmax",
                                                                  "vapor_pressure"};
inline constexpr std::size_t kForcingDim = kForcingNames.size();

/// Default static attribute schema shared by source and target domains.
std::vector<std::string> default_static_schema();

struct BasinRecord {
    std::string basin_id;
    Date start;
    std::vector<double> forcings;             // days x kForcingDim, row-major
    std::vector<std::uint8_t> forcing_valid;  // 0 marks a day with any missing forcing
    MaskedSeries discharge;                   // one entry per day
    std::vector<double> static_attributes;    // schema order

    std::size_t days() const { return discharge.size(); }
    Date date(std::size_t index) const { return start + std::int64_t(index); }
    Date end() const { return start + std::int64_t(days()); }
    std::span<const double> forcing_row(std::size_t day) const {
        return std::span<const double>(forcings).subspan(day * kForcingDim, kForcingDim);
    }
    /// Throws DataError if internal lengths disagree or values are non-finite.
    void validate(std::size_t static_dim) const;
};

enum class DomainRole { source, target };
std::string_view role_name(DomainRole role);
DomainRole parse_role(std::string_view name);

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> std;  // population; 0 means "leave unscaled"

    double normalize(std::size_t feature, double value) const;
    bool operator==(const FeatureStats&) const = default;
};

/// z-score statistics: per-forcing over all valid training-range days, per
/// static attribute across the dataset's basins.
struct NormStats {
    FeatureStats dynamic;
    FeatureStats statics;

    bool operator==(const NormStats&) const = default;
};

nlohmann::json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

enum class RangeKind { train, test };

struct DomainDataset {
    DomainRole role = DomainRole::source;
    std::vector<std::string> static_schema;
    std::vector<BasinRecord> basins;
    DateRange train_range;
    DateRange test_range;
    NormStats norm_stats;
    nlohmann::json units = nlohmann::json::object();

    const DateRange& range(RangeKind kind) const { return kind == RangeKind::train ? train_range : test_range; }
    const BasinRecord& basin(std::string_view id) const;
    std::vector<std::string> basin_ids() const;
};

/// Default split for a role: source 1999-10-01..2008-10-01 (train) and
/// 1989-10-01..1999-10-01 (test); target 2015-09-01..2018-02-22 (train)
/// and 2018-02-22..2019-10-16 (test). Ranges are half-open.
DateRange default_train_range(DomainRole role);
DateRange default_test_range(DomainRole role);

NormStats compute_norm_stats(std::span<const BasinRecord> basins, const DateRange& train_range,
                             std::size_t static_dim);

/// Validates every record and the ranges, then computes norm_stats from the
/// training range. Throws DataError/SchemaError.
DomainDataset make_domain(DomainRole role, std::vector<std::string> static_schema,
                          std::vector<BasinRecord> basins, DateRange train_range, DateRange test_range);

/// Copy restricted to `ids` (in the given order). Normalisation statistics
/// are inherited, not recomputed.
DomainDataset subset(const DomainDataset& dataset, std::span<const std::string> ids);

/// Options for reading a dataset directory.
struct SchemaConfig {
    std::vector<std::string> static_schema = default_static_schema();
    std::optional<DateRange> train_range;  // overrides the manifest
    std::optional<DateRange> test_range;
};

inline constexpr int kDatasetFormatVersion = 1;

/// Layout:
///   manifest.json            role, train_range, test_range, static_attributes, basins, units
///   static_attributes.csv    basin_id,<schema columns>
///   forcings/<id>.csv        date,precip,tmin,tmax,vapor_pressure   (blank = missing)
///   discharge/<id>.csv       date,discharge                           (blank = missing)
DomainDataset load_domain(const std::filesystem::path& root, const SchemaConfig& schema = {});
void save_domain(const DomainDataset& dataset, const std::filesystem::path& root);

/// date,precip,tmin,tmax,vapor_pressure; discharge is left fully missing.
BasinRecord read_forcing_csv(const std::filesystem::path& path, const std::string& basin_id);
/// basin_id,<schema columns>; rows keyed by basin id.
std::map<std::string, std::vector<double>> read_static_attributes_csv(const std::filesystem::path& path,
                                                                      const std::vector<std::string>& schema);

/// Bitwise equality of every stored value, mask and date.
bool datasets_bitwise_equal(const DomainDataset& a, const DomainDataset& b);

}  // namespace streamflow
