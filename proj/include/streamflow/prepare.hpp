#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/dataset.hpp"
#include "streamflow/rating_curve.hpp"

namespace streamflow {

struct GaugeStation {
    std::string basin_id;
    std::filesystem::path stage_csv;     // timestamp,stage  (half-hourly, blank = missing)
    std::filesystem::path rating_csv;    // stage,discharge  (field measurements)
    std::filesystem::path forcings_csv;  // date,precip,tmin,tmax,vapor_pressure
};

struct GaugePipelineConfig {
    DomainRole role = DomainRole::target;
    std::vector<std::string> static_schema = default_static_schema();
    std::filesystem::path static_attributes_csv;
    DateRange train_range = default_train_range(DomainRole::target);
    DateRange test_range = default_test_range(DomainRole::target);
    std::vector<GaugeStation> stations;
};

/// Relative paths resolve against `root`.
GaugePipelineConfig gauge_config_from_json(const nlohmann::json& j, const std::filesystem::path& root);

TimedSeries read_stage_csv(const std::filesystem::path& path);
std::vector<StageDischargePair> read_rating_csv(const std::filesystem::path& path);

struct PreparedStation {
    std::string basin_id;
    RatingCurve curve;
    std::size_t stage_points = 0;
    std::size_t below_datum = 0;  // observed stages at or below h0, masked
    std::size_t observed_days = 0;
};

struct PrepareResult {
    DomainDataset dataset;
    std::vector<PreparedStation> stations;
};

/// Fits each station's rating curve, converts stage to discharge, resamples
/// to daily values on the forcing calendar and assembles the domain.
PrepareResult prepare_from_gauges(const GaugePipelineConfig& config);

nlohmann::json prepared_stations_json(const std::vector<PreparedStation>& stations);

/// save_domain plus availability.csv, gaps.csv and availability_heatmap.csv.
void write_prepared_dataset(const DomainDataset& dataset, const std::filesystem::path& dir);

}  // namespace streamflow
