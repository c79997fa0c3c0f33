#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace streamflow {

/// Discharge series with a per-timestep observed flag. Entries whose flag is
/// 0 are never read by any metric.
struct MaskedSeries {
    std::vector<double> values;
    std::vector<std::uint8_t> observed;

    MaskedSeries() = default;
    /// Fully observed series.
    explicit MaskedSeries(std::vector<double> v);
    MaskedSeries(std::vector<double> v, std::vector<std::uint8_t> mask);

    std::size_t size() const { return values.size(); }
    std::size_t observed_count() const;
    bool is_observed(std::size_t i) const { return observed[i] != 0; }
};

/// Per-basin normaliser for the NSE loss, taken from training-period observations.
struct BasinNormStats {
    double mean_obs = 0.0;
    double var_obs = 1.0;  // population variance
    double epsilon = 0.1;

    double denominator() const { return var_obs + epsilon; }
};

/// Mean and population variance of the observed entries. Throws
/// InsufficientDataError with fewer than `min_count` observations.
BasinNormStats basin_norm_stats(const MaskedSeries& obs, double epsilon, std::size_t min_count = 1);

/// The six statistics reported per model: median, mean, max, min,
/// population standard deviation and the number of basins with NSE > 0.
struct NseSummary {
    double median = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    double std = 0.0;
    std::size_t count_positive = 0;
    std::size_t count = 0;

    bool operator==(const NseSummary&) const = default;
};

/// 1 - SSE / SST over observed indices. Throws InsufficientDataError with
/// fewer than two observed points and DegenerateVarianceError when the
/// observed values are all equal.
double nse(std::span<const double> sim, const MaskedSeries& obs);

struct LossResult {
    double loss = 0.0;
    std::vector<double> d_sim;
};

/// mean_i (sim_i - obs_i)^2 / (var_obs_i + eps_i), with its gradient.
LossResult nse_loss(std::span<const double> sims, std::span<const double> obs,
                    std::span<const BasinNormStats> stats);
/// mean_i (sim_i - obs_i)^2, with its gradient.
LossResult mse_loss(std::span<const double> sims, std::span<const double> obs);

NseSummary summarize(std::span<const double> nse_values);

/// Column order shared by CSV writers: median,mean,max,min,std,count_positive.
std::string summary_csv_header();
std::string summary_csv_row(const NseSummary& s);
nlohmann::json summary_to_json(const NseSummary& s);

}  // namespace streamflow
