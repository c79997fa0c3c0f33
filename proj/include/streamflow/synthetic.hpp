#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamflow/dataset.hpp"

namespace streamflow {

struct ParameterRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Per-basin draws for the synthetic generator.
struct SyntheticRanges {
    ParameterRange recession_k{0.05, 0.4};       // Q_t = k S_t, k in (0, 1]
    ParameterRange evaporation_c{0.02, 0.08};    // E_t = c max(Tmax_t, 0)
    ParameterRange initial_storage{10.0, 60.0};  // S_0, mm
    ParameterRange mean_wet_depth{4.0, 12.0};    // mean precipitation on wet days, mm
    ParameterRange wet_probability{0.2, 0.5};    // annual mean wet-day probability
    ParameterRange mean_tmax{12.0, 28.0};        // degC
    ParameterRange area{10.0, 2000.0};           // km^2
    double attribute_noise = 0.05;               // relative noise on encoded attributes

    void validate() const;
};

struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::size_t n_basins = 12;
    std::size_t n_days = 730;
    std::size_t train_days = 365;  // the rest is the test range
    Date start{2000, 1, 1};
    DomainRole role = DomainRole::source;
    std::string id_prefix = "syn";
    std::size_t min_days = 2;  // generation requires n_days > min_days (pass the sequence length)
    SyntheticRanges ranges;
};

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

/// Per-basin hidden parameters, kept for tests and reports.
struct ReservoirParameters {
    double k = 0.1;
    double c = 0.0;
    double s0 = 0.0;
};

/// Linear reservoir S_{t+1} = S_t + P_t - E_t - Q_t with Q_t = k S_t and
/// E_t = c max(Tmax_t, 0), evaporation limited to the water available so
/// that storage never goes negative. Returns Q_0..Q_{n-1}.
std::vector<double> simulate_linear_reservoir(const ReservoirParameters& p, std::span<const double> precip,
                                              std::span<const double> tmax);

/// A fully observed family of basins with seeded seasonal weather and
/// static attributes that encode (k, c, S_0) with noise. Deterministic per seed.
DomainDataset generate_synthetic_family(const SyntheticSpec& spec,
                                        std::vector<ReservoirParameters>* hidden = nullptr);

/// Masks contiguous random blocks of discharge covering floor(fraction * days)
/// days per basin. Forcings are untouched. Requires 0 <= fraction < 1.
DomainDataset inject_gaps(const DomainDataset& dataset, std::uint64_t seed, double gap_fraction);

}  // namespace streamflow
