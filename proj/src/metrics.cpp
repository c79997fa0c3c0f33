#include "streamflow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {

MaskedSeries::MaskedSeries(std::vector<double> v)
    : values(std::move(v)), observed(values.size(), 1) {}

MaskedSeries::MaskedSeries(std::vector<double> v, std::vector<std::uint8_t> mask)
    : values(std::move(v)), observed(std::move(mask)) {
    if (values.size() != observed.size()) {
        throw ShapeError("mask length", values.size(), observed.size());
    }
}

std::size_t MaskedSeries::observed_count() const {
    return std::size_t(std::count_if(observed.begin(), observed.end(), [](auto m) { return m != 0; }));
}

BasinNormStats basin_norm_stats(const MaskedSeries& obs, double epsilon, std::size_t min_count) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("nse epsilon must be finite and >= 0");
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs.is_observed(i)) {
            sum += obs.values[i];
            ++n;
        }
    }
    if (n < std::max<std::size_t>(min_count, 1)) {
        throw InsufficientDataError("basin has " + std::to_string(n) + " observed values");
    }
    const double mean = sum / double(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs.is_observed(i)) ss += (obs.values[i] - mean) * (obs.values[i] - mean);
    }
    return {mean, ss / double(n), epsilon};
}

double nse(std::span<const double> sim, const MaskedSeries& obs) {
    if (sim.size() != obs.size()) throw ShapeError("nse simulated length", obs.size(), sim.size());
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs.is_observed(i)) {
            sum += obs.values[i];
            ++n;
        }
    }
    if (n < 2) throw InsufficientDataError("nse needs at least 2 observed points, got " + std::to_string(n));
    const double mean = sum / double(n);
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!obs.is_observed(i)) continue;
        const double err = sim[i] - obs.values[i];
        const double dev = obs.values[i] - mean;
        sse += err * err;
        sst += dev * dev;
    }
    if (!(sst > 0.0)) throw DegenerateVarianceError("nse: observed series has zero variance");
    return 1.0 - sse / sst;
}

namespace {

void check_batch(std::span<const double> sims, std::span<const double> obs, const char* name) {
    if (sims.empty()) throw NumericalError(std::string(name) + ": empty batch");
    if (sims.size() != obs.size()) throw ShapeError(std::string(name) + " observations", sims.size(), obs.size());
    for (std::size_t i = 0; i < sims.size(); ++i) {
        if (!std::isfinite(sims[i]) || !std::isfinite(obs[i])) {
            throw NumericalError(std::string(name) + ": non-finite input at sample " + std::to_string(i));
        }
    }
}

}  // namespace

LossResult nse_loss(std::span<const double> sims, std::span<const double> obs,
                    std::span<const BasinNormStats> stats) {
    check_batch(sims, obs, "nse_loss");
    if (stats.size() != sims.size()) throw ShapeError("nse_loss stats", sims.size(), stats.size());
    const double n = double(sims.size());
    LossResult r;
    r.d_sim.resize(sims.size());
    for (std::size_t i = 0; i < sims.size(); ++i) {
        const double denom = stats[i].denominator();
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            throw DegenerateVarianceError("nse_loss: non-positive normaliser for sample " + std::to_string(i));
        }
        const double err = sims[i] - obs[i];
        r.loss += err * err / denom;
        r.d_sim[i] = 2.0 * err / (denom * n);
    }
    r.loss /= n;
    return r;
}

LossResult mse_loss(std::span<const double> sims, std::span<const double> obs) {
    check_batch(sims, obs, "mse_loss");
    const double n = double(sims.size());
    LossResult r;
    r.d_sim.resize(sims.size());
    for (std::size_t i = 0; i < sims.size(); ++i) {
        const double err = sims[i] - obs[i];
        r.loss += err * err;
        r.d_sim[i] = 2.0 * err / n;
    }
    r.loss /= n;
    return r;
}

NseSummary summarize(std::span<const double> nse_values) {
    if (nse_values.empty()) throw InsufficientDataError("summarize: no NSE values");
    for (double v : nse_values) {
        if (!std::isfinite(v)) throw NumericalError("summarize: non-finite NSE value");
    }
    std::vector<double> sorted(nse_values.begin(), nse_values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    NseSummary s;
    s.count = n;
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sum = 0.0;
    for (double v : nse_values) sum += v;
    s.mean = sum / double(n);
    double ss = 0.0;
    for (double v : nse_values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / double(n));
    s.count_positive = std::size_t(std::count_if(nse_values.begin(), nse_values.end(), [](double v) { return v > 0.0; }));
    return s;
}

std::string summary_csv_header() { return "median,mean,max,min,std,count_positive"; }

std::string summary_csv_row(const NseSummary& s) {
    return csv::format_double(s.median) + "," + csv::format_double(s.mean) + "," +
           csv::format_double(s.max) + "," + csv::format_double(s.min) + "," +
           csv::format_double(s.std) + "," + std::to_string(s.count_positive);
}

nlohmann::json summary_to_json(const NseSummary& s) {
    return {{"median", s.median}, {"mean", s.mean}, {"max", s.max},  {"min", s.min},
            {"std", s.std},       {"count_positive", s.count_positive}, {"count", s.count}};
}

}  // namespace streamflow
