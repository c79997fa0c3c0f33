#include "streamflow/rating_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "streamflow/errors.hpp"

namespace streamflow {

double RatingCurve::discharge(double stage) const {
    if (!(stage > h0)) throw DataError("rating curve evaluated at or below gauge datum");
    return a * std::pow(stage - h0, b);
}

namespace {

struct LogFit {
    double log_a = 0.0;
    double b = 0.0;
    double rss = std::numeric_limits<double>::infinity();
};

LogFit fit_fixed_datum(std::span<const StageDischargePair> pairs, double h0) {
    const double n = double(pairs.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pairs) {
        sx += std::log(p.stage - h0);
        sy += std::log(p.discharge);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pairs) {
        const double dx = std::log(p.stage - h0) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.discharge) - my);
    }
    LogFit fit;
    if (!(sxx > 0.0)) return fit;
    fit.b = sxy / sxx;
    fit.log_a = my - fit.b * mx;
    double rss = 0.0;
    for (const auto& p : pairs) {
        const double r = std::log(p.discharge) - (fit.log_a + fit.b * std::log(p.stage - h0));
        rss += r * r;
    }
    fit.rss = rss;
    return fit;
}

}  // namespace

RatingCurve fit_rating_curve(std::span<const StageDischargePair> pairs) {
    if (pairs.size() < 5) {
        throw InsufficientDataError("rating curve needs at least 5 stage-discharge pairs, got " +
                                    std::to_string(pairs.size()));
    }
    std::set<double> distinct;
    double min_stage = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) {
        if (!std::isfinite(p.stage) || !std::isfinite(p.discharge)) {
            throw DataError("rating curve pairs must be finite");
        }
        if (!(p.discharge > 0.0)) throw DataError("rating curve discharge must be > 0");
        distinct.insert(p.stage);
        min_stage = std::min(min_stage, p.stage);
    }
    if (distinct.size() < 3) throw DataError("degenerate stages: fewer than 3 distinct values");
    if (!(min_stage > 0.0)) throw DataError("degenerate stages: minimum stage must be > 0");

    // Coarse scan brackets the minimum, then golden-section refines it.
    const double hi = min_stage * (1.0 - 1e-9);
    constexpr int kGrid = 256;
    int best = 0;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const double rss = fit_fixed_datum(pairs, hi * double(i) / kGrid).rss;
        if (rss < best_rss) {
            best_rss = rss;
            best = i;
        }
    }
    double lo_b = hi * double(std::max(best - 1, 0)) / kGrid;
    double hi_b = hi * double(std::min(best + 1, kGrid)) / kGrid;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi_b - inv_phi * (hi_b - lo_b);
    double x2 = lo_b + inv_phi * (hi_b - lo_b);
    double f1 = fit_fixed_datum(pairs, x1).rss;
    double f2 = fit_fixed_datum(pairs, x2).rss;
    for (int iter = 0; iter < 200 && (hi_b - lo_b) > 1e-14 * std::max(1.0, min_stage); ++iter) {
        if (f1 <= f2) {
            hi_b = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi_b - inv_phi * (hi_b - lo_b);
            f1 = fit_fixed_datum(pairs, x1).rss;
        } else {
            lo_b = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo_b + inv_phi * (hi_b - lo_b);
            f2 = fit_fixed_datum(pairs, x2).rss;
        }
    }
    double h0 = 0.5 * (lo_b + hi_b);
    LogFit fit = fit_fixed_datum(pairs, h0);
    // Boundary grid points are exact candidates too (h0 = 0 is common).
    for (double candidate : {0.0, hi}) {
        const LogFit f = fit_fixed_datum(pairs, candidate);
        if (f.rss < fit.rss) {
            fit = f;
            h0 = candidate;
        }
    }
    if (!(fit.b > 0.0)) throw DataError("rating curve fit produced a non-positive exponent");
    return {std::exp(fit.log_a), fit.b, h0};
}

TimedSeries stage_to_discharge(const RatingCurve& curve, const TimedSeries& stages) {
    if (stages.timestamps.size() != stages.series.size()) {
        throw ShapeError("stage timestamps", stages.series.size(), stages.timestamps.size());
    }
    TimedSeries out;
    out.timestamps = stages.timestamps;
    out.series.values.assign(stages.series.size(), 0.0);
    out.series.observed.assign(stages.series.size(), 0);
    for (std::size_t i = 0; i < stages.series.size(); ++i) {
        if (!stages.series.is_observed(i)) continue;
        const double h = stages.series.values[i];
        if (!std::isfinite(h)) throw DataError("stage series contains a non-finite value");
        if (h > curve.h0) {
            out.series.values[i] = curve.discharge(h);
            out.series.observed[i] = 1;
        }
    }
    return out;
}

DailySeries resample_daily(const TimedSeries& half_hourly) {
    const auto& ts = half_hourly.timestamps;
    if (ts.size() != half_hourly.series.size()) {
        throw ShapeError("half-hour timestamps", half_hourly.series.size(), ts.size());
    }
    if (ts.empty()) return {};
    auto floor_div = [](std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] % kHalfHourSeconds != 0) {
            throw DataError("timestamp " + format_timestamp(ts[i]) + " is not on the 30-minute grid");
        }
        if (i > 0 && ts[i] <= ts[i - 1]) {
            throw DataError("timestamps must be strictly increasing at " + format_timestamp(ts[i]));
        }
    }
    const std::int64_t first_day = floor_div(ts.front(), 86400);
    const std::int64_t last_day = floor_div(ts.back(), 86400);
    const std::size_t n_days = std::size_t(last_day - first_day + 1);
    std::vector<double> sums(n_days, 0.0);
    std::vector<std::size_t> counts(n_days, 0);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!half_hourly.series.is_observed(i)) continue;
        const auto d = std::size_t(floor_div(ts[i], 86400) - first_day);
        sums[d] += half_hourly.series.values[i];
        ++counts[d];
    }
    DailySeries out;
    out.start = Date{std::chrono::sys_days{std::chrono::days{first_day}}};
    out.series.values.assign(n_days, 0.0);
    out.series.observed.assign(n_days, 0);
    for (std::size_t d = 0; d < n_days; ++d) {
        if (counts[d] >= kMinObservedSlotsPerDay) {
            out.series.values[d] = sums[d] / double(counts[d]);
            out.series.observed[d] = 1;
        }
    }
    return out;
}

}  // namespace streamflow
