#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "streamflow/dates.hpp"
#include "streamflow/metrics.hpp"

namespace streamflow {

/// Power-law stage-discharge relation Q = a (h - h0)^b.
struct RatingCurve {
    double a = 1.0;
    double b = 1.0;
    double h0 = 0.0;

    /// Discharge at `stage`; requires stage > h0.
    double discharge(double stage) const;
};

struct StageDischargePair {
    double stage = 0.0;      // m
    double discharge = 0.0;  // m^3/s
};

/// Least squares in log space for fixed h0, with h0 picked by golden-section
/// search over [0, min stage) on the log-space residual sum of squares.
///
/// Throws InsufficientDataError with fewer than 5 pairs, DataError for
/// non-positive discharges or degenerate stages (fewer than 3 distinct
/// values, or a minimum stage <= 0).
RatingCurve fit_rating_curve(std::span<const StageDischargePair> pairs);

/// Sub-daily series on absolute timestamps (UTC seconds).
struct TimedSeries {
    std::vector<std::int64_t> timestamps;
    MaskedSeries series;
};

/// Applies the curve pointwise; stages at or below h0 become missing.
TimedSeries stage_to_discharge(const RatingCurve& curve, const TimedSeries& stages);

inline constexpr std::int64_t kHalfHourSeconds = 1800;
inline constexpr std::size_t kSlotsPerDay = 48;
inline constexpr std::size_t kMinObservedSlotsPerDay = 24;

struct DailySeries {
    Date start;
    MaskedSeries series;
};

/// Daily mean of observed half-hour values; a day with fewer than 24 of its
/// 48 slots observed is missing. Throws DataError for timestamps off the
/// 30-minute grid or out of order.
DailySeries resample_daily(const TimedSeries& half_hourly);

}  // namespace streamflow
