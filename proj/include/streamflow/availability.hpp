#pragma once

#include <string>
#include <vector>

#include "streamflow/dataset.hpp"

namespace streamflow {

/// Maximal run of missing discharge days, inclusive indices.
struct GapInterval {
    std::size_t first = 0;
    std::size_t last = 0;
    Date start;
    Date end;  // inclusive

    std::size_t length() const { return last - first + 1; }
    bool operator==(const GapInterval&) const = default;
};

struct BasinAvailability {
    std::string basin_id;
    std::size_t days = 0;
    std::size_t observed = 0;
    double observed_fraction = 0.0;
    std::vector<GapInterval> gaps;
};

std::vector<GapInterval> find_gaps(const MaskedSeries& series, Date start);
std::vector<BasinAvailability> availability_report(const DomainDataset& dataset);

/// basin_id,days,observed,observed_fraction,gap_count,longest_gap
std::string availability_csv(const std::vector<BasinAvailability>& report);
/// basin_id,start,end,length
std::string gaps_csv(const std::vector<BasinAvailability>& report);
/// Basins x dates discharge matrix over the union calendar, empty cells for gaps.
std::string heatmap_csv(const DomainDataset& dataset);

}  // namespace streamflow
