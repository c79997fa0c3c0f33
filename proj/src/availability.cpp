#include "streamflow/availability.hpp"

#include <algorithm>
#include <sstream>

#include "streamflow/csv.hpp"

namespace streamflow {

std::vector<GapInterval> find_gaps(const MaskedSeries& series, Date start) {
    std::vector<GapInterval> gaps;
    std::size_t i = 0;
    while (i < series.size()) {
        if (series.is_observed(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < series.size() && !series.is_observed(j + 1)) ++j;
        gaps.push_back({i, j, start + std::int64_t(i), start + std::int64_t(j)});
        i = j + 1;
    }
    return gaps;
}

std::vector<BasinAvailability> availability_report(const DomainDataset& dataset) {
    std::vector<BasinAvailability> out;
    for (const auto& b : dataset.basins) {
        BasinAvailability a;
        a.basin_id = b.basin_id;
        a.days = b.days();
        a.observed = b.discharge.observed_count();
        a.observed_fraction = a.days ? double(a.observed) / double(a.days) : 0.0;
        a.gaps = find_gaps(b.discharge, b.start);
        out.push_back(std::move(a));
    }
    return out;
}

std::string availability_csv(const std::vector<BasinAvailability>& report) {
    std::ostringstream os;
    os << "basin_id,days,observed,observed_fraction,gap_count,longest_gap\n";
    for (const auto& a : report) {
        std::size_t longest = 0;
        for (const auto& g : a.gaps) longest = std::max(longest, g.length());
        os << a.basin_id << ',' << a.days << ',' << a.observed << ',' << csv::format_double(a.observed_fraction)
           << ',' << a.gaps.size() << ',' << longest << '\n';
    }
    return os.str();
}

std::string gaps_csv(const std::vector<BasinAvailability>& report) {
    std::ostringstream os;
    os << "basin_id,start,end,length\n";
    for (const auto& a : report) {
        for (const auto& g : a.gaps) {
            os << a.basin_id << ',' << g.start.to_string() << ',' << g.end.to_string() << ',' << g.length() << '\n';
        }
    }
    return os.str();
}

std::string heatmap_csv(const DomainDataset& dataset) {
    if (dataset.basins.empty()) return "basin_id\n";
    Date lo = dataset.basins.front().start;
    Date hi = dataset.basins.front().end();
    for (const auto& b : dataset.basins) {
        lo = std::min(lo, b.start);
        hi = std::max(hi, b.end());
    }
    std::ostringstream os;
    os << "basin_id";
    for (Date d = lo; d < hi; d = d + 1) os << ',' << d.to_string();
    os << '\n';
    for (const auto& b : dataset.basins) {
        os << b.basin_id;
        for (Date d = lo; d < hi; d = d + 1) {
            os << ',';
            const std::int64_t idx = d - b.start;
            if (idx >= 0 && idx < std::int64_t(b.days()) && b.discharge.is_observed(std::size_t(idx))) {
                os << csv::format_double(b.discharge.values[std::size_t(idx)]);
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace streamflow
