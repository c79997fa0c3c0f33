#include "streamflow/prepare.hpp"

#include "streamflow/availability.hpp"
#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {

namespace fs = std::filesystem;

GaugePipelineConfig gauge_config_from_json(const nlohmann::json& j, const fs::path& root) {
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : root / p; };
    GaugePipelineConfig c;
    try {
        if (j.contains("role")) c.role = parse_role(j.at("role").get<std::string>());
        c.train_range = default_train_range(c.role);
        c.test_range = default_test_range(c.role);
        if (j.contains("static_attributes")) c.static_schema = j.at("static_attributes").get<std::vector<std::string>>();
        c.static_attributes_csv = resolve(j.at("static_attributes_csv").get<std::string>());
        auto range = [](const nlohmann::json& r) {
            return DateRange{Date::parse(r.at("start").get<std::string>()), Date::parse(r.at("end").get<std::string>())};
        };
        if (j.contains("train_range")) c.train_range = range(j.at("train_range"));
        if (j.contains("test_range")) c.test_range = range(j.at("test_range"));
        for (const auto& s : j.at("stations")) {
            c.stations.push_back({s.at("basin_id").get<std::string>(), resolve(s.at("stage_csv").get<std::string>()),
                                  resolve(s.at("rating_csv").get<std::string>()),
                                  resolve(s.at("forcings_csv").get<std::string>())});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("gauge pipeline config: ") + e.what());
    }
    if (c.stations.empty()) throw ConfigError("gauge pipeline config: no stations");
    return c;
}

TimedSeries read_stage_csv(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("missing stage file " + path.string());
    const csv::Table t = csv::read(path);
    if (t.header != std::vector<std::string>{"timestamp", "stage"}) {
        throw DataError(path.string() + ": expected header 'timestamp,stage'");
    }
    TimedSeries out;
    for (const auto& row : t.rows) {
        out.timestamps.push_back(parse_timestamp(row[0]));
        const auto v = csv::parse_optional_double(row[1], path.string());
        out.series.values.push_back(v.value_or(0.0));
        out.series.observed.push_back(v ? 1 : 0);
    }
    return out;
}

std::vector<StageDischargePair> read_rating_csv(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("missing rating file " + path.string());
    const csv::Table t = csv::read(path);
    if (t.header != std::vector<std::string>{"stage", "discharge"}) {
        throw DataError(path.string() + ": expected header 'stage,discharge'");
    }
    std::vector<StageDischargePair> out;
    for (const auto& row : t.rows) {
        out.push_back({csv::parse_double(row[0], path.string()), csv::parse_double(row[1], path.string())});
    }
    return out;
}

PrepareResult prepare_from_gauges(const GaugePipelineConfig& config) {
    const auto statics = read_static_attributes_csv(config.static_attributes_csv, config.static_schema);
    PrepareResult out;
    std::vector<BasinRecord> basins;
    for (const auto& st : config.stations) {
        PreparedStation ps;
        ps.basin_id = st.basin_id;
        const auto pairs = read_rating_csv(st.rating_csv);
        ps.curve = fit_rating_curve(pairs);
        const TimedSeries stage = read_stage_csv(st.stage_csv);
        ps.stage_points = stage.series.observed_count();
        const TimedSeries q = stage_to_discharge(ps.curve, stage);
        ps.below_datum = ps.stage_points - q.series.observed_count();
        const DailySeries daily = resample_daily(q);

        BasinRecord rec = read_forcing_csv(st.forcings_csv, st.basin_id);
        for (std::size_t d = 0; d < rec.days(); ++d) {
            const auto idx = rec.date(d) - daily.start;
            if (idx < 0 || std::size_t(idx) >= daily.series.size()) continue;
            if (daily.series.observed[std::size_t(idx)]) {
                rec.discharge.values[d] = daily.series.values[std::size_t(idx)];
                rec.discharge.observed[d] = 1;
                ++ps.observed_days;
            }
        }
        const auto it = statics.find(st.basin_id);
        if (it == statics.end()) throw SchemaError("basin '" + st.basin_id + "' has no static attribute row");
        rec.static_attributes = it->second;
        basins.push_back(std::move(rec));
        out.stations.push_back(ps);
    }
    out.dataset = make_domain(config.role, config.static_schema, std::move(basins), config.train_range,
                              config.test_range);
    out.dataset.units = {{"discharge", "m3/s"}, {"stage", "m"}};
    return out;
}

nlohmann::json prepared_stations_json(const std::vector<PreparedStation>& stations) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : stations) {
        arr.push_back({{"basin_id", s.basin_id},
                       {"a", s.curve.a},
                       {"b", s.curve.b},
                       {"h0", s.curve.h0},
                       {"stage_points", s.stage_points},
                       {"below_datum", s.below_datum},
                       {"observed_days", s.observed_days}});
    }
    return arr;
}

void write_prepared_dataset(const DomainDataset& dataset, const fs::path& dir) {
    save_domain(dataset, dir);
    const auto report = availability_report(dataset);
    csv::write_file(dir / "availability.csv", availability_csv(report));
    csv::write_file(dir / "gaps.csv", gaps_csv(report));
    csv::write_file(dir / "availability_heatmap.csv", heatmap_csv(dataset));
}

}  // namespace streamflow
