#include <algorithm>
#include <map>
#include <sstream>

#include "streamflow/csv.hpp"
#include "streamflow/dataset.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestFormat = "streamflow-dataset";

DateRange range_from_json(const nlohmann::json& j, const char* what) {
    try {
        return {Date::parse(j.at("start").get<std::string>()), Date::parse(j.at("end").get<std::string>())};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest ") + what + ": " + e.what());
    }
}

nlohmann::json range_to_json(const DateRange& r) {
    return {{"start", r.start.to_string()}, {"end", r.end.to_string()}};
}

fs::path forcing_path(const fs::path& root, const std::string& id) { return root / "forcings" / (id + ".csv"); }
fs::path discharge_path(const fs::path& root, const std::string& id) { return root / "discharge" / (id + ".csv"); }

void expect_header(const csv::Table& t, const std::vector<std::string>& expected, const fs::path& path) {
    if (t.header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw DataError(path.string() + ": expected header '" + want + "'");
    }
}

BasinRecord read_forcings(const fs::path& fpath, const std::string& id) {
    BasinRecord rec;
    rec.basin_id = id;
    if (!fs::exists(fpath)) throw DataError("missing forcing file " + fpath.string());
    const csv::Table forcing = csv::read(fpath);
    std::vector<std::string> header{"date"};
    for (auto name : kForcingNames) header.emplace_back(name);
    expect_header(forcing, header, fpath);
    if (forcing.rows.empty()) throw DataError(fpath.string() + ": no rows");

    rec.start = Date::parse(forcing.rows.front()[0]);
    const std::size_t n = forcing.rows.size();
    rec.forcings.assign(n * kForcingDim, 0.0);
    rec.forcing_valid.assign(n, 1);
    for (std::size_t d = 0; d < n; ++d) {
        const auto& row = forcing.rows[d];
        const Date date = Date::parse(row[0]);
        if (date != rec.start + std::int64_t(d)) {
            throw DataError(fpath.string() + ": non-contiguous dates at " + row[0] + " (expected " +
                            (rec.start + std::int64_t(d)).to_string() + ")");
        }
        std::array<double, kForcingDim> vals{};
        bool valid = true;
        for (std::size_t f = 0; f < kForcingDim; ++f) {
            const auto v = csv::parse_optional_double(row[f + 1], fpath.string());
            if (!v) valid = false;
            else vals[f] = *v;
        }
        rec.forcing_valid[d] = valid ? 1 : 0;
        if (valid) std::copy(vals.begin(), vals.end(), rec.forcings.begin() + std::ptrdiff_t(d * kForcingDim));
    }

    rec.discharge.values.assign(n, 0.0);
    rec.discharge.observed.assign(n, 0);
    return rec;
}

BasinRecord read_basin(const fs::path& root, const std::string& id) {
    BasinRecord rec = read_forcings(forcing_path(root, id), id);
    const std::size_t n = rec.days();
    const auto qpath = discharge_path(root, id);
    if (!fs::exists(qpath)) throw DataError("missing discharge file " + qpath.string());
    const csv::Table q = csv::read(qpath);
    expect_header(q, {"date", "discharge"}, qpath);
    std::optional<Date> prev;
    for (const auto& row : q.rows) {
        const Date date = Date::parse(row[0]);
        if (prev && date != *prev + 1) {
            throw DataError(qpath.string() + ": non-contiguous dates at " + row[0]);
        }
        prev = date;
        const std::int64_t idx = date - rec.start;
        if (idx < 0 || idx >= std::int64_t(n)) continue;  // outside the forcing calendar
        if (const auto v = csv::parse_optional_double(row[1], qpath.string())) {
            rec.discharge.values[std::size_t(idx)] = *v;
            rec.discharge.observed[std::size_t(idx)] = 1;
        }
    }
    return rec;
}

std::map<std::string, std::vector<double>> read_static_table(const fs::path& path,
                                                             const std::vector<std::string>& schema) {
    if (!fs::exists(path)) throw DataError("missing static attribute table " + path.string());
    const csv::Table t = csv::read(path);
    if (t.header.empty() || t.header[0] != "basin_id") {
        throw SchemaError(path.string() + ": first column must be basin_id");
    }
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        if (std::find(schema.begin(), schema.end(), t.header[c]) == schema.end()) {
            throw SchemaError(path.string() + ": unknown static attribute '" + t.header[c] + "'");
        }
    }
    std::vector<std::size_t> cols;
    for (const auto& name : schema) {
        const auto c = t.column(name);
        if (!c) throw SchemaError(path.string() + ": missing static attribute '" + name + "'");
        cols.push_back(*c);
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& row : t.rows) {
        std::vector<double> attrs;
        for (std::size_t s = 0; s < schema.size(); ++s) {
            const auto v = csv::parse_optional_double(row[cols[s]], path.string());
            if (!v) {
                throw SchemaError("basin '" + row[0] + "' lacks static attribute '" + schema[s] + "'");
            }
            attrs.push_back(*v);
        }
        if (!out.emplace(row[0], std::move(attrs)).second) {
            throw DataError(path.string() + ": duplicate basin '" + row[0] + "'");
        }
    }
    return out;
}

}  // namespace

BasinRecord read_forcing_csv(const fs::path& path, const std::string& basin_id) {
    return read_forcings(path, basin_id);
}

std::map<std::string, std::vector<double>> read_static_attributes_csv(const fs::path& path,
                                                                      const std::vector<std::string>& schema) {
    return read_static_table(path, schema);
}

DomainDataset load_domain(const fs::path& root, const SchemaConfig& schema) {
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path)) throw DataError("missing dataset manifest " + manifest_path.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(csv::read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse " + manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("format", std::string{}) != kManifestFormat) {
        throw DataError(manifest_path.string() + ": not a streamflow dataset manifest");
    }
    if (manifest.value("format_version", 0) != kDatasetFormatVersion) {
        throw DataError(manifest_path.string() + ": unsupported format_version");
    }
    const DomainRole role = parse_role(manifest.value("role", std::string{"source"}));

    if (manifest.contains("static_attributes")) {
        const auto listed = manifest.at("static_attributes").get<std::vector<std::string>>();
        if (listed != schema.static_schema) {
            for (const auto& name : schema.static_schema) {
                if (std::find(listed.begin(), listed.end(), name) == listed.end()) {
                    throw SchemaError("manifest lacks static attribute '" + name + "'");
                }
            }
            for (const auto& name : listed) {
                if (std::find(schema.static_schema.begin(), schema.static_schema.end(), name) ==
                    schema.static_schema.end()) {
                    throw SchemaError("manifest lists unknown static attribute '" + name + "'");
                }
            }
        }
    }

    const DateRange train = schema.train_range ? *schema.train_range
                            : manifest.contains("train_range") ? range_from_json(manifest.at("train_range"), "train_range")
                                                               : default_train_range(role);
    const DateRange test = schema.test_range ? *schema.test_range
                           : manifest.contains("test_range") ? range_from_json(manifest.at("test_range"), "test_range")
                                                             : default_test_range(role);

    const auto statics = read_static_table(root / "static_attributes.csv", schema.static_schema);
    std::vector<std::string> ids;
    if (manifest.contains("basins")) {
        ids = manifest.at("basins").get<std::vector<std::string>>();
    } else {
        for (const auto& [id, _] : statics) ids.push_back(id);
    }

    std::vector<BasinRecord> basins;
    for (const auto& id : ids) {
        const auto it = statics.find(id);
        if (it == statics.end()) throw SchemaError("basin '" + id + "' has no static attribute row");
        BasinRecord rec = read_basin(root, id);
        rec.static_attributes = it->second;
        basins.push_back(std::move(rec));
    }
    DomainDataset ds = make_domain(role, schema.static_schema, std::move(basins), train, test);
    ds.units = manifest.value("units", nlohmann::json::object());
    return ds;
}

void save_domain(const DomainDataset& dataset, const fs::path& root) {
    fs::create_directories(root / "forcings");
    fs::create_directories(root / "discharge");

    nlohmann::json manifest;
    manifest["format"] = kManifestFormat;
    manifest["format_version"] = kDatasetFormatVersion;
    manifest["role"] = std::string(role_name(dataset.role));
    manifest["train_range"] = range_to_json(dataset.train_range);
    manifest["test_range"] = range_to_json(dataset.test_range);
    manifest["static_attributes"] = dataset.static_schema;
    manifest["basins"] = dataset.basin_ids();
    manifest["units"] = dataset.units;
    csv::write_file(root / "manifest.json", manifest.dump(2) + "\n");

    std::ostringstream st;
    st << "basin_id";
    for (const auto& name : dataset.static_schema) st << ',' << name;
    st << '\n';
    for (const auto& b : dataset.basins) {
        st << b.basin_id;
        for (double v : b.static_attributes) st << ',' << csv::format_double(v);
        st << '\n';
    }
    csv::write_file(root / "static_attributes.csv", st.str());

    for (const auto& b : dataset.basins) {
        std::ostringstream f;
        f << "date";
        for (auto name : kForcingNames) f << ',' << name;
        f << '\n';
        std::ostringstream q;
        q << "date,discharge\n";
        for (std::size_t d = 0; d < b.days(); ++d) {
            const std::string date = b.date(d).to_string();
            f << date;
            for (double v : b.forcing_row(d)) {
                f << ',';
                if (b.forcing_valid[d]) f << csv::format_double(v);
            }
            f << '\n';
            q << date << ',';
            if (b.discharge.is_observed(d)) q << csv::format_double(b.discharge.values[d]);
            q << '\n';
        }
        csv::write_file(forcing_path(root, b.basin_id), f.str());
        csv::write_file(discharge_path(root, b.basin_id), q.str());
    }
}

}  // namespace streamflow
