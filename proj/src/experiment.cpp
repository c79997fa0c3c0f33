#include "streamflow/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <unordered_set>

#include "streamflow/checkpoint.hpp"
#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {

namespace fs = std::filesystem;

DomainDataset DomainSource::load() const {
    DomainDataset d;
    if (path) {
        d = load_domain(*path, schema);
    } else if (synthetic) {
        d = generate_synthetic_family(*synthetic);
    } else {
        throw ConfigError("domain needs either 'path' or 'synthetic'");
    }
    if (gap_fraction > 0.0) d = inject_gaps(d, gap_seed, gap_fraction);
    return d;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("experiment: seed list must not be empty");
    if (jobs == 0) throw ConfigError("experiment: jobs must be >= 1");
    if (variants.empty()) throw ConfigError("experiment: at least one variant is required");
    for (const auto* d : {&source, &target}) {
        if (!*d) continue;
        if ((*d)->path && !fs::exists(*(*d)->path)) {
            throw ConfigError("dataset path does not exist: " + (*d)->path->string());
        }
        if (!((*d)->gap_fraction >= 0.0 && (*d)->gap_fraction < 1.0)) {
            throw ConfigError("gap_fraction must lie in [0, 1)");
        }
    }
    model.validate();
    source_train.validate();
    target_train.validate();
}

SuiteConfig ExperimentConfig::suite_config() const {
    SuiteConfig s;
    s.model = model;
    s.source_train = source_train;
    s.target_train = target_train;
    s.transfer = transfer;
    s.variants = variants;
    s.seeds = seeds;
    s.jobs = jobs;
    return s;
}

fs::path data_root_or(const fs::path& fallback) {
    if (const char* env = std::getenv("STREAMFLOW_DATA_ROOT"); env && *env) return fs::path(env);
    return fallback;
}

namespace {

fs::path resolve(const fs::path& p, const fs::path& root) { return p.is_absolute() ? p : root / p; }

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown " + where + " key '" + key + "'");
    }
}

DomainSource domain_from_json(const nlohmann::json& j, const fs::path& root, DomainRole role) {
    if (!j.is_object()) throw ConfigError("domain entry must be an object");
    reject_unknown(j, {"path", "synthetic", "gap_fraction", "gap_seed", "static_attributes", "train_range", "test_range"},
                   "domain");
    DomainSource d;
    if (j.contains("path") == j.contains("synthetic")) {
        throw ConfigError("domain needs exactly one of 'path' or 'synthetic'");
    }
    if (j.contains("path")) d.path = resolve(j.at("path").get<std::string>(), root);
    if (j.contains("synthetic")) {
        nlohmann::json spec = j.at("synthetic");
        if (!spec.contains("role")) spec["role"] = std::string(role_name(role));
        d.synthetic = synthetic_spec_from_json(spec);
    }
    d.gap_fraction = j.value("gap_fraction", 0.0);
    d.gap_seed = j.value("gap_seed", std::uint64_t{0});
    if (j.contains("static_attributes")) d.schema.static_schema = j.at("static_attributes").get<std::vector<std::string>>();
    auto range = [](const nlohmann::json& r) {
        return DateRange{Date::parse(r.at("start").get<std::string>()), Date::parse(r.at("end").get<std::string>())};
    };
    if (j.contains("train_range")) d.schema.train_range = range(j.at("train_range"));
    if (j.contains("test_range")) d.schema.test_range = range(j.at("test_range"));
    return d;
}

nlohmann::json domain_to_json(const DomainSource& d) {
    nlohmann::json j;
    if (d.path) j["path"] = d.path->string();
    if (d.synthetic) j["synthetic"] = synthetic_spec_to_json(*d.synthetic);
    j["gap_fraction"] = d.gap_fraction;
    j["gap_seed"] = d.gap_seed;
    return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const fs::path& data_root) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    reject_unknown(j, {"source", "target", "model", "source_train", "target_train", "train", "transfer", "variants",
                       "seeds", "jobs", "output"},
                   "experiment");
    ExperimentConfig c;
    try {
        if (j.contains("source")) c.source = domain_from_json(j.at("source"), data_root, DomainRole::source);
        if (j.contains("target")) c.target = domain_from_json(j.at("target"), data_root, DomainRole::target);
        if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
        if (j.contains("train")) c.source_train = c.target_train = train_config_from_json(j.at("train"));
        if (j.contains("source_train")) c.source_train = train_config_from_json(j.at("source_train"), c.source_train);
        if (j.contains("target_train")) c.target_train = train_config_from_json(j.at("target_train"), c.target_train);
        if (j.contains("transfer")) c.transfer = transfer_config_from_json(j.at("transfer"), c.transfer);
        if (j.contains("variants")) {
            c.variants.clear();
            for (const auto& v : j.at("variants")) c.variants.push_back(parse_variant(v.get<std::string>()));
        }
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("jobs")) c.jobs = j.at("jobs").get<std::size_t>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + file.string() + ": " + e.what());
    }
    return experiment_config_from_json(j, data_root_or(file.parent_path()));
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
    nlohmann::json j = suite_config_to_json(c.suite_config());
    if (c.source) j["source"] = domain_to_json(*c.source);
    if (c.target) j["target"] = domain_to_json(*c.target);
    j["jobs"] = c.jobs;
    j["output"] = c.output.string();
    return j;
}

}  // namespace streamflow
