#include "streamflow/checkpoint.hpp"

#include <algorithm>
#include <cmath>

#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

constexpr const char* kFormatTag = "streamflow-checkpoint";

std::size_t get_size(const nlohmann::json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(std::string("model.") + key + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"dynamic_dim", c.dynamic_dim},         {"static_dim", c.static_dim},
            {"hidden_dim", c.hidden_dim},           {"num_layers", c.num_layers},
            {"sequence_length", c.sequence_length}, {"use_static", c.use_static},
            {"input_dim", c.input_dim()}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    static const char* known[] = {"dynamic_dim", "static_dim",      "hidden_dim", "num_layers",
                                  "sequence_length", "use_static", "input_dim"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError("unknown model config key '" + key + "'");
        }
    }
    ModelConfig c;
    c.dynamic_dim = get_size(j, "dynamic_dim", c.dynamic_dim);
    c.static_dim = get_size(j, "static_dim", c.static_dim);
    c.hidden_dim = get_size(j, "hidden_dim", c.hidden_dim);
    c.num_layers = get_size(j, "num_layers", c.num_layers);
    c.sequence_length = get_size(j, "sequence_length", c.sequence_length);
    if (j.contains("use_static")) c.use_static = j.at("use_static").get<bool>();
    c.validate();
    if (j.contains("input_dim") && get_size(j, "input_dim", 0) != c.input_dim()) {
        throw ConfigError("model.input_dim disagrees with dynamic_dim/static_dim/use_static");
    }
    return c;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
    nlohmann::json j;
    j["format"] = kFormatTag;
    j["format_version"] = kCheckpointFormatVersion;
    j["config"] = model_config_to_json(ckpt.params.config());
    j["parameter_count"] = ckpt.params.size();
    j["representation_hash"] = hash_hex(representation_hash(ckpt.params));
    j["parameters"] = ckpt.params.flatten();
    j["metadata"] = ckpt.metadata;
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", std::string{}) != kFormatTag) {
        throw DataError("not a streamflow checkpoint");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
        throw DataError("unsupported checkpoint format_version " + std::to_string(version));
    }
    const ModelConfig config = model_config_from_json(j.at("config"));
    const auto flat = j.at("parameters").get<std::vector<double>>();
    if (j.contains("parameter_count") && j.at("parameter_count").get<std::size_t>() != flat.size()) {
        throw DataError("checkpoint parameter_count disagrees with stored parameters");
    }
    Checkpoint ckpt{ParameterSet::unflatten(config, flat), j.value("metadata", nlohmann::json::object())};
    if (j.contains("representation_hash") &&
        j.at("representation_hash").get<std::string>() != hash_hex(representation_hash(ckpt.params))) {
        throw DataError("checkpoint representation hash mismatch (file corrupted?)");
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    for (double v : ckpt.params.values()) {
        if (!std::isfinite(v)) throw NumericalError("refusing to checkpoint non-finite parameters");
    }
    csv::write_file(path, checkpoint_to_json(ckpt).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("checkpoint not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse checkpoint " + path.string() + ": " + e.what());
    }
    try {
        return checkpoint_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace streamflow
