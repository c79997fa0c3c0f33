#include "streamflow/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "streamflow/errors.hpp"
#include "streamflow/metrics.hpp"
#include "streamflow/samples.hpp"

namespace streamflow {

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::lstm: return "LSTM";
        case Variant::lstm_sca: return "LSTM_SCA";
        case Variant::lstm_tl: return "LSTM_TL";
        case Variant::lstm_tl_sca: return "LSTM_TL_SCA";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : all_variants()) {
        if (variant_name(v) == name) return v;
    }
    if (name == "LSTM_TL+SCA") return Variant::lstm_tl_sca;
    throw ConfigError("unknown variant '" + std::string(name) + "' (LSTM, LSTM_SCA, LSTM_TL, LSTM_TL_SCA)");
}

std::vector<Variant> all_variants() { return {Variant::lstm, Variant::lstm_sca, Variant::lstm_tl, Variant::lstm_tl_sca}; }
bool is_transfer(Variant v) { return v == Variant::lstm_tl || v == Variant::lstm_tl_sca; }
bool uses_static(Variant v) { return v == Variant::lstm_sca || v == Variant::lstm_tl_sca; }

std::string_view basin_selection_name(BasinSelection s) {
    return s == BasinSelection::off ? "off" : "below_half_median";
}

BasinSelection parse_basin_selection(std::string_view name) {
    if (name == "off") return BasinSelection::off;
    if (name == "below_half_median" || name == "on") return BasinSelection::below_half_median;
    throw ConfigError("unknown basin selection '" + std::string(name) + "' (off, below_half_median)");
}

nlohmann::json transfer_config_to_json(const TransferConfig& c) {
    return {{"variant", variant_name(c.variant)},
            {"freeze_representation", c.freeze_representation},
            {"head_seed", c.head_seed},
            {"finetune", train_config_to_json(c.finetune)},
            {"basin_selection", basin_selection_name(c.basin_selection)},
            {"selection_epochs", c.selection_epochs},
            {"reuse_source_norm", c.reuse_source_norm}};
}

TransferConfig transfer_config_from_json(const nlohmann::json& j, TransferConfig c) {
    if (!j.is_object()) throw ConfigError("transfer config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "variant") c.variant = parse_variant(value.get<std::string>());
            else if (key == "freeze_representation") c.freeze_representation = value.get<bool>();
            else if (key == "head_seed") c.head_seed = value.get<std::uint64_t>();
            else if (key == "finetune") c.finetune = train_config_from_json(value, c.finetune);
            else if (key == "basin_selection") c.basin_selection = parse_basin_selection(value.get<std::string>());
            else if (key == "selection_epochs") c.selection_epochs = value.get<std::size_t>();
            else if (key == "reuse_source_norm") c.reuse_source_norm = value.get<bool>();
            else throw ConfigError("unknown transfer config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("transfer config: ") + e.what());
    }
    return c;
}

std::string select_lagging_basin(const std::map<std::string, double>& per_basin_nse, std::uint64_t seed) {
    if (per_basin_nse.empty()) throw InsufficientDataError("basin selection: empty NSE map");
    std::vector<std::pair<std::string, double>> finite;
    for (const auto& [id, v] : per_basin_nse) {
        if (std::isfinite(v)) finite.emplace_back(id, v);
    }
    if (finite.size() < 2) throw InsufficientDataError("basin selection: needs at least two basins with finite NSE");
    std::vector<double> values;
    for (const auto& e : finite) values.push_back(e.second);
    const double median = summarize(values).median;
    const double threshold = median > 0.0 ? 0.5 * median : median;
    std::vector<std::string> candidates;
    for (const auto& [id, v] : finite) {
        if (v < threshold) candidates.push_back(id);
    }
    if (candidates.empty()) {
        // map order is lexicographic, so the first minimum wins ties
        auto best = finite.begin();
        for (auto it = finite.begin(); it != finite.end(); ++it) {
            if (it->second < best->second) best = it;
        }
        return best->first;
    }
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x1A66u};
    std::mt19937_64 rng(seq);
    return candidates[rng() % candidates.size()];
}

Checkpoint to_checkpoint(const DomainModel& m, nlohmann::json extra) {
    extra["norm_stats"] = norm_stats_to_json(m.norm);
    extra["static_schema"] = m.static_schema;
    extra["selected_basin"] = m.selected_basin ? nlohmann::json(*m.selected_basin) : nlohmann::json(nullptr);
    return {m.params, std::move(extra)};
}

DomainModel from_checkpoint(const Checkpoint& c) {
    DomainModel m(c.params.config());
    m.params = c.params;
    m.representation_hash = representation_hash(c.params);
    try {
        if (!c.metadata.contains("norm_stats") || !c.metadata.contains("static_schema")) {
            throw DataError("checkpoint lacks norm_stats/static_schema metadata");
        }
        m.norm = norm_stats_from_json(c.metadata.at("norm_stats"));
        m.static_schema = c.metadata.at("static_schema").get<std::vector<std::string>>();
        if (c.metadata.contains("selected_basin") && c.metadata.at("selected_basin").is_string()) {
            m.selected_basin = c.metadata.at("selected_basin").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint metadata: ") + e.what());
    }
    return m;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(salt)};
    std::mt19937_64 rng(seq);
    return rng();
}

}  // namespace

SourceRun train_domain(const ModelConfig& model_config, const DomainDataset& dataset, const TrainConfig& train_config,
                       const TransferConfig& transfer_config) {
    train_config.validate();
    const ModelConfig config = config_for_dataset(dataset, model_config, model_config.use_static);
    SourceRun out(config);

    auto [train_ids, val_ids] = split_validation_basins(dataset, train_config.validation_fraction, train_config.seed);
    out.train_basins = train_ids;
    out.validation_basins = val_ids;

    SampleOptions opts;
    opts.nse_epsilon = train_config.nse_epsilon;
    const SampleSet all = make_samples(dataset, RangeKind::train, config, opts);
    const SampleSet train_set = val_ids.empty() ? all : all.restricted_to(train_ids);
    const SampleSet val_set = all.restricted_to(val_ids);

    TrainOptions topts;
    if (!val_set.empty()) topts.validation = &val_set;
    out.run = train(config, train_set, train_config, topts);
    if (out.run.status == RunStatus::diverged) {
        throw DivergenceError("training diverged: " + out.run.message);
    }
    ParameterSet params = out.run.final_params;
    if (train_config.keep_best && out.run.best_params) params = *out.run.best_params;

    if (!val_set.empty()) out.validation_nse = evaluate(params, val_set).nse_map();

    if (transfer_config.basin_selection == BasinSelection::below_half_median) {
        std::map<std::string, double> scores = out.validation_nse;
        if (scores.size() < 2) scores = evaluate(params, all).nse_map();
        const std::string chosen = select_lagging_basin(scores, derive_seed(train_config.seed, 0x5E1));
        out.model.selected_basin = chosen;
        const std::vector<std::string> one{chosen};
        const SampleSet basin_set = all.restricted_to(one);
        out.selection_basin_samples = basin_set.size();
        if (!basin_set.empty() && transfer_config.selection_epochs > 0) {
            TrainConfig sel = train_config;
            sel.epochs = transfer_config.selection_epochs;
            sel.lr_first_epoch = train_config.lr_rest;
            sel.samples_per_epoch = 0;
            sel.keep_best = false;
            sel.seed = derive_seed(train_config.seed, 0x5E2);
            TrainOptions sopts;
            sopts.initial = params;
            TrainingRun sr = train(config, basin_set, sel, sopts);
            if (sr.status == RunStatus::diverged) throw DivergenceError("selection pass diverged: " + sr.message);
            out.selection_samples = sr.samples_seen;
            params = sr.final_params;
            out.selection_run = std::move(sr);
        }
    }

    out.model.params = params;
    out.model.norm = dataset.norm_stats;
    out.model.static_schema = dataset.static_schema;
    out.model.representation_hash = representation_hash(params);
    return out;
}

SourceRun pretrain_source(const ModelConfig& model_config, const DomainDataset& source, const TrainConfig& train_config,
                          const TransferConfig& transfer_config) {
    if (source.role != DomainRole::source) throw ConfigError("pretraining requires a source-role dataset");
    return train_domain(model_config, source, train_config, transfer_config);
}

void check_schema_compatible(const std::vector<std::string>& source, const std::vector<std::string>& target,
                             bool with_static) {
    if (!with_static) return;
    if (source == target) return;
    std::string msg = "static attribute schema mismatch:";
    const std::size_t n = std::max(source.size(), target.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string a = i < source.size() ? source[i] : "<none>";
        const std::string b = i < target.size() ? target[i] : "<none>";
        if (a != b) msg += " [" + std::to_string(i) + "] source '" + a + "' vs target '" + b + "';";
    }
    throw SchemaError(msg);
}

TransferRun transfer_and_finetune(const DomainModel& source, const DomainDataset& target,
                                  const TransferConfig& config) {
    const ModelConfig& mc = source.config();
    check_schema_compatible(source.static_schema, target.static_schema, mc.use_static);
    if (mc.use_static && mc.static_dim != target.static_schema.size()) {
        throw SchemaError("source model expects " + std::to_string(mc.static_dim) + " static attributes, target has " +
                          std::to_string(target.static_schema.size()));
    }
    if (representation_hash(source.params) != source.representation_hash) {
        throw DataError("lineage check failed: source parameters do not match the recorded representation hash");
    }

    TransferRun out(mc);
    out.source_representation_hash = source.representation_hash;
    out.selected_basin = source.selected_basin;
    const ParameterSet handoff = swap_head(source.params, config.head_seed);
    out.handoff_representation_hash = representation_hash(handoff);
    if (out.handoff_representation_hash != out.source_representation_hash) {
        throw NumericalError("lineage check failed: head swap altered the representation");
    }

    const NormStats& norm = config.reuse_source_norm ? source.norm : target.norm_stats;
    SampleOptions opts;
    opts.norm = &norm;
    opts.nse_epsilon = config.finetune.nse_epsilon;
    const SampleSet train_set = make_samples(target, RangeKind::train, mc, opts);

    TrainConfig ft = config.finetune;
    ft.freeze_representation = ft.freeze_representation || config.freeze_representation;
    TrainOptions topts;
    topts.initial = handoff;
    if (ft.freeze_representation) {
        topts.on_epoch = [&](const EpochRecord&, const ParameterSet& p) {
            if (!bitwise_equal(p.representation(), handoff.representation())) out.frozen_representation_intact = false;
        };
    }
    out.target_run = train(mc, train_set, ft, topts);
    if (out.target_run.status == RunStatus::diverged) {
        throw DivergenceError("fine-tuning diverged: " + out.target_run.message);
    }
    out.model.params = out.target_run.final_params;
    out.model.norm = norm;
    out.model.static_schema = target.static_schema;
    out.model.representation_hash = representation_hash(out.model.params);
    out.final_representation_hash = out.model.representation_hash;
    if (ft.freeze_representation && out.final_representation_hash != out.handoff_representation_hash) {
        out.frozen_representation_intact = false;
    }
    out.evaluation = evaluate(out.model.params, target, RangeKind::test, &norm);
    return out;
}

TransferRun train_scratch(const ModelConfig& model_config, const DomainDataset& target, const TrainConfig& config) {
    const ModelConfig mc = config_for_dataset(target, model_config, model_config.use_static);
    TransferRun out(mc);
    SampleOptions opts;
    opts.nse_epsilon = config.nse_epsilon;
    const SampleSet train_set = make_samples(target, RangeKind::train, mc, opts);
    out.target_run = train(mc, train_set, config);
    if (out.target_run.status == RunStatus::diverged) {
        throw DivergenceError("training diverged: " + out.target_run.message);
    }
    out.model.params = out.target_run.final_params;
    out.model.norm = target.norm_stats;
    out.model.static_schema = target.static_schema;
    out.model.representation_hash = representation_hash(out.model.params);
    out.source_representation_hash = out.handoff_representation_hash = 0;
    out.final_representation_hash = out.model.representation_hash;
    out.evaluation = evaluate(out.model.params, target, RangeKind::test, &target.norm_stats);
    return out;
}

}  // namespace streamflow
