#include "streamflow/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "streamflow/checkpoint.hpp"
#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/experiment.hpp"
#include "streamflow/kernels.hpp"
#include "streamflow/prepare.hpp"

namespace streamflow {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
        dynamic_cast<const InsufficientDataError*>(&e) || dynamic_cast<const DegenerateVarianceError*>(&e)) {
        return kExitData;
    }
    return kExitFailure;
}

namespace {

struct Options {
    std::string config;
    std::string output;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 0;
    std::vector<std::string> variants;
    bool freeze = false;
    std::string basin_selection;
    std::string checkpoint;
    std::string train_domain = "source";
    std::string eval_domain = "target";
    std::string range = "test";
};

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open config file: " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + p.string() + ": " + e.what());
    }
}

void write_metadata(const fs::path& dir, const std::string& command, const std::vector<std::string>& args) {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    nlohmann::json j{{"command", command},
                     {"args", args},
                     {"created_utc", format_timestamp(std::chrono::duration_cast<std::chrono::seconds>(
                                                          now.time_since_epoch())
                                                          .count())},
                     {"kernel_backend", std::string(kernels::backend_name(kernels::active_backend()))}};
    csv::write_file(dir / "run_metadata.json", j.dump(2) + "\n");
}

ExperimentConfig load_config(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    ExperimentConfig c = load_experiment_config(o.config);
    if (!o.seeds.empty()) c.seeds = o.seeds;
    if (o.jobs > 0) c.jobs = o.jobs;
    if (!o.output.empty()) c.output = o.output;
    if (!o.variants.empty()) {
        c.variants.clear();
        for (const auto& v : o.variants) c.variants.push_back(parse_variant(v));
    }
    if (o.freeze) c.transfer.freeze_representation = true;
    if (!o.basin_selection.empty()) c.transfer.basin_selection = parse_basin_selection(o.basin_selection);
    c.validate();
    return c;
}

const DomainSource& require_domain(const ExperimentConfig& c, const std::string& which) {
    if (which == "source") {
        if (!c.source) throw ConfigError("config has no 'source' domain");
        return *c.source;
    }
    if (which == "target") {
        if (!c.target) throw ConfigError("config has no 'target' domain");
        return *c.target;
    }
    throw ConfigError("--domain must be 'source' or 'target'");
}

void write_evaluation(const fs::path& dir, const EvaluationResult& r, nlohmann::json extra, std::ostream& err) {
    csv::write_file(dir / "per_basin_nse.csv", per_basin_nse_csv(r));
    extra["summary"] = r.summary ? summary_to_json(*r.summary) : nlohmann::json(nullptr);
    extra["excluded"] = r.excluded;
    extra["warnings"] = r.warnings;
    csv::write_file(dir / "summary.json", extra.dump(2) + "\n");
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
}

int cmd_prepare(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    if (o.config.empty()) throw ConfigError("--config is required");
    if (o.output.empty()) throw ConfigError("--output is required");
    const fs::path cfg_path(o.config);
    const nlohmann::json j = read_json(cfg_path);
    const fs::path root = data_root_or(cfg_path.parent_path());
    const fs::path dir(o.output);
    if (j.contains("synthetic")) {
        SyntheticSpec spec = synthetic_spec_from_json(j.at("synthetic"));
        if (!o.seeds.empty()) spec.seed = o.seeds.front();
        DomainDataset d = generate_synthetic_family(spec);
        const double gaps = j.value("gap_fraction", 0.0);
        if (gaps > 0.0) d = inject_gaps(d, j.value("gap_seed", std::uint64_t{0}), gaps);
        write_prepared_dataset(d, dir);
        out << "wrote synthetic " << role_name(d.role) << " dataset with " << d.basins.size() << " basins to "
            << dir.string() << '\n';
    } else if (j.contains("gauges")) {
        const PrepareResult r = prepare_from_gauges(gauge_config_from_json(j.at("gauges"), root));
        write_prepared_dataset(r.dataset, dir);
        csv::write_file(dir / "rating_curves.json", prepared_stations_json(r.stations).dump(2) + "\n");
        out << "wrote " << r.dataset.basins.size() << " gauge basins to " << dir.string() << '\n';
    } else {
        throw ConfigError("prepare config needs 'synthetic' or 'gauges'");
    }
    write_metadata(dir, "prepare", args);
    return kExitOk;
}

int cmd_train(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    const ExperimentConfig c = load_config(o);
    const std::string& which = o.train_domain;
    const DomainDataset d = require_domain(c, which).load();
    const Variant v = o.variants.empty() ? Variant::lstm : parse_variant(o.variants.front());
    ModelConfig mc = c.model;
    mc.use_static = uses_static(v);
    TrainConfig tc = which == "source" ? c.source_train : c.target_train;
    tc.seed = c.seeds.front();
    const SourceRun run = train_domain(mc, d, tc, c.transfer);
    const fs::path dir = c.output;
    const nlohmann::json extra{{"seed", tc.seed}, {"variant", variant_name(v)}, {"domain", which}};
    save_checkpoint(dir / "checkpoint_final.json", to_checkpoint(run.model, extra));
    if (run.run.best_params) {
        DomainModel best = run.model;
        best.params = *run.run.best_params;
        best.representation_hash = representation_hash(best.params);
        save_checkpoint(dir / "checkpoint_best.json", to_checkpoint(best, extra));
    }
    csv::write_file(dir / "training_log.jsonl", training_log_jsonl(run.run));
    nlohmann::json info{{"train_basins", run.train_basins},
                        {"validation_basins", run.validation_basins},
                        {"validation_nse", run.validation_nse},
                        {"selected_basin", run.model.selected_basin ? nlohmann::json(*run.model.selected_basin)
                                                                    : nlohmann::json(nullptr)},
                        {"selection_samples", run.selection_samples},
                        {"representation_hash", hash_hex(run.model.representation_hash)},
                        {"epochs_completed", run.run.history.size()}};
    csv::write_file(dir / "train_summary.json", info.dump(2) + "\n");
    write_metadata(dir, "train", args);
    out << "trained " << run.run.history.size() << " epochs; checkpoint " << (dir / "checkpoint_final.json").string()
        << '\n';
    return kExitOk;
}

int cmd_transfer(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (o.checkpoint.empty()) throw ConfigError("--checkpoint (source model) is required");
    const ExperimentConfig c = load_config(o);
    const DomainModel source = from_checkpoint(load_checkpoint(o.checkpoint));
    const DomainDataset target = require_domain(c, "target").load();
    TransferConfig tc = c.transfer;
    tc.variant = source.config().use_static ? Variant::lstm_tl_sca : Variant::lstm_tl;
    tc.finetune = c.target_train;
    tc.finetune.seed = c.seeds.front();
    if (!c.transfer.head_seed) tc.head_seed = c.seeds.front();
    const TransferRun r = transfer_and_finetune(source, target, tc);
    const fs::path dir = c.output;
    save_checkpoint(dir / "checkpoint_final.json", to_checkpoint(r.model, {{"seed", tc.finetune.seed}}));
    csv::write_file(dir / "training_log.jsonl", training_log_jsonl(r.target_run));
    const nlohmann::json lineage{{"source_representation_hash", hash_hex(r.source_representation_hash)},
                                 {"handoff_representation_hash", hash_hex(r.handoff_representation_hash)},
                                 {"final_representation_hash", hash_hex(r.final_representation_hash)},
                                 {"freeze_representation", tc.freeze_representation},
                                 {"frozen_representation_intact", r.frozen_representation_intact},
                                 {"variant", variant_name(tc.variant)}};
    write_evaluation(dir, r.evaluation, lineage, err);
    write_metadata(dir, "transfer", args);
    out << "fine-tuned on " << target.basins.size() << " target basins; median test NSE "
        << (r.evaluation.summary ? csv::format_double(r.evaluation.summary->median) : std::string("n/a")) << '\n';
    return kExitOk;
}

int cmd_evaluate(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
    const ExperimentConfig c = load_config(o);
    const DomainModel m = from_checkpoint(load_checkpoint(o.checkpoint));
    const DomainDataset d = require_domain(c, o.eval_domain).load();
    check_schema_compatible(m.static_schema, d.static_schema, m.config().use_static);
    RangeKind range;
    if (o.range == "test") range = RangeKind::test;
    else if (o.range == "train") range = RangeKind::train;
    else throw ConfigError("--range must be 'train' or 'test'");
    const EvaluationResult r = evaluate(m.params, d, range, &m.norm);
    const fs::path dir = c.output;
    write_evaluation(dir, r, {{"range", o.range}, {"domain", o.eval_domain}}, err);
    write_metadata(dir, "evaluate", args);
    out << "evaluated " << r.scores.size() << " basins\n";
    return kExitOk;
}

int cmd_suite(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    const ExperimentConfig c = load_config(o);
    const DomainDataset target = require_domain(c, "target").load();
    bool need_source = false;
    for (auto v : c.variants) need_source = need_source || is_transfer(v);
    const DomainDataset source = need_source ? require_domain(c, "source").load() : DomainDataset{};
    const SuiteConfig sc = c.suite_config();
    const SuiteResult r = run_variant_suite(sc, source, target);
    write_suite_outputs(r, sc, target, c.output);
    write_metadata(c.output, "suite", args);
    out << table_csv(r);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Streamflow LSTM training and transfer toolkit"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Experiment or prepare configuration (JSON)");
        sub->add_option("--output", o.output, "Output directory");
        sub->add_option("--seed,--seeds", o.seeds, "Seed list")->delimiter(',');
    };
    auto* prepare = app.add_subcommand("prepare", "Build a dataset directory (synthetic family or gauge pipeline)");
    add_common(prepare);
    auto* train = app.add_subcommand("train", "Train on one domain and write a checkpoint");
    add_common(train);
    train->add_option("--variant", o.variants, "LSTM or LSTM_SCA (static inputs)");
    train->add_option("--domain", o.train_domain, "source or target");
    train->add_option("--basin-selection", o.basin_selection, "off or below_half_median");
    auto* transfer = app.add_subcommand("transfer", "Fine-tune a source checkpoint on the target domain");
    add_common(transfer);
    transfer->add_option("--checkpoint", o.checkpoint, "Source checkpoint");
    transfer->add_flag("--freeze-representation", o.freeze, "Train only the new head");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-basin NSE of a checkpoint");
    add_common(evaluate_cmd);
    evaluate_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate");
    evaluate_cmd->add_option("--domain", o.eval_domain, "source or target (default target)");
    evaluate_cmd->add_option("--range", o.range, "train or test (default test)");
    auto* suite = app.add_subcommand("suite", "Variant x seed comparison");
    add_common(suite);
    suite->add_option("--jobs", o.jobs, "Concurrent cells");
    suite->add_option("--variant", o.variants, "Variants to run (default all)")->delimiter(',');
    suite->add_flag("--freeze-representation", o.freeze, "Frozen fine-tuning for TL variants");
    suite->add_option("--basin-selection", o.basin_selection, "off or below_half_median");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*prepare) return cmd_prepare(o, args, out);
        if (*train) return cmd_train(o, args, out);
        if (*transfer) return cmd_transfer(o, args, out, err);
        if (*evaluate_cmd) return cmd_evaluate(o, args, out, err);
        if (*suite) return cmd_suite(o, args, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitFailure;
}

}  // namespace streamflow
