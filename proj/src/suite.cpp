#include "streamflow/suite.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"

namespace streamflow {

namespace {

std::uint64_t head_seed_for(std::uint64_t seed) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x4EADu};
    std::mt19937_64 rng(seq);
    return rng();
}

CellResult run_cell(const SuiteConfig& config, const DomainDataset& source, const DomainDataset& target, Variant v,
                    std::uint64_t seed) {
    CellResult cell;
    cell.variant = v;
    cell.seed = seed;
    ModelConfig mc = config.model;
    mc.use_static = uses_static(v);
    TrainConfig target_train = config.target_train;
    target_train.seed = seed;

    if (is_transfer(v)) {
        TrainConfig source_train = config.source_train;
        source_train.seed = seed;
        TransferConfig tc = config.transfer;
        tc.variant = v;
        tc.finetune = target_train;
        tc.head_seed = head_seed_for(seed);
        SourceRun src = pretrain_source(mc, source, source_train, tc);
        TransferRun tr = transfer_and_finetune(src.model, target, tc);
        cell.source_history = src.run.history;
        cell.selected_basin = src.model.selected_basin;
        cell.source_representation_hash = tr.source_representation_hash;
        cell.handoff_representation_hash = tr.handoff_representation_hash;
        cell.final_representation_hash = tr.final_representation_hash;
        cell.lineage_ok = tr.source_representation_hash == tr.handoff_representation_hash;
        cell.frozen_intact = tr.frozen_representation_intact;
        cell.target_history = tr.target_run.history;
        cell.evaluation = std::move(tr.evaluation);
        cell.checkpoint = to_checkpoint(tr.model, {{"variant", variant_name(v)}, {"seed", seed}});
    } else {
        TransferRun tr = train_scratch(mc, target, target_train);
        cell.target_history = tr.target_run.history;
        cell.final_representation_hash = tr.final_representation_hash;
        cell.evaluation = std::move(tr.evaluation);
        cell.checkpoint = to_checkpoint(tr.model, {{"variant", variant_name(v)}, {"seed", seed}});
    }
    return cell;
}

std::string cell_dir_name(Variant v, std::uint64_t seed) {
    return std::string(variant_name(v)) + "_seed" + std::to_string(seed);
}

}  // namespace

const CellResult& SuiteResult::cell(Variant v, std::uint64_t seed) const {
    for (const auto& c : cells) {
        if (c.variant == v && c.seed == seed) return c;
    }
    throw ConfigError("no suite cell for " + std::string(variant_name(v)) + " seed " + std::to_string(seed));
}

const VariantResult& SuiteResult::variant(Variant v) const {
    for (const auto& r : variants) {
        if (r.variant == v) return r;
    }
    throw ConfigError("variant " + std::string(variant_name(v)) + " not in suite");
}

SeedAggregate aggregate_over_seeds(const std::vector<std::optional<NseSummary>>& per_seed) {
    SeedAggregate a;
    std::vector<double> medians;
    for (const auto& s : per_seed) {
        if (!s) continue;
        a.median += s->median;
        a.mean += s->mean;
        a.max += s->max;
        a.min += s->min;
        a.std += s->std;
        a.count_positive += double(s->count_positive);
        medians.push_back(s->median);
    }
    a.seeds = medians.size();
    if (a.seeds == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        a.median = a.mean = a.max = a.min = a.std = a.count_positive = a.median_std = nan;
        return a;
    }
    const double n = double(a.seeds);
    a.median /= n;
    a.mean /= n;
    a.max /= n;
    a.min /= n;
    a.std /= n;
    a.count_positive /= n;
    a.median_std = summarize(medians).std;
    return a;
}

SuiteResult run_variant_suite(const SuiteConfig& config, const DomainDataset& source, const DomainDataset& target) {
    if (config.seeds.empty()) throw ConfigError("suite: at least one seed is required");
    if (config.variants.empty()) throw ConfigError("suite: at least one variant is required");
    if (config.jobs == 0) throw ConfigError("suite: jobs must be >= 1");
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (config.seeds[i] == config.seeds[j]) {
                throw ConfigError("suite: duplicate seed " + std::to_string(config.seeds[i]));
            }
        }
    }
    for (std::size_t i = 0; i < config.variants.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (config.variants[i] == config.variants[j]) {
                throw ConfigError("suite: duplicate variant " + std::string(variant_name(config.variants[i])));
            }
        }
    }

    SuiteResult r;
    r.basins = target.basin_ids();
    r.seeds = config.seeds;
    const std::size_t n_cells = config.variants.size() * config.seeds.size();
    std::vector<std::optional<CellResult>> cells(n_cells);
    std::vector<std::exception_ptr> errors(n_cells);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n_cells; i = next++) {
            const Variant v = config.variants[i / config.seeds.size()];
            const std::uint64_t seed = config.seeds[i % config.seeds.size()];
            try {
                cells[i] = run_cell(config, source, target, v, seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(config.jobs, n_cells);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (auto& c : cells) r.cells.push_back(std::move(*c));

    for (std::size_t vi = 0; vi < config.variants.size(); ++vi) {
        VariantResult vr;
        vr.variant = config.variants[vi];
        vr.nse_matrix.assign(r.basins.size(),
                             std::vector<double>(r.seeds.size(), std::numeric_limits<double>::quiet_NaN()));
        for (std::size_t si = 0; si < r.seeds.size(); ++si) {
            const CellResult& c = r.cells[vi * r.seeds.size() + si];
            vr.per_seed.push_back(c.evaluation.summary);
            const auto m = c.evaluation.nse_map();
            for (std::size_t b = 0; b < r.basins.size(); ++b) {
                if (auto it = m.find(r.basins[b]); it != m.end()) vr.nse_matrix[b][si] = it->second;
            }
        }
        vr.aggregate = aggregate_over_seeds(vr.per_seed);
        r.variants.push_back(std::move(vr));
    }
    return r;
}

namespace {

std::string cell_value(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); }

}  // namespace

std::string table_csv(const SuiteResult& r) {
    std::ostringstream os;
    os << "variant," << summary_csv_header() << '\n';
    for (const auto& v : r.variants) {
        const auto& a = v.aggregate;
        os << variant_name(v.variant) << ',' << cell_value(a.median) << ',' << cell_value(a.mean) << ','
           << cell_value(a.max) << ',' << cell_value(a.min) << ',' << cell_value(a.std) << ','
           << cell_value(a.count_positive) << '\n';
    }
    return os.str();
}

std::string colormap_csv(const SuiteResult& r, Variant variant) {
    const VariantResult& v = r.variant(variant);
    std::ostringstream os;
    os << "basin_id";
    for (auto s : r.seeds) os << ",seed_" << s;
    os << '\n';
    for (std::size_t b = 0; b < r.basins.size(); ++b) {
        os << r.basins[b];
        for (double x : v.nse_matrix[b]) os << ',' << cell_value(x);
        os << '\n';
    }
    return os.str();
}

std::string hydrograph_csv(const SuiteResult& r, const DomainDataset& target, const std::string& basin_id,
                           std::uint64_t seed) {
    const BasinRecord& rec = target.basin(basin_id);
    const DateRange range = target.test_range;
    const std::size_t days = std::size_t(range.days());
    std::vector<std::vector<double>> columns;
    std::ostringstream os;
    os << "date,observed";
    for (const auto& v : r.variants) {
        os << ',' << variant_name(v.variant);
        std::vector<double> col(days, std::numeric_limits<double>::quiet_NaN());
        const CellResult& c = r.cell(v.variant, seed);
        for (const auto& p : c.evaluation.predictions) {
            if (p.basin_id != basin_id) continue;
            for (std::size_t i = 0; i < p.dates.size(); ++i) {
                const auto off = p.dates[i] - range.start;
                if (off >= 0 && std::size_t(off) < days) col[std::size_t(off)] = p.predicted[i];
            }
        }
        columns.push_back(std::move(col));
    }
    os << '\n';
    for (std::size_t d = 0; d < days; ++d) {
        const Date date = range.start + int(d);
        os << date.to_string() << ',';
        const auto idx = date - rec.start;
        if (idx >= 0 && std::size_t(idx) < rec.discharge.values.size() && rec.discharge.observed[std::size_t(idx)]) {
            os << csv::format_double(rec.discharge.values[std::size_t(idx)]);
        }
        for (const auto& col : columns) os << ',' << cell_value(col[d]);
        os << '\n';
    }
    return os.str();
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json suite_config_to_json(const SuiteConfig& c) {
    nlohmann::json variants = nlohmann::json::array();
    for (auto v : c.variants) variants.push_back(variant_name(v));
    return {{"model", model_config_to_json(c.model)},
            {"source_train", train_config_to_json(c.source_train)},
            {"target_train", train_config_to_json(c.target_train)},
            {"transfer",
             {{"freeze_representation", c.transfer.freeze_representation},
              {"basin_selection", basin_selection_name(c.transfer.basin_selection)},
              {"selection_epochs", c.transfer.selection_epochs},
              {"reuse_source_norm", c.transfer.reuse_source_norm}}},
            {"variants", variants},
            {"seeds", c.seeds}};
}

nlohmann::json suite_summary_json(const SuiteResult& r, const SuiteConfig& config) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& v : r.variants) {
        const auto& a = v.aggregate;
        nlohmann::json per_seed = nlohmann::json::array();
        for (std::size_t i = 0; i < v.per_seed.size(); ++i) {
            per_seed.push_back({{"seed", r.seeds[i]},
                                {"summary", v.per_seed[i] ? summary_to_json(*v.per_seed[i]) : nlohmann::json(nullptr)}});
        }
        rows.push_back({{"variant", variant_name(v.variant)},
                        {"median", number_or_null(a.median)},
                        {"mean", number_or_null(a.mean)},
                        {"max", number_or_null(a.max)},
                        {"min", number_or_null(a.min)},
                        {"std", number_or_null(a.std)},
                        {"count_positive", number_or_null(a.count_positive)},
                        {"median_std_across_seeds", number_or_null(a.median_std)},
                        {"seeds_with_results", a.seeds},
                        {"per_seed", per_seed}});
    }
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"variant", variant_name(c.variant)},
                         {"seed", c.seed},
                         {"lineage_ok", c.lineage_ok},
                         {"frozen_intact", c.frozen_intact},
                         {"selected_basin", c.selected_basin ? nlohmann::json(*c.selected_basin) : nlohmann::json(nullptr)},
                         {"excluded", c.evaluation.excluded},
                         {"warnings", c.evaluation.warnings}});
    }
    return {{"format", "streamflow-suite"},
            {"basins", r.basins},
            {"seeds", r.seeds},
            {"variants", rows},
            {"cells", cells},
            {"config", suite_config_to_json(config)}};
}

void write_suite_outputs(const SuiteResult& r, const SuiteConfig& config, const DomainDataset& target,
                         const std::filesystem::path& dir) {
    csv::write_file(dir / "summary_table.csv", table_csv(r));
    for (const auto& v : r.variants) {
        csv::write_file(dir / ("colormap_" + std::string(variant_name(v.variant)) + ".csv"), colormap_csv(r, v.variant));
    }
    for (const auto& b : r.basins) {
        csv::write_file(dir / "hydrographs" / (b + ".csv"), hydrograph_csv(r, target, b, r.seeds.front()));
    }
    csv::write_file(dir / "summary.json", suite_summary_json(r, config).dump(2) + "\n");
    for (const auto& c : r.cells) {
        const auto cell_dir = dir / "cells" / cell_dir_name(c.variant, c.seed);
        csv::write_file(cell_dir / "per_basin_nse.csv", per_basin_nse_csv(c.evaluation));
        TrainingRun tmp(config.model);
        tmp.history = c.target_history;
        csv::write_file(cell_dir / "training_log.jsonl", training_log_jsonl(tmp));
        if (!c.source_history.empty()) {
            tmp.history = c.source_history;
            csv::write_file(cell_dir / "source_training_log.jsonl", training_log_jsonl(tmp));
        }
        if (c.checkpoint) save_checkpoint(cell_dir / "checkpoint_final.json", *c.checkpoint);
    }
}

}  // namespace streamflow
