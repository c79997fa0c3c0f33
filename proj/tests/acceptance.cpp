// Acceptance harness: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "streamflow/csv.hpp"
#include "streamflow/metrics.hpp"
#include "streamflow/rating_curve.hpp"
#include "streamflow/samples.hpp"
#include "streamflow/suite.hpp"
#include "streamflow/synthetic.hpp"
#include "test_support.hpp"

using namespace streamflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double time_limit_s = 0.0;  // 0: none
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1 ----------------------------------------------------------------------
Outcome gradient_exactness() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    std::size_t params = 0;
    const std::size_t trials = 6;
    for (std::size_t t = 0; t < trials; ++t) {
        ModelConfig c;
        c.dynamic_dim = 1 + rng() % 4;
        c.hidden_dim = 1 + rng() % 8;
        c.num_layers = 1 + rng() % 2;
        c.sequence_length = 5 + rng() % 16;
        if (t == 0) {  // always include the largest allowed shape
            c.hidden_dim = 8;
            c.num_layers = 2;
            c.sequence_length = 20;
        }
        const auto r = testing::finite_difference_check(c, rng(), 1e-5, 1e-300);
        worst = std::max(worst, r.max_rel_error);
        params += r.checked;
    }
    return {worst < 1e-4, "max relative error " + fmt(worst) + " over " + std::to_string(trials) + " triples, " +
                              std::to_string(params) + " parameters"};
}

// 2 ----------------------------------------------------------------------
double brute_nse(const std::vector<double>& sim, const std::vector<double>& obs, const std::vector<std::uint8_t>& m) {
    std::vector<long double> o, s;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (m[i]) {
            o.push_back(obs[i]);
            s.push_back(sim[i]);
        }
    }
    long double mean = 0;
    for (auto v : o) mean += v;
    mean /= (long double)o.size();
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
        num += (s[i] - o[i]) * (s[i] - o[i]);
        den += (o[i] - mean) * (o[i] - mean);
    }
    return double(1.0L - num / den);
}

Outcome metric_oracle() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng() % 200;
        std::vector<double> obs(n), sim(n);
        std::vector<std::uint8_t> mask(n);
        std::size_t observed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            obs[i] = u(rng);
            sim[i] = obs[i] + (u(rng) - 5.0) * 0.3;
            mask[i] = (rng() % 10) < 7;
            observed += mask[i];
        }
        if (observed < 2) mask[0] = mask[1] = 1;
        worst = std::max(worst, std::abs(nse(sim, MaskedSeries(obs, mask)) - brute_nse(sim, obs, mask)));
    }
    const std::vector<double> o{1, 2, 3}, mean_pred{2, 2, 2}, hand{1, 2, 2};
    const bool anchors = nse(o, MaskedSeries(o)) == 1.0 && nse(mean_pred, MaskedSeries(o)) == 0.0 &&
                         nse(hand, MaskedSeries(o)) == 0.5;
    return {worst <= 1e-12 && anchors,
            "max |nse - brute force| " + fmt(worst) + " over 100 masked series; anchors " + (anchors ? "exact" : "WRONG")};
}

// 3 ----------------------------------------------------------------------
Outcome capacity() {
    SyntheticSpec spec;
    spec.seed = 3;
    spec.n_basins = 1;
    spec.n_days = 730 + 60;
    spec.train_days = 730;
    const DomainDataset ds = generate_synthetic_family(spec);
    ModelConfig base;
    base.hidden_dim = 16;
    base.sequence_length = 60;
    const ModelConfig mc = config_for_dataset(ds, base, false);
    const SampleSet s = make_samples(ds, RangeKind::train, mc);
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 32;
    tc.seed = 1;
    double best = -1e300;
    std::size_t first_epoch = 0;
    TrainOptions o;
    o.on_epoch = [&](const EpochRecord& rec, const ParameterSet& p) {
        const auto r = evaluate(p, s);
        const double v = r.summary->median;
        best = std::max(best, v);
        if (first_epoch == 0 && v > 0.9) first_epoch = rec.epoch;
    };
    const auto run = train(mc, s, tc, o);
    const double final_nse = evaluate(run.final_params, s).summary->median;
    return {first_epoch > 0 && final_nse > 0.9,
            "training-range NSE first > 0.9 at epoch " + std::to_string(first_epoch) + ", final " + fmt(final_nse) +
                " (best " + fmt(best) + ")"};
}

// 4 ----------------------------------------------------------------------
Outcome transfer_benefit() {
    SyntheticSpec src;
    src.seed = 1000;
    src.role = DomainRole::source;
    src.id_prefix = "src";
    src.n_basins = 50;
    src.n_days = 2922;  // 8 years
    src.train_days = 2557;
    SyntheticSpec tgt;
    tgt.seed = 2000;
    tgt.role = DomainRole::target;
    tgt.id_prefix = "tgt";
    tgt.n_basins = 12;
    tgt.n_days = 450;
    tgt.train_days = 250;
    const DomainDataset source = generate_synthetic_family(src);
    const DomainDataset target = generate_synthetic_family(tgt);

    SuiteConfig sc;
    sc.model.hidden_dim = 32;
    sc.model.sequence_length = 30;
    sc.source_train.epochs = 10;
    sc.source_train.samples_per_epoch = 32768;
    sc.target_train = TrainConfig{};
    sc.variants = {Variant::lstm, Variant::lstm_tl};
    sc.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const SuiteResult r = run_variant_suite(sc, source, target);
    const SeedAggregate& scratch = r.variant(Variant::lstm).aggregate;
    const SeedAggregate& tl = r.variant(Variant::lstm_tl).aggregate;
    std::cout << "  per-seed medians (LSTM | LSTM_TL):";
    for (std::size_t i = 0; i < r.seeds.size(); ++i) {
        const auto& a = r.variant(Variant::lstm).per_seed[i];
        const auto& b = r.variant(Variant::lstm_tl).per_seed[i];
        std::cout << ' ' << (a ? fmt(a->median) : "n/a") << '|' << (b ? fmt(b->median) : "n/a");
    }
    std::cout << '\n';
    const bool median_better = tl.median > scratch.median;
    const bool spread_lower = tl.median_std < scratch.median_std;
    return {median_better && spread_lower && tl.seeds == 10 && scratch.seeds == 10,
            "median NSE LSTM_TL " + fmt(tl.median) + " vs LSTM " + fmt(scratch.median) + "; across-seed std of median " +
                fmt(tl.median_std) + " vs " + fmt(scratch.median_std)};
}

// 5 ----------------------------------------------------------------------
Outcome sparsity() {
    SyntheticSpec src;
    src.seed = 51;
    src.role = DomainRole::source;
    src.n_basins = 8;
    src.n_days = 900;
    src.train_days = 700;
    SyntheticSpec tgt = src;
    tgt.seed = 52;
    tgt.role = DomainRole::target;
    tgt.n_basins = 6;
    tgt.n_days = 500;
    tgt.train_days = 300;
    const DomainDataset source = inject_gaps(generate_synthetic_family(src), 1, 0.5);
    const DomainDataset target = inject_gaps(generate_synthetic_family(tgt), 2, 0.5);

    ModelConfig base;
    base.hidden_dim = 8;
    base.sequence_length = 20;
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 64;
    bool finite = true;
    TransferConfig xc;
    xc.finetune = tc;
    SourceRun sr = pretrain_source(base, source, tc, xc);
    for (const auto& e : sr.run.history) finite = finite && std::isfinite(e.train_loss);
    const TransferRun tr = transfer_and_finetune(sr.model, target, xc);
    for (const auto& e : tr.target_run.history) finite = finite && std::isfinite(e.train_loss);
    finite = finite && sr.run.status == RunStatus::completed && tr.target_run.status == RunStatus::completed;

    // drop-missing-rows oracle: walk the calendar, keep observed targets with
    // a fully valid window, predict, and score the compacted rows
    const ModelConfig& mc = tr.model.config();
    const NormStats& norm = tr.model.norm;
    std::size_t matched = 0, compared = 0;
    bool exact = true;
    const auto scores = tr.evaluation.nse_map();
    for (const auto& b : target.basins) {
        std::vector<double> sims, obs;
        const std::size_t T = mc.sequence_length;
        const auto first = std::size_t(target.test_range.start - b.start);
        const auto last = std::size_t(target.test_range.end - b.start);
        for (std::size_t day = first + T - 1; day < last; ++day) {
            if (!b.discharge.observed[day]) continue;
            bool valid = true;
            for (std::size_t k = day + 1 - T; k <= day; ++k) valid = valid && b.forcing_valid[k];
            if (!valid) continue;
            std::vector<double> window;
            for (std::size_t k = day + 1 - T; k <= day; ++k) {
                for (std::size_t f = 0; f < kForcingDim; ++f) {
                    window.push_back(norm.dynamic.normalize(f, b.forcings[k * kForcingDim + f]));
                }
            }
            sims.push_back(forward(tr.model.params, {window, T, mc.input_dim()}).prediction);
            obs.push_back(b.discharge.values[day]);
        }
        double mean = 0.0;
        for (double v : obs) mean += v;
        mean /= double(obs.size());
        double sse = 0.0, sst = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            sse += (sims[i] - obs[i]) * (sims[i] - obs[i]);
            sst += (obs[i] - mean) * (obs[i] - mean);
        }
        const double oracle = 1.0 - sse / sst;
        ++compared;
        const auto it = scores.find(b.basin_id);
        if (it != scores.end() && it->second == oracle) ++matched;
        else exact = false;
    }
    return {finite && exact && compared == target.basins.size(),
            std::string("losses ") + (finite ? "finite" : "NON-FINITE") + "; " + std::to_string(matched) + "/" +
                std::to_string(compared) + " basins match the drop-missing oracle bit for bit (test median " +
                fmt(tr.evaluation.summary->median) + ")"};
}

// 6 ----------------------------------------------------------------------
Outcome head_swap() {
    ModelConfig m;
    m.hidden_dim = 16;
    m.num_layers = 2;
    m.sequence_length = 5;
    const ParameterSet p = init_parameters(m, 4);
    bool swap_ok = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ParameterSet q = swap_head(p, s);
        swap_ok = swap_ok && bitwise_equal(q.representation(), p.representation());
    }

    SyntheticSpec src;
    src.seed = 61;
    src.n_basins = 6;
    src.n_days = 300;
    src.train_days = 240;
    SyntheticSpec tgt = src;
    tgt.seed = 62;
    tgt.role = DomainRole::target;
    tgt.n_basins = 4;
    tgt.n_days = 200;
    tgt.train_days = 120;
    SuiteConfig sc;
    sc.model.hidden_dim = 6;
    sc.model.sequence_length = 10;
    sc.source_train.epochs = 2;
    sc.source_train.batch_size = 64;
    sc.target_train.epochs = 3;
    sc.target_train.batch_size = 64;
    sc.transfer.freeze_representation = true;
    sc.variants = {Variant::lstm_tl, Variant::lstm_tl_sca};
    sc.seeds = {0, 1, 2};
    const SuiteResult r = run_variant_suite(sc, generate_synthetic_family(src), generate_synthetic_family(tgt));
    std::size_t lineage = 0, frozen = 0;
    for (const auto& c : r.cells) {
        lineage += c.lineage_ok && c.handoff_representation_hash == c.source_representation_hash;
        frozen += c.frozen_intact && c.final_representation_hash == c.source_representation_hash;
    }
    const bool ok = swap_ok && lineage == r.cells.size() && frozen == r.cells.size();
    return {ok, std::string("swap_head ") + (swap_ok ? "preserves" : "ALTERS") + " representation; lineage " +
                    std::to_string(lineage) + "/" + std::to_string(r.cells.size()) + ", frozen intact " +
                    std::to_string(frozen) + "/" + std::to_string(r.cells.size()) + " TL runs"};
}

// 7 ----------------------------------------------------------------------
Outcome schedule() {
    SyntheticSpec spec;
    spec.n_basins = 2;
    spec.n_days = 120;
    spec.train_days = 80;
    const DomainDataset ds = generate_synthetic_family(spec);
    ModelConfig base;
    base.hidden_dim = 4;
    base.sequence_length = 10;
    const ModelConfig mc = config_for_dataset(ds, base, false);
    const TrainConfig tc;  // library defaults
    const auto run = train(mc, make_samples(ds, RangeKind::train, mc), tc);
    bool ok = run.history.size() == 30 && run.history[0].epoch == 1 && run.history[0].lr == 0.001;
    for (std::size_t e = 1; e < run.history.size(); ++e) ok = ok && run.history[e].lr == 0.0005;
    return {ok, std::to_string(run.history.size()) + " epochs; epoch 1 lr " + fmt(run.history.front().lr) +
                    ", epochs 2-30 lr " + fmt(run.history.back().lr)};
}

// 8 ----------------------------------------------------------------------
std::map<std::string, std::string> csv_files(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            out[fs::relative(e.path(), root).string()] = testing::slurp(e.path());
        }
    }
    return out;
}

Outcome determinism() {
    testing::TempDir dir("acceptance_det");
    auto syn = [](const char* role, std::size_t basins, std::size_t days, std::size_t train, int seed) {
        return nlohmann::json{{"seed", seed}, {"n_basins", basins}, {"n_days", days}, {"train_days", train},
                              {"role", role}, {"id_prefix", role}};
    };
    const nlohmann::json cfg{{"source", {{"synthetic", syn("source", 5, 300, 240, 81)}, {"gap_fraction", 0.3}, {"gap_seed", 1}}},
                             {"target", {{"synthetic", syn("target", 4, 200, 120, 82)}, {"gap_fraction", 0.3}, {"gap_seed", 2}}},
                             {"model", {{"hidden_dim", 6}, {"sequence_length", 10}}},
                             {"source_train", {{"epochs", 2}, {"batch_size", 64}}},
                             {"target_train", {{"epochs", 3}, {"batch_size", 64}}},
                             {"transfer", {{"basin_selection", "below_half_median"}, {"selection_epochs", 1}}},
                             {"seeds", {5, 6}}};
    testing::write_text(dir.path() / "suite.json", cfg.dump(2));
    int codes = 0;
    for (const char* out : {"run_a", "run_b"}) {
        const std::string cmd = std::string(STREAMFLOW_CLI_PATH) + " suite --config " + (dir.path() / "suite.json").string() +
                                " --output " + (dir.path() / out).string() + " > /dev/null 2>&1";
        codes |= std::system(cmd.c_str());
    }
    if (codes != 0) return {false, "suite command failed"};
    const auto a = csv_files(dir.path() / "run_a");
    const auto b = csv_files(dir.path() / "run_b");
    std::size_t same = 0;
    for (const auto& [name, text] : a) {
        const auto it = b.find(name);
        same += it != b.end() && it->second == text;
    }
    return {!a.empty() && a.size() == b.size() && same == a.size(),
            std::to_string(same) + "/" + std::to_string(a.size()) + " CSV artifacts byte-identical across two processes"};
}

// 9 ----------------------------------------------------------------------
Outcome summary_statistics() {
    struct Case {
        std::vector<double> v;
        double median, mean, max, min, std;
        std::size_t positive;
    };
    // hand values; std is the population standard deviation
    const std::vector<Case> cases{
        {{-1, 0, 1}, 0.0, 0.0, 1.0, -1.0, 0.816496580927726, 1},
        {{4, 1, 3, 2}, 2.5, 2.5, 4.0, 1.0, 1.118033988749895, 4},
        {{-0.2, -1.5, -0.7, -3.1}, -1.1, -1.375, -0.2, -3.1, 1.0985786271359916, 0},
        {{-0.49, -0.85, -2.0, 0.3, -0.1, 0.0}, -0.295, -0.5233333333333333, 0.3, -2.0, 0.7549098548097574, 1},
        {{0.7}, 0.7, 0.7, 0.7, 0.7, 0.0, 1},
    };
    std::size_t ok = 0;
    for (const auto& c : cases) {
        const NseSummary s = summarize(c.v);
        const bool good = std::abs(s.median - c.median) <= 1e-15 && std::abs(s.mean - c.mean) <= 1e-15 &&
                          s.max == c.max && s.min == c.min && std::abs(s.std - c.std) <= 1e-15 &&
                          s.count_positive == c.positive && s.count == c.v.size();
        ok += good;
    }
    return {ok == cases.size(), std::to_string(ok) + "/" + std::to_string(cases.size()) +
                                    " fixed vectors (odd, even, all-negative, mixed, singleton)"};
}

// 10 ---------------------------------------------------------------------
Outcome rating_round_trip() {
    const RatingCurve truth{2.0, 1.5, 0.3};
    std::vector<StageDischargePair> clean;
    const std::size_t n = 30;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 0.4 + 2.6 * double(i) / double(n - 1);
        clean.push_back({h, truth.discharge(h)});
    }
    const RatingCurve f = fit_rating_curve(clean);
    const double clean_err = std::max({std::abs(f.a - truth.a), std::abs(f.b - truth.b), std::abs(f.h0 - truth.h0)});

    std::mt19937_64 rng(10);
    std::normal_distribution<double> z(0.0, 0.01);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        auto noisy = clean;
        for (auto& p : noisy) p.discharge *= 1.0 + z(rng);
        const RatingCurve g = fit_rating_curve(noisy);
        worst = std::max({worst, std::abs(g.a - truth.a) / truth.a, std::abs(g.b - truth.b) / truth.b,
                          std::abs(g.h0 - truth.h0) / truth.h0});
    }
    return {clean_err <= 1e-6 && worst <= 0.05,
            "noiseless max abs error " + fmt(clean_err) + "; 1% noise worst relative error " + fmt(worst) +
                " over 100 trials"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"gradient exactness", gradient_exactness, 60.0},
        {"metric oracle", metric_oracle},
        {"capacity", capacity, 120.0},
        {"transfer benefit", transfer_benefit, 1800.0},
        {"sparsity robustness", sparsity},
        {"head-swap invariants", head_swap},
        {"schedule conformance", schedule},
        {"determinism", determinism},
        {"summary statistics", summary_statistics},
        {"rating-curve round trip", rating_round_trip},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].time_limit_s > 0.0 && sec > criteria[i].time_limit_s) {
            o.pass = false;
            o.detail += "; exceeded the " + fmt(criteria[i].time_limit_s) + " s budget";
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].name << "): " << o.detail
                  << " [" << fmt(sec) << " s]" << std::endl;
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
