#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "streamflow/checkpoint.hpp"
#include "streamflow/cli.hpp"
#include "streamflow/csv.hpp"
#include "streamflow/dataset.hpp"
#include "streamflow/rating_curve.hpp"
#include "test_support.hpp"

using namespace streamflow;
using streamflow::testing::slurp;
using streamflow::testing::TempDir;
using streamflow::testing::write_text;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "streamflow");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(STREAMFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

nlohmann::json synthetic(const std::string& role, std::size_t basins, std::size_t days, std::size_t train,
                         std::uint64_t seed) {
    return {{"seed", seed}, {"n_basins", basins}, {"n_days", days}, {"train_days", train}, {"role", role},
            {"id_prefix", role == "source" ? "src" : "tgt"}};
}

nlohmann::json experiment(const fs::path& out) {
    return {{"source", {{"synthetic", synthetic("source", 4, 90, 70, 1)}}},
            {"target", {{"synthetic", synthetic("target", 3, 70, 40, 2)}}},
            {"model", {{"hidden_dim", 4}, {"sequence_length", 8}}},
            {"source_train", {{"epochs", 1}, {"batch_size", 32}}},
            {"target_train", {{"epochs", 2}, {"batch_size", 32}}},
            {"seeds", {0}},
            {"output", out.string()}};
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2)); }

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().filename() == "run_metadata.json") continue;
        out[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
    return out;
}

}  // namespace

TEST(Cli, PrepareSyntheticIsReproducible) {
    TempDir dir("cli_prep");
    write_json(dir.path() / "prep.json", {{"synthetic", synthetic("target", 3, 60, 30, 1)}, {"gap_fraction", 0.2}});
    ASSERT_EQ(cli({"prepare", "--config", (dir.path() / "prep.json").string(), "--output", (dir.path() / "a").string()}).code, 0);
    ASSERT_EQ(cli({"prepare", "--config", (dir.path() / "prep.json").string(), "--output", (dir.path() / "b").string()}).code, 0);
    const auto a = tree(dir.path() / "a");
    EXPECT_EQ(a, tree(dir.path() / "b"));
    EXPECT_TRUE(a.count("manifest.json"));
    EXPECT_TRUE(a.count("availability.csv"));
    EXPECT_TRUE(a.count("gaps.csv"));
    EXPECT_TRUE(fs::exists(dir.path() / "a" / "run_metadata.json"));
    EXPECT_NO_THROW(load_domain(dir.path() / "a"));
}

TEST(Cli, PrepareGaugePipelineMasksSubDatumStages) {
    TempDir dir("cli_gauge");
    const RatingCurve truth{2.0, 1.5, 0.3};
    std::string rating = "stage,discharge\n";
    for (int i = 0; i < 10; ++i) {
        const double h = 0.5 + 0.25 * i;
        rating += csv::format_double(h) + "," + csv::format_double(truth.discharge(h)) + "\n";
    }
    write_text(dir.path() / "rating.csv", rating);
    // day 1: stage 1.3 all day; day 2: stage 0.2 (below datum) all day; day 3: no data
    std::string stage = "timestamp,stage\n";
    const std::int64_t t0 = parse_timestamp("2016-01-01 00:00");
    for (int i = 0; i < 144; ++i) {
        const double h = i < 48 ? 1.3 : 0.2;
        stage += format_timestamp(t0 + i * kHalfHourSeconds) + "," + (i < 96 ? csv::format_double(h) : "") + "\n";
    }
    write_text(dir.path() / "stage.csv", stage);
    std::string forcing = "date,precip,tmin,tmax,vapor_pressure\n";
    for (int d = 0; d < 6; ++d) forcing += (Date(2016, 1, 1) + d).to_string() + ",1,2,3,4\n";
    write_text(dir.path() / "forcing.csv", forcing);
    std::string statics = "basin_id";
    for (const auto& s : default_static_schema()) statics += "," + s;
    statics += "\nk1";
    for (std::size_t i = 0; i < 12; ++i) statics += ",1";
    write_text(dir.path() / "static.csv", statics + "\n");
    write_json(dir.path() / "prep.json",
               {{"gauges",
                 {{"role", "target"},
                  {"static_attributes_csv", "static.csv"},
                  {"train_range", {{"start", "2016-01-01"}, {"end", "2016-01-04"}}},
                  {"test_range", {{"start", "2016-01-04"}, {"end", "2016-01-07"}}},
                  {"stations",
                   {{{"basin_id", "k1"}, {"stage_csv", "stage.csv"}, {"rating_csv", "rating.csv"}, {"forcings_csv", "forcing.csv"}}}}}}});
    const auto r = cli({"prepare", "--config", (dir.path() / "prep.json").string(), "--output", (dir.path() / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const csv::Table q = csv::read(dir.path() / "out" / "discharge" / "k1.csv");
    ASSERT_EQ(q.rows.size(), 6u);
    EXPECT_NEAR(csv::parse_double(q.rows[0][1], "q"), 2.0, 1e-4);  // fitted curve, not the truth
    EXPECT_EQ(q.rows[1][1], "");
    EXPECT_EQ(q.rows[2][1], "");
    const auto curves = nlohmann::json::parse(slurp(dir.path() / "out" / "rating_curves.json"));
    EXPECT_EQ(curves[0]["below_datum"], 48);
    EXPECT_NEAR(curves[0]["h0"].get<double>(), 0.3, 1e-6);
}

TEST(Cli, MissingManifestIsDataError) {
    TempDir dir("cli_nomani");
    fs::create_directories(dir.path() / "empty");
    auto j = experiment(dir.path() / "out");
    j["target"] = {{"path", (dir.path() / "empty").string()}};
    write_json(dir.path() / "cfg.json", j);
    fs::create_directories(dir.path() / "ck");
    ModelConfig m;
    m.hidden_dim = 2;
    m.sequence_length = 2;
    save_checkpoint(dir.path() / "ck" / "c.json", {init_parameters(m, 0), {}});
    const auto r = cli({"evaluate", "--config", (dir.path() / "cfg.json").string(), "--checkpoint",
                        (dir.path() / "ck" / "c.json").string()});
    EXPECT_EQ(r.code, kExitData) << r.err;
}

TEST(Cli, TrainArtifacts) {
    TempDir dir("cli_train");
    auto j = experiment(dir.path() / "t0");
    j["source_train"]["epochs"] = 0;
    write_json(dir.path() / "zero.json", j);
    ASSERT_EQ(cli({"train", "--config", (dir.path() / "zero.json").string(), "--seed", "5"}).code, 0);
    const Checkpoint c0 = load_checkpoint(dir.path() / "t0" / "checkpoint_final.json");
    EXPECT_TRUE(bitwise_equal(c0.params.values(), init_parameters(c0.params.config(), 5).values()));
    EXPECT_EQ(slurp(dir.path() / "t0" / "training_log.jsonl"), "");

    j = experiment(dir.path() / "t1");
    j["source_train"]["epochs"] = 3;
    write_json(dir.path() / "three.json", j);
    ASSERT_EQ(cli({"train", "--config", (dir.path() / "three.json").string()}).code, 0);
    ASSERT_EQ(cli({"train", "--config", (dir.path() / "three.json").string(), "--output", (dir.path() / "t2").string()}).code, 0);
    const std::string log = slurp(dir.path() / "t1" / "training_log.jsonl");
    EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
    EXPECT_EQ(slurp(dir.path() / "t1" / "checkpoint_final.json"), slurp(dir.path() / "t2" / "checkpoint_final.json"));
}

TEST(Cli, TransferFreezeAndErrors) {
    TempDir dir("cli_tl");
    write_json(dir.path() / "cfg.json", experiment(dir.path() / "src"));
    ASSERT_EQ(cli({"train", "--config", (dir.path() / "cfg.json").string()}).code, 0);
    const auto src_ckpt = dir.path() / "src" / "checkpoint_final.json";
    const auto r = cli({"transfer", "--config", (dir.path() / "cfg.json").string(), "--checkpoint", src_ckpt.string(),
                        "--freeze-representation", "--output", (dir.path() / "tl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = nlohmann::json::parse(slurp(dir.path() / "tl" / "summary.json"));
    EXPECT_EQ(summary["source_representation_hash"], summary["final_representation_hash"]);
    EXPECT_TRUE(summary["frozen_representation_intact"].get<bool>());
    EXPECT_TRUE(fs::exists(dir.path() / "tl" / "per_basin_nse.csv"));
    const auto before = load_checkpoint(src_ckpt);
    const auto after = load_checkpoint(dir.path() / "tl" / "checkpoint_final.json");
    EXPECT_EQ(representation_hash(before.params), representation_hash(after.params));

    const auto missing = cli({"transfer", "--config", (dir.path() / "cfg.json").string(), "--checkpoint",
                              (dir.path() / "nope.json").string()});
    EXPECT_EQ(missing.code, kExitData);
    EXPECT_NE(missing.err.find("nope.json"), std::string::npos);
}

TEST(Cli, SuiteArtifacts) {
    TempDir dir("cli_suite");
    auto j = experiment(dir.path() / "suite");
    j["seeds"] = {3, 4};
    write_json(dir.path() / "cfg.json", j);
    const auto r = cli({"suite", "--config", (dir.path() / "cfg.json").string(), "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out = dir.path() / "suite";
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(summary["variants"].size(), 4u);
    const csv::Table table = csv::read(out / "summary_table.csv");
    EXPECT_EQ(table.rows.size(), 4u);
    const csv::Table cm = csv::read(out / "colormap_LSTM_TL.csv");
    EXPECT_EQ(cm.rows.size(), 3u);
    EXPECT_EQ(cm.header, (std::vector<std::string>{"basin_id", "seed_3", "seed_4"}));
    const csv::Table hydro = csv::read(out / "hydrographs" / "tgt000.csv");
    EXPECT_EQ(hydro.rows.size(), 30u);
    EXPECT_EQ(hydro.header, (std::vector<std::string>{"date", "observed", "LSTM", "LSTM_SCA", "LSTM_TL", "LSTM_TL_SCA"}));
    EXPECT_TRUE(fs::exists(out / "cells" / "LSTM_TL_seed4" / "per_basin_nse.csv"));
    EXPECT_TRUE(fs::exists(out / "run_metadata.json"));
    EXPECT_EQ(slurp(out / "summary.json").find("created_utc"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    TempDir dir("cli_codes");
    EXPECT_EQ(run_binary("frobnicate"), kExitConfig);
    EXPECT_EQ(run_binary("suite"), kExitConfig);  // --config missing
    write_json(dir.path() / "bad.json", {{"modle", {}}});
    EXPECT_EQ(run_binary("suite --config " + (dir.path() / "bad.json").string()), kExitConfig);
    auto j = experiment(dir.path() / "div");
    j["target_train"]["lr_first_epoch"] = 1e306;
    j["target_train"]["lr_rest"] = 1e306;
    j["target_train"]["batch_size"] = 4;
    j["variants"] = {"LSTM"};
    write_json(dir.path() / "div.json", j);
    EXPECT_EQ(run_binary("suite --config " + (dir.path() / "div.json").string()), kExitDivergence);
    EXPECT_EQ(run_binary("--help"), kExitOk);
}
