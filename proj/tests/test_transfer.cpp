#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "streamflow/errors.hpp"
#include "streamflow/kernels.hpp"
#include "streamflow/samples.hpp"
#include "streamflow/suite.hpp"
#include "streamflow/synthetic.hpp"
#include "streamflow/transfer.hpp"
#include "test_support.hpp"

using namespace streamflow;

namespace {

DomainDataset family(DomainRole role, std::size_t basins, std::size_t days, std::size_t train_days,
                     std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.role = role;
    spec.n_basins = basins;
    spec.n_days = days;
    spec.train_days = train_days;
    spec.id_prefix = role == DomainRole::source ? "src" : "tgt";
    return generate_synthetic_family(spec);
}

ModelConfig tiny_model() {
    ModelConfig m;
    m.hidden_dim = 5;
    m.sequence_length = 8;
    return m;
}

TrainConfig quick(std::size_t epochs, std::uint64_t seed = 0) {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = 32;
    t.seed = seed;
    return t;
}

}  // namespace

TEST(Selection, RuleExamples) {
    EXPECT_EQ(select_lagging_basin({{"A", 1.0}, {"B", 0.8}, {"C", 0.3}}, 0), "C");
    EXPECT_EQ(select_lagging_basin({{"A", 0.5}, {"B", 0.5}}, 0), "A");
    EXPECT_EQ(select_lagging_basin({{"A", -1.0}, {"B", -3.0}}, 0), "B");
    EXPECT_THROW(select_lagging_basin({}, 0), Error);
    EXPECT_THROW(select_lagging_basin({{"A", 1.0}, {"B", std::nan("")}}, 0), Error);
}

TEST(Selection, DeterministicMember) {
    std::map<std::string, double> m;
    for (int i = 0; i < 20; ++i) m["b" + std::to_string(i)] = i < 8 ? 0.01 * i : 0.9;
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = select_lagging_basin(m, seed);
        EXPECT_EQ(a, select_lagging_basin(m, seed));
        ASSERT_TRUE(m.count(a));
        EXPECT_LT(m.at(a), 0.45);
        seen.insert(a);
    }
    EXPECT_GT(seen.size(), 1u);  // uniform over candidates, not a fixed pick
}

TEST(Variants, NamesAndFlags) {
    for (auto v : all_variants()) EXPECT_EQ(parse_variant(variant_name(v)), v);
    EXPECT_EQ(parse_variant("LSTM_TL+SCA"), Variant::lstm_tl_sca);
    EXPECT_THROW(parse_variant("GRU"), ConfigError);
    EXPECT_TRUE(is_transfer(Variant::lstm_tl));
    EXPECT_FALSE(is_transfer(Variant::lstm_sca));
    EXPECT_TRUE(uses_static(Variant::lstm_tl_sca));
}

TEST(Pretrain, RequiresSourceRole) {
    const auto tgt = family(DomainRole::target, 2, 60, 30, 1);
    EXPECT_THROW(pretrain_source(tiny_model(), tgt, quick(1), {}), ConfigError);
}

TEST(Pretrain, HeuristicOffEqualsPlainTrain) {
    const auto src = family(DomainRole::source, 10, 80, 60, 2);
    const TrainConfig tc = quick(2, 3);
    const SourceRun run = pretrain_source(tiny_model(), src, tc, {});
    EXPECT_EQ(run.validation_basins.size(), 1u);
    EXPECT_FALSE(run.model.selected_basin);

    const auto mc = config_for_dataset(src, tiny_model(), false);
    const auto all = make_samples(src, RangeKind::train, mc);
    const auto tr = all.restricted_to(run.train_basins);
    const auto plain = train(mc, tr, tc);
    EXPECT_TRUE(bitwise_equal(plain.final_params.values(), run.model.params.values()));
}

TEST(Pretrain, HeuristicOnTouchesOnlySelectedBasin) {
    const auto src = family(DomainRole::source, 10, 80, 60, 2);
    TrainConfig tc = quick(2, 3);
    tc.validation_fraction = 0.3;
    TransferConfig xc;
    xc.basin_selection = BasinSelection::below_half_median;
    xc.selection_epochs = 3;
    const SourceRun run = pretrain_source(tiny_model(), src, tc, xc);
    ASSERT_TRUE(run.model.selected_basin);
    EXPECT_GT(run.selection_basin_samples, 0u);
    EXPECT_EQ(run.selection_samples, 3 * run.selection_basin_samples);
    ASSERT_TRUE(run.selection_run);
    EXPECT_EQ(run.selection_run->history.size(), 3u);
    for (const auto& e : run.selection_run->history) EXPECT_EQ(e.lr, tc.lr_rest);
    // deterministic per seed
    const SourceRun again = pretrain_source(tiny_model(), src, tc, xc);
    EXPECT_EQ(*again.model.selected_basin, *run.model.selected_basin);
    EXPECT_TRUE(bitwise_equal(again.model.params.values(), run.model.params.values()));
}

class TransferFixture : public ::testing::Test {
protected:
    void SetUp() override {
        src = family(DomainRole::source, 6, 90, 70, 4);
        tgt = family(DomainRole::target, 3, 60, 35, 5);
        source_run = std::make_unique<SourceRun>(pretrain_source(tiny_model(), src, quick(2), {}));
    }
    DomainDataset src, tgt;
    std::unique_ptr<SourceRun> source_run;
};

TEST_F(TransferFixture, ZeroEpochFinetuneIsSourcePlusFreshHead) {
    TransferConfig xc;
    xc.finetune = quick(0);
    xc.head_seed = 17;
    const TransferRun r = transfer_and_finetune(source_run->model, tgt, xc);
    EXPECT_TRUE(bitwise_equal(r.model.params.values(), swap_head(source_run->model.params, 17).values()));
    EXPECT_EQ(r.handoff_representation_hash, r.source_representation_hash);
    EXPECT_TRUE(r.evaluation.summary.has_value());
}

TEST_F(TransferFixture, FrozenKeepsRepresentationJointMovesIt) {
    TransferConfig xc;
    xc.finetune = quick(2);
    xc.freeze_representation = true;
    const TransferRun frozen = transfer_and_finetune(source_run->model, tgt, xc);
    EXPECT_TRUE(frozen.frozen_representation_intact);
    EXPECT_EQ(frozen.final_representation_hash, source_run->model.representation_hash);
    EXPECT_TRUE(bitwise_equal(frozen.model.params.representation(), source_run->model.params.representation()));

    xc.freeze_representation = false;
    const TransferRun joint = transfer_and_finetune(source_run->model, tgt, xc);
    EXPECT_NE(joint.final_representation_hash, source_run->model.representation_hash);
    EXPECT_EQ(joint.handoff_representation_hash, source_run->model.representation_hash);
}

TEST_F(TransferFixture, HeadSeedChangesOnlyTheHead) {
    const ParameterSet a = swap_head(source_run->model.params, 1);
    const ParameterSet b = swap_head(source_run->model.params, 2);
    EXPECT_TRUE(bitwise_equal(a.representation(), b.representation()));
    EXPECT_FALSE(bitwise_equal(a.head(), b.head()));
}

TEST_F(TransferFixture, LineageTamperingDetected) {
    DomainModel tampered = source_run->model;
    tampered.params.layer_weights(0)[0] += 1e-12;
    TransferConfig xc;
    xc.finetune = quick(1);
    EXPECT_THROW(transfer_and_finetune(tampered, tgt, xc), DataError);
}

TEST_F(TransferFixture, CheckpointMetadataRoundTrip) {
    const Checkpoint c = to_checkpoint(source_run->model);
    const DomainModel back = from_checkpoint(checkpoint_from_json(checkpoint_to_json(c)));
    EXPECT_EQ(back.representation_hash, source_run->model.representation_hash);
    EXPECT_EQ(back.norm, source_run->model.norm);
    EXPECT_EQ(back.static_schema, source_run->model.static_schema);
}

TEST(Transfer, SchemaMismatchListsAttributes) {
    auto src = family(DomainRole::source, 4, 60, 40, 1);
    auto tgt = family(DomainRole::target, 2, 60, 30, 2);
    ModelConfig m = tiny_model();
    m.use_static = true;
    const SourceRun run = pretrain_source(m, src, quick(1), {});
    DomainDataset bad = tgt;
    std::swap(bad.static_schema[0], bad.static_schema[1]);
    TransferConfig xc;
    xc.finetune = quick(1);
    try {
        transfer_and_finetune(run.model, bad, xc);
        FAIL();
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("area"), std::string::npos);
        EXPECT_NE(msg.find("elevation"), std::string::npos);
    }
    bad.static_schema.pop_back();
    EXPECT_THROW(transfer_and_finetune(run.model, bad, xc), SchemaError);
    // without static inputs the attribute schema is irrelevant
    const SourceRun dyn = pretrain_source(tiny_model(), src, quick(1), {});
    EXPECT_NO_THROW(transfer_and_finetune(dyn.model, bad, xc));
}

// LSTM_SCA reduces to LSTM when the static inputs are zero and their weights start at zero.
TEST(Transfer, StaticArgumentSymmetry) {
    auto ds = family(DomainRole::target, 3, 80, 50, 9);
    for (auto& b : ds.basins) std::fill(b.static_attributes.begin(), b.static_attributes.end(), 0.0);
    ds = make_domain(ds.role, ds.static_schema, ds.basins, ds.train_range, ds.test_range);
    const ModelConfig plain = config_for_dataset(ds, tiny_model(), false);
    const ModelConfig sca = config_for_dataset(ds, tiny_model(), true);
    const ParameterSet p = init_parameters(plain, 3);
    ParameterSet q(sca);
    {
        const std::size_t H = plain.hidden_dim, dyn = plain.dynamic_dim, st = sca.static_dim;
        auto src = p.layer_weights(0);
        auto dst = q.layer_weights(0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            for (std::size_t c = 0; c < dyn; ++c) dst[r * (dyn + st + H) + c] = src[r * (dyn + H) + c];
            for (std::size_t c = 0; c < H; ++c) dst[r * (dyn + st + H) + dyn + st + c] = src[r * (dyn + H) + dyn + c];
        }
        std::copy(p.layer_bias(0).begin(), p.layer_bias(0).end(), q.layer_bias(0).begin());
        std::copy(p.head().begin(), p.head().end(), q.head().begin());
    }
    kernels::ScopedBackend guard(kernels::Backend::scalar);
    const auto sp = make_samples(ds, RangeKind::train, plain);
    const auto sq = make_samples(ds, RangeKind::train, sca);
    TrainConfig tc = quick(2, 5);
    TrainOptions op, oq;
    op.initial = p;
    oq.initial = q;
    const auto rp = train(plain, sp, tc, op);
    const auto rq = train(sca, sq, tc, oq);
    ASSERT_EQ(rp.history.size(), rq.history.size());
    for (std::size_t e = 0; e < rp.history.size(); ++e) EXPECT_EQ(rp.history[e].train_loss, rq.history[e].train_loss);
    const auto ep = evaluate(rp.final_params, ds, RangeKind::test);
    const auto eq = evaluate(rq.final_params, ds, RangeKind::test);
    ASSERT_EQ(ep.scores.size(), eq.scores.size());
    for (std::size_t i = 0; i < ep.scores.size(); ++i) EXPECT_EQ(ep.scores[i].nse, eq.scores[i].nse);
}

TEST(Suite, ShapesArtifactsAndDeterminism) {
    const auto src = family(DomainRole::source, 5, 90, 70, 11);
    const auto tgt = family(DomainRole::target, 3, 70, 40, 12);
    SuiteConfig sc;
    sc.model = tiny_model();
    sc.source_train = quick(1);
    sc.target_train = quick(2);
    sc.seeds = {0, 1};
    const SuiteResult r = run_variant_suite(sc, src, tgt);
    ASSERT_EQ(r.variants.size(), 4u);
    for (const auto& v : r.variants) {
        ASSERT_EQ(v.nse_matrix.size(), 3u);
        for (const auto& row : v.nse_matrix) EXPECT_EQ(row.size(), 2u);
        EXPECT_EQ(v.aggregate.seeds, 2u);
    }
    for (const auto& c : r.cells) EXPECT_TRUE(c.lineage_ok);
    const std::string table = table_csv(r);
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
    EXPECT_EQ(table.substr(0, table.find('\n')), "variant,median,mean,max,min,std,count_positive");

    const std::string hydro = hydrograph_csv(r, tgt, "tgt000", 0);
    EXPECT_EQ(std::count(hydro.begin(), hydro.end(), '\n'), 1 + tgt.test_range.days());
    EXPECT_NE(hydro.find('\n' + tgt.test_range.start.to_string() + ','), std::string::npos);
    EXPECT_NE(hydro.find('\n' + (tgt.test_range.end - 1).to_string() + ','), std::string::npos);
    EXPECT_EQ(hydro.find((tgt.test_range.end).to_string()), std::string::npos);

    sc.jobs = 3;
    const SuiteResult again = run_variant_suite(sc, src, tgt);
    EXPECT_EQ(table_csv(again), table);
    for (auto v : all_variants()) EXPECT_EQ(colormap_csv(again, v), colormap_csv(r, v));
}

TEST(Suite, AggregateOverSeeds) {
    NseSummary a{0.5, 0.4, 0.9, -0.2, 0.3, 3, 4};
    NseSummary b{-0.5, -0.4, 0.1, -1.2, 0.5, 1, 4};
    const SeedAggregate g = aggregate_over_seeds({a, b, std::nullopt});
    EXPECT_EQ(g.seeds, 2u);
    EXPECT_DOUBLE_EQ(g.median, 0.0);
    EXPECT_DOUBLE_EQ(g.count_positive, 2.0);
    EXPECT_DOUBLE_EQ(g.median_std, 0.5);
    SuiteConfig bad;
    bad.seeds = {};
    EXPECT_THROW(run_variant_suite(bad, {}, {}), ConfigError);
    bad.seeds = {0, 1, 0};
    EXPECT_THROW(run_variant_suite(bad, {}, {}), ConfigError);
    bad.seeds = {0, 1};
    bad.variants = {Variant::lstm, Variant::lstm};
    EXPECT_THROW(run_variant_suite(bad, {}, {}), ConfigError);
}
