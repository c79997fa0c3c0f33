#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "streamflow/errors.hpp"
#include "streamflow/metrics.hpp"

using namespace streamflow;

TEST(Nse, Anchors) {
    const std::vector<double> obs{1, 2, 3};
    EXPECT_EQ(nse(obs, MaskedSeries(obs)), 1.0);
    const std::vector<double> mean_pred{2, 2, 2};
    EXPECT_EQ(nse(mean_pred, MaskedSeries(obs)), 0.0);
    const std::vector<double> hand{1, 2, 2};
    EXPECT_EQ(nse(hand, MaskedSeries(obs)), 0.5);
}

TEST(Nse, MaskedEntriesIgnored) {
    const std::vector<double> sim{1, 99, 3};
    const MaskedSeries obs({1, -5, 3}, {1, 0, 1});
    EXPECT_EQ(nse(sim, obs), 1.0);
}

TEST(Nse, Errors) {
    const std::vector<double> sim{1, 2};
    EXPECT_THROW(nse(sim, MaskedSeries({1, 2}, {1, 0})), InsufficientDataError);
    EXPECT_THROW(nse(sim, MaskedSeries({4, 4})), DegenerateVarianceError);
    const std::vector<double> short_sim{1};
    EXPECT_THROW(nse(short_sim, MaskedSeries({1, 2})), ShapeError);
}

TEST(Nse, UnboundedBelow) {
    const std::vector<double> sim{10, -10, 10};
    EXPECT_LT(nse(sim, MaskedSeries({1, 2, 3})), -100.0);
}

TEST(NseLoss, ValueAndGradient) {
    const std::vector<double> sims{1.5, 0.0}, obs{1.0, 1.0};
    const std::vector<BasinNormStats> stats{{1.0, 0.4, 0.1}, {1.0, 1.9, 0.1}};
    const LossResult r = nse_loss(sims, obs, stats);
    // (0.25 / 0.5 + 1 / 2) / 2
    EXPECT_DOUBLE_EQ(r.loss, 0.5);
    EXPECT_DOUBLE_EQ(r.d_sim[0], 2 * 0.5 / (0.5 * 2));
    EXPECT_DOUBLE_EQ(r.d_sim[1], 2 * -1.0 / (2.0 * 2));
    EXPECT_THROW(nse_loss({}, {}, {}), NumericalError);
    const std::vector<BasinNormStats> zero{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    EXPECT_THROW(nse_loss(sims, obs, zero), Error);
}

TEST(NseLoss, EpsilonZeroAllowedWithVariance) {
    const std::vector<double> sims{2.0}, obs{1.0};
    const std::vector<BasinNormStats> stats{{0.0, 4.0, 0.0}};
    EXPECT_DOUBLE_EQ(nse_loss(sims, obs, stats).loss, 0.25);
}

TEST(NseLoss, SingleBasinFullBatchIsOneMinusNse) {
    const std::vector<double> obs{0.5, 1.5, 2.0, 4.0, 3.0};
    const std::vector<double> sims{0.7, 1.1, 2.5, 3.2, 3.3};
    const BasinNormStats st = basin_norm_stats(MaskedSeries(obs), 0.0);
    const std::vector<BasinNormStats> stats(obs.size(), st);
    EXPECT_NEAR(nse_loss(sims, obs, stats).loss, 1.0 - nse(sims, MaskedSeries(obs)), 1e-14);
}

TEST(NseLoss, MatchesMseWhenDenominatorIsOne) {
    const std::vector<double> sims{0.2, -1.0, 3.0}, obs{0.0, 0.5, 2.0};
    const std::vector<BasinNormStats> stats(3, BasinNormStats{0.0, 0.9, 0.1});
    const LossResult a = nse_loss(sims, obs, stats);
    const LossResult b = mse_loss(sims, obs);
    EXPECT_DOUBLE_EQ(a.loss, b.loss);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(a.d_sim[i], b.d_sim[i]);
}

TEST(MseLoss, Basic) {
    const std::vector<double> sims{1, 3}, obs{0, 0};
    const LossResult r = mse_loss(sims, obs);
    EXPECT_DOUBLE_EQ(r.loss, 5.0);
    EXPECT_DOUBLE_EQ(r.d_sim[1], 3.0);
}

TEST(BasinStats, PopulationVariance) {
    const auto s = basin_norm_stats(MaskedSeries({1, 2, 3, 100}, {1, 1, 1, 0}), 0.1);
    EXPECT_DOUBLE_EQ(s.mean_obs, 2.0);
    EXPECT_DOUBLE_EQ(s.var_obs, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.denominator(), 2.0 / 3.0 + 0.1);
    EXPECT_THROW(basin_norm_stats(MaskedSeries({1.0}, {0}), 0.1), Error);
}

TEST(Summarize, HandComputed) {
    const std::vector<double> odd{-1, 0, 1};
    const NseSummary a = summarize(odd);
    EXPECT_EQ(a.median, 0.0);
    EXPECT_EQ(a.mean, 0.0);
    EXPECT_EQ(a.max, 1.0);
    EXPECT_EQ(a.min, -1.0);
    EXPECT_DOUBLE_EQ(a.std, std::sqrt(2.0 / 3.0));
    EXPECT_EQ(a.count_positive, 1u);
    EXPECT_EQ(a.count, 3u);

    const std::vector<double> even{4, 1, 3, 2};
    EXPECT_EQ(summarize(even).median, 2.5);

    const std::vector<double> neg{-0.2, -1.5, -0.7, -3.1};
    const NseSummary n = summarize(neg);
    EXPECT_DOUBLE_EQ(n.median, -1.1);
    EXPECT_DOUBLE_EQ(n.mean, -1.375);
    EXPECT_EQ(n.max, -0.2);
    EXPECT_EQ(n.min, -3.1);
    EXPECT_NEAR(n.std, 1.0985786271359916, 1e-15);
    EXPECT_EQ(n.count_positive, 0u);

    const std::vector<double> zero_is_not_positive{0.0, 0.0};
    EXPECT_EQ(summarize(zero_is_not_positive).count_positive, 0u);
    EXPECT_THROW(summarize({}), Error);
}

TEST(Summarize, CsvAndJson) {
    const std::vector<double> v{0.5, 0.25};
    const NseSummary s = summarize(v);
    EXPECT_EQ(summary_csv_header(), "median,mean,max,min,std,count_positive");
    EXPECT_EQ(summary_csv_row(s), "0.375,0.375,0.5,0.25,0.125,2");
    EXPECT_EQ(summary_to_json(s).at("count"), 2);
}
