#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "dgbd/gof.hpp"
#include "test_support.hpp"

using namespace dgbd;

namespace {

DgbdParams params(double scale, double b, double a, Rank r_max) { return {b, a, scale, 1, r_max}; }

// Model values at the mid-quantile ranks r_i = r_min + (i - 1/2)(r_max - r_min)/n.
RankSizeSample mid_quantile_sample(const DgbdParams& p, std::size_t n) {
    std::vector<double> v;
    const double span = static_cast<double>(p.rank_max - p.rank_min);
    for (std::size_t i = 1; i <= n; ++i)
        v.push_back(eval_dgbd(p, static_cast<double>(p.rank_min) + (static_cast<double>(i) - 0.5) * span / n));
    return RankSizeSample(std::move(v));
}

}  // namespace

TEST(Aic, Examples) {
    EXPECT_EQ(aic(2, 100, 100.0), 4.0);
    EXPECT_EQ(aic(1, 100, 100.0), 2.0);
    // 4 + 50 ln(0.1), evaluated at 40 digits with mpmath.
    EXPECT_NEAR(aic(2, 50, 5.0), -111.1292546497023, 1e-12);
}

TEST(Aic, PerfectFitAndErrors) {
    EXPECT_EQ(aic(3, 10, 0.0), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(aic(2, 10, -1.0), DomainError);
    EXPECT_THROW(aic(0, 10, 1.0), DomainError);
    EXPECT_THROW(aic(2, 0, 1.0), DomainError);
}

TEST(Aic, ParsimonyGap) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(1000);
        const double rss = std::exp(rng.uniform(-20.0, 20.0));
        const double gap = aic(3, n, rss) - aic(2, n, rss);
        EXPECT_NEAR(gap, 2.0, 1e-12 * std::max(1.0, std::abs(aic(2, n, rss))));
    }
}

TEST(SampleDgbd, DeterministicAndInRange) {
    const auto p = params(5, 0.5, 0.7, 100);
    const auto s1 = sample_dgbd(p, 5, 42);
    const auto s2 = sample_dgbd(p, 5, 42);
    ASSERT_EQ(s1.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(s1[i], s2[i]);
    EXPECT_NE(sample_dgbd(p, 5, 43)[0], s1[0]);

    const auto big = sample_dgbd(p, 2000, 1);
    for (double v : big.values()) {
        EXPECT_LE(v, eval_dgbd(p, 1));
        EXPECT_GE(v, eval_dgbd(p, 100));
    }
}

TEST(SampleDgbd, LogMomentMatchesLogUniform) {
    // b = 0, a = 1: ln x = ln C - ln U with U ~ U[1, 100].
    // E[ln U] and Var[ln U] in closed form (mpmath, 40 digits).
    constexpr double kMeanLnU = 3.651687056553628;
    constexpr double kVarLnU = 0.7836180752789145;
    const double scale = 20.0;
    const std::size_t n = 100000;
    const auto s = sample_dgbd(params(scale, 0.0, 1.0, 100), n, 2024);
    double mean = 0.0;
    for (double v : s.values()) mean += std::log(v);
    mean /= static_cast<double>(n);
    const double se = std::sqrt(kVarLnU / static_cast<double>(n));
    EXPECT_NEAR(mean, std::log(scale) - kMeanLnU, 3.0 * se);
}

TEST(SampleDgbd, RefusesNonMonotone) {
    EXPECT_THROW(sample_dgbd(params(1, 0.5, -0.2, 50), 10, 1), UnsupportedModelError);
}

TEST(KsStatistic, MidQuantileSampleGivesHalfJump) {
    for (std::size_t n : {5u, 40u, 150u}) {
        const auto p = params(5, 0.5, 0.7, 100);
        EXPECT_NEAR(ks_statistic(mid_quantile_sample(p, n), p), 0.5 / static_cast<double>(n), 1e-9) << n;
    }
}

TEST(KsStatistic, OutlierRaisesDistanceButStaysBounded) {
    const auto p = params(5, 0.5, 0.7, 100);
    const auto base = mid_quantile_sample(p, 50);
    std::vector<double> v(base.values().begin(), base.values().end());
    v.insert(v.begin(), 1e9);
    const double d = ks_statistic(RankSizeSample(v), p);
    EXPECT_GT(d, ks_statistic(base, p));
    EXPECT_LE(d, 1.0);

    // A sample entirely outside the model's range is at distance 1.
    EXPECT_NEAR(ks_statistic(RankSizeSample({1e9, 1e8, 1e7}), p), 1.0, 1e-12);
}

TEST(KsStatistic, JointRescalingInvariance) {
    const auto p = params(5, 0.6, 0.4, 80);
    const auto s = sample_dgbd(p, 80, 9);
    const double lambda = 1234.5;
    std::vector<double> v(s.values().begin(), s.values().end());
    for (auto& x : v) x *= lambda;
    auto q = p;
    q.scale *= lambda;
    EXPECT_NEAR(ks_statistic(RankSizeSample(v), q), ks_statistic(s, p), 1e-9);
}

TEST(KsStatistic, RangeProperty) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto sample = test::random_sample(rng, 3 + rng.below(100));
        const auto p = params(rng.uniform(0.1, 100.0), rng.uniform(0.0, 2.0), rng.uniform(0.01, 2.0),
                              static_cast<Rank>(sample.size()));
        const double d = ks_statistic(sample, p);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
}

TEST(KsStatistic, RefusesNonMonotone) {
    EXPECT_THROW(ks_statistic(RankSizeSample({3, 2, 1}), params(1, 0.2, -0.1, 3)), UnsupportedModelError);
}

TEST(Bootstrap, PValueIsMultipleOfResolution) {
    const auto s = sample_dgbd(params(100, 0.6, 0.5, 60), 60, 5);
    const auto fit = fit_dgbd(s);
    const auto res = bootstrap_pvalue(s, fit, 137, 7);
    EXPECT_EQ(res.replicates, 137u);
    EXPECT_EQ(res.seed, 7u);
    const double scaled = res.p_value * 137.0;
    EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
    EXPECT_EQ(static_cast<double>(res.exceed_count) / 137.0, res.p_value);
}

TEST(Bootstrap, DeterministicAndScheduleIndependent) {
    const auto s = sample_dgbd(params(100, 0.6, 0.5, 80), 80, 6);
    const auto fit = fit_dgbd(s);
    BootstrapOptions opts;
    opts.replicates = 200;
    opts.seed = 99;
    opts.threads = 1;
    const auto a = bootstrap_pvalue(s, fit, opts);
    opts.threads = 4;
    const auto b = bootstrap_pvalue(s, fit, opts);
    EXPECT_EQ(a.ks_statistic, b.ks_statistic);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(replicate_ks_values(fit.params, 80, opts), replicate_ks_values(fit.params, 80, opts));
}

TEST(Bootstrap, PValueMonotoneInObservedDistance) {
    const auto p = params(100, 0.6, 0.5, 100);
    BootstrapOptions opts;
    opts.replicates = 300;
    opts.seed = 1;
    const auto ks = replicate_ks_values(p, 100, opts);
    double prev = 1.0;
    for (double observed = 0.0; observed <= 0.5; observed += 0.005) {
        const double pv = pvalue_from(observed, ks);
        EXPECT_LE(pv, prev);
        prev = pv;
    }
    // Ties count toward the p-value.
    EXPECT_EQ(pvalue_from(ks[0], std::vector<double>{ks[0]}), 1.0);
}

TEST(Bootstrap, NoRefitSwitchChangesReplicateDistribution) {
    const auto p = params(100, 0.6, 0.5, 100);
    BootstrapOptions opts;
    opts.replicates = 100;
    opts.seed = 3;
    const auto refit = replicate_ks_values(p, 100, opts);
    opts.refit = false;
    const auto fixed = replicate_ks_values(p, 100, opts);
    // Refitting can only pull each replicate's model closer in mean.
    double mr = 0, mf = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        mr += refit[i];
        mf += fixed[i];
    }
    EXPECT_LT(mr, mf);
}

TEST(Bootstrap, Errors) {
    const auto s = sample_dgbd(params(100, 0.6, 0.5, 40), 40, 5);
    auto fit = fit_dgbd(s);
    EXPECT_THROW(bootstrap_pvalue(s, fit, 99, 1), ConfigError);
    fit.params.a = -0.1;
    EXPECT_THROW(bootstrap_pvalue(s, fit, 100, 1), UnsupportedModelError);
}

TEST(Bootstrap, RejectsExponentialDecay) {
    std::vector<double> v;
    for (int r = 1; r <= 150; ++r) v.push_back(std::exp(-r / 10.0));
    const RankSizeSample s(v);
    const auto fit = fit_dgbd(s);
    ASSERT_TRUE(fit.is_monotone());
    int rejected = 0;
    for (Seed seed = 0; seed < 10; ++seed)
        if (bootstrap_pvalue(s, fit, 200, seed).p_value < 0.05) ++rejected;
    EXPECT_GT(rejected, 5);
}

TEST(CompareModels, PurePowerLawPrefersPowerLaw) {
    const auto cmp = compare_models(test::powerlaw_sample(1000.0, 1.2, 100));
    EXPECT_EQ(cmp.winner, Model::PowerLaw);
}

TEST(CompareModels, ExactDgbdPrefersDgbd) {
    const auto cmp = compare_models(test::model_sample(params(100, 0.5, 0.7, 100)));
    EXPECT_EQ(cmp.winner, Model::Dgbd);
    EXPECT_EQ(cmp.aic_dgbd, -std::numeric_limits<double>::infinity());
}

TEST(CompareModels, NoisyDgbdPrefersDgbd) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = test::with_noise(test::model_sample(params(1000, 0.8, 0.4, 200)), 0.01, rng);
        EXPECT_EQ(compare_models(s).winner, Model::Dgbd) << trial;
    }
}

TEST(CompareModels, LogDifferenceDefinition) {
    Rng rng(23);
    const auto s = test::with_noise(test::model_sample(params(1000, 0.8, 0.4, 200)), 0.01, rng);
    const auto cmp = compare_models(s);
    ASSERT_TRUE(cmp.aic_dgbd < 0 && cmp.aic_powerlaw < 0);
    EXPECT_TRUE(cmp.log_diff_defined);
    EXPECT_NEAR(cmp.log_aic_diff, std::log(-cmp.aic_dgbd) - std::log(-cmp.aic_powerlaw), 1e-12);

}

TEST(CompareModels, MixedSignAicReportsRawDifference) {
    // n = 10: AIC_dgbd = 6 + 10 ln(0.1) < 0 and AIC_powerlaw = 4 + 10 ln(1) = 4.
    const auto s = RankSizeSample::from_unsorted({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
    DgbdFit dg;
    dg.rss = 1.0;
    PowerLawFit pl;
    pl.rss = 10.0;
    const auto cmp = compare_models(s, dg, pl);
    EXPECT_FALSE(cmp.log_diff_defined);
    EXPECT_NEAR(cmp.aic_powerlaw, 4.0, 1e-12);
    EXPECT_NEAR(cmp.log_aic_diff, cmp.aic_dgbd - 4.0, 1e-12);
    EXPECT_EQ(cmp.winner, Model::Dgbd);

    // Equal RSS: the smaller model wins by exactly the parsimony penalty.
    dg.rss = pl.rss = 2.0;
    const auto tie = compare_models(s, dg, pl);
    EXPECT_EQ(tie.winner, Model::PowerLaw);
    EXPECT_NEAR(tie.aic_dgbd - tie.aic_powerlaw, 2.0, 1e-12);
}

TEST(CompareModels, WinnerMatchesStrictAicOrdering) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = test::random_sample(rng, 3 + rng.below(100));
        const auto cmp = compare_models(s);
        EXPECT_EQ(cmp.winner == Model::Dgbd, cmp.aic_dgbd < cmp.aic_powerlaw);
    }
}
