#include "netclass/error.hpp"
#include "netclass/stats.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace netclass;

namespace {

ExpressionDataset two_gene_dataset(std::vector<double> a, std::vector<double> b) {
    std::vector<SampleId> samples;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < a.size(); ++i) {
        samples.push_back("s" + std::to_string(i));
        labels.push_back(i % 2);
    }
    std::vector<double> values = a;
    values.insert(values.end(), b.begin(), b.end());
    return ExpressionDataset({"a", "b"}, samples, values, labels);
}

}

TEST(Activity, SingleGeneIsIdentity) {
    auto ds = two_gene_dataset({1.5, -2, 3, 0.25}, {0, 0, 0, 0});
    std::vector<GeneId> g{"a"};
    auto act = stats::activity(ds, g);
    EXPECT_EQ(act, (std::vector<double>{1.5, -2, 3, 0.25}));
}

TEST(Activity, EqualPairScalesBySqrtTwo) {
    auto ds = two_gene_dataset({2, 2}, {2, 2});
    std::vector<GeneId> g{"a", "b"};
    for (double v : stats::activity(ds, g)) {
        EXPECT_NEAR(v, std::sqrt(2.0) * 2, 1e-15);
    }
}

TEST(Activity, MixedPair) {
    auto ds = two_gene_dataset({1.0, 1.0}, {-0.5, -0.5});
    std::vector<GeneId> g{"a", "b"};
    EXPECT_NEAR(stats::activity(ds, g)[0], 0.5 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(stats::activity(ds, g)[0], 0.35355, 1e-5);
}

TEST(Activity, Errors) {
    auto ds = two_gene_dataset({1, 2}, {3, 4});
    std::vector<GeneId> none;
    std::vector<GeneId> missing{"zzz"};
    EXPECT_THROW(stats::activity(ds, none), Error);
    try {
        stats::activity(ds, missing);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnmeasuredGene);
    }
}

TEST(Activity, LinearInExpression) {
    Rng rng(5);
    auto ds = oracle::random_dataset(4, oracle::random_labels(30, 3, rng), rng);
    std::vector<GeneId> g{"g0000", "g0002", "g0003"};
    auto act = stats::activity(ds, g);
    auto ref = oracle::activity(ds, g);
    for (std::size_t i = 0; i < act.size(); ++i) {
        EXPECT_NEAR(act[i], ref[i], 1e-12);
    }
}

TEST(TStatistic, IdenticalClassesGiveZero) {
    std::vector<double> v{1, 2, 3, 1, 2, 3};
    std::vector<Label> y{0, 0, 0, 1, 1, 1};
    EXPECT_NEAR(stats::t_statistic(v, y), 0.0, 1e-12);
}

TEST(TStatistic, LabelSwapFlipsSign) {
    std::vector<double> v{0.3, 1.2, -0.7, 2.2, 1.9, 0.4};
    std::vector<Label> y{0, 1, 0, 1, 1, 0};
    std::vector<Label> swapped;
    for (auto l : y) swapped.push_back(1 - l);
    EXPECT_DOUBLE_EQ(stats::t_statistic(v, y), -stats::t_statistic(v, swapped));
}

TEST(TStatistic, ConstantClassZeroIsFiniteAgainstOracle) {
    std::vector<double> v{1, 2, 3, 0, 0, 0};
    std::vector<Label> y{1, 1, 1, 0, 0, 0};
    // mean diff 2, var1 = 1, var0 = 0 -> 2 / sqrt(1/3)
    EXPECT_NEAR(stats::t_statistic(v, y), 2.0 / std::sqrt(1.0 / 3.0), 1e-12);
    EXPECT_NEAR(stats::t_statistic(v, y), static_cast<double>(oracle::welch_t(v, y)), 1e-12);
}

TEST(TStatistic, DegenerateIsNaN) {
    std::vector<double> v{1, 1, 1, 1};
    std::vector<Label> y{0, 0, 1, 1};
    EXPECT_TRUE(std::isnan(stats::t_statistic(v, y)));
    std::vector<Label> lonely{0, 0, 0, 1};
    std::vector<double> w{1, 2, 3, 4};
    EXPECT_TRUE(std::isnan(stats::t_statistic(w, lonely)));
}

TEST(Discretize, BinCounts) {
    EXPECT_EQ(stats::bin_count(8), 3u);
    EXPECT_EQ(stats::bin_count(2), 1u);
    EXPECT_EQ(stats::bin_count(1), 1u);
    EXPECT_EQ(stats::bin_count(9), 4u);
}

TEST(Discretize, Examples) {
    EXPECT_EQ(stats::discretize(std::vector<double>{0, 1}), (std::vector<std::uint32_t>{0, 0}));
    EXPECT_EQ(stats::discretize(std::vector<double>{0, 0.5, 1.0, 1.5}), (std::vector<std::uint32_t>{0, 0, 1, 1}));
    EXPECT_EQ(stats::discretize(std::vector<double>{3, 3, 3, 3, 3}), (std::vector<std::uint32_t>(5, 0)));
    auto b = stats::discretize(std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7});
    EXPECT_EQ(b.back(), 2u);
}

TEST(MutualInformation, Independent) {
    std::vector<std::uint32_t> bins{0, 1, 0, 1};
    std::vector<Label> y{0, 0, 1, 1};
    EXPECT_NEAR(stats::mutual_information(bins, y), 0.0, 1e-12);
}

TEST(MutualInformation, PerfectPredictionIsOneBit) {
    std::vector<std::uint32_t> bins{0, 0, 1, 1};
    std::vector<Label> y{0, 0, 1, 1};
    EXPECT_NEAR(stats::mutual_information(bins, y), 1.0, 1e-12);
}

TEST(MutualInformation, JointCountsAgainstOracle) {
    std::vector<std::uint32_t> bins{0, 0, 0, 1};
    std::vector<Label> y{0, 0, 1, 1};
    EXPECT_NEAR(stats::mutual_information(bins, y), static_cast<double>(oracle::mutual_information(bins, y)), 1e-12);
}

TEST(MutualInformation, PropertiesOnRandomInstances) {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 4 + rng() % 60;
        auto y = oracle::random_labels(n, 1, rng);
        std::vector<std::uint32_t> bins(n);
        for (auto& b : bins) b = rng() % 5;
        const double mi = stats::mutual_information(bins, y);
        EXPECT_GE(mi, 0.0);
        // Relabeling bins and classes leaves MI unchanged.
        std::vector<std::uint32_t> relabeled;
        for (auto b : bins) relabeled.push_back(4 - b);
        std::vector<Label> flipped;
        for (auto l : y) flipped.push_back(1 - l);
        EXPECT_NEAR(stats::mutual_information(relabeled, flipped), mi, 1e-12);
        // Bounded by the label entropy.
        double p = 0;
        for (auto l : y) p += l;
        p /= n;
        const double h = -(p > 0 ? p * std::log2(p) : 0) - (p < 1 ? (1 - p) * std::log2(1 - p) : 0);
        EXPECT_LE(mi, h + 1e-12);
    }
}

TEST(MutualInformation, BinnedVariantMatchesComposition) {
    Rng rng(3);
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 2 + rng() % 100;
        auto y = oracle::random_labels(n, 1, rng);
        std::vector<double> v(n);
        for (auto& x : v) x = norm(rng);
        EXPECT_EQ(stats::binned_mutual_information(v, y), stats::mutual_information(stats::discretize(v), y));
    }
}

TEST(Pearson, Examples) {
    std::vector<double> x{1, 2, 3};
    std::vector<double> neg{-1, -2, -3};
    std::vector<double> y{1, 2, 4};
    EXPECT_NEAR(stats::pearson(x, x), 1.0, 1e-15);
    EXPECT_NEAR(stats::pearson(x, neg), -1.0, 1e-15);
    // cov = 1.5, var x = 1, var y = 7/3
    EXPECT_NEAR(stats::pearson(x, y), 1.5 / std::sqrt(7.0 / 3.0), 1e-12);
    EXPECT_NEAR(stats::pearson(x, y), static_cast<double>(oracle::pearson(x, y)), 1e-12);
    std::vector<double> flat{2, 2, 2};
    EXPECT_TRUE(std::isnan(stats::pearson(x, flat)));
}

TEST(Auc, Examples) {
    std::vector<Label> y{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{3, 4, 1, 2}, y), 1.0);
    EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{1, 1, 1, 1}, y), 0.5);
    EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{0.9, 0.4, 0.6, 0.1}, y), 0.75);
    std::vector<Label> single{1, 1};
    try {
        stats::auc(std::vector<double>{1, 2}, single);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingleClass);
    }
}

TEST(Auc, ComplementWithoutTies) {
    Rng rng(17);
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 2 + rng() % 80;
        auto y = oracle::random_labels(n, 1, rng);
        std::vector<double> s(n), neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = norm(rng);
            neg[i] = -s[i];
        }
        EXPECT_NEAR(stats::auc(s, y), 1.0 - stats::auc(neg, y), 1e-12);
    }
}

TEST(Auc, MatchesPairwiseWithTies) {
    Rng rng(19);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 2 + rng() % 199;
        auto y = oracle::random_labels(n, 1, rng);
        std::vector<double> s(n);
        for (auto& v : s) v = static_cast<double>(rng() % 7);
        EXPECT_EQ(stats::auc(s, y), static_cast<double>(oracle::auc(s, y)));
    }
}

TEST(Jaccard, Examples) {
    std::set<GeneId> ab{"a", "b"}, bc{"b", "c"}, cd{"c", "d"}, empty;
    EXPECT_DOUBLE_EQ(stats::jaccard(ab, ab), 1.0);
    EXPECT_DOUBLE_EQ(stats::jaccard(ab, cd), 0.0);
    EXPECT_DOUBLE_EQ(stats::jaccard(ab, bc), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(stats::jaccard(empty, empty), 1.0);
}

TEST(Wilcoxon, AllPositiveFive) {
    std::vector<double> d{0.1, 0.2, 0.3, 0.4, 0.5};
    auto r = stats::wilcoxon_signed_rank(d, stats::Sidedness::Greater);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 32.0);
    EXPECT_DOUBLE_EQ(r.statistic, 15.0);
}

TEST(Wilcoxon, AllZerosRaises) {
    std::vector<double> d{0, 0, 0};
    try {
        stats::wilcoxon_signed_rank(d, stats::Sidedness::TwoSided);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllZeros);
    }
}

TEST(Wilcoxon, FlipRelationIncludesPointMass) {
    // Negating the differences swaps the tails; the two one-sided p-values
    // sum to 1 + P(W = w) because the observed value is counted in both.
    Rng rng(23);
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 3 + rng() % 10;
        std::vector<double> d(n), neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = norm(rng);
            neg[i] = -d[i];
        }
        auto o = oracle::wilcoxon_enumerate(d);
        const double point_mass = o.p_greater + o.p_less - 1.0;
        auto pg = stats::wilcoxon_signed_rank(d, stats::Sidedness::Greater).p_value;
        auto pg_flipped = stats::wilcoxon_signed_rank(neg, stats::Sidedness::Greater).p_value;
        EXPECT_NEAR(pg_flipped, 1.0 - pg + point_mass, 1e-12);
        EXPECT_GT(point_mass, 0.0);
    }
}

TEST(Wilcoxon, TwoSidedIsDoubledSmallerTail) {
    std::vector<double> d{1, -2, 3, 4, -5, 6, 7};
    auto o = oracle::wilcoxon_enumerate(d);
    auto r = stats::wilcoxon_signed_rank(d, stats::Sidedness::TwoSided);
    EXPECT_NEAR(r.p_value, std::min(1.0, 2 * std::min(o.p_greater, o.p_less)), 1e-12);
}

TEST(Wilcoxon, NormalApproximationNearExactAtCutover) {
    Rng rng(29);
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> d(20);
        for (auto& v : d) v = norm(rng) + 0.3;
        for (auto side : {stats::Sidedness::Greater, stats::Sidedness::Less, stats::Sidedness::TwoSided}) {
            auto exact = stats::wilcoxon_signed_rank(d, side);
            auto approx = stats::wilcoxon_signed_rank(d, side, true);
            EXPECT_TRUE(exact.exact);
            EXPECT_FALSE(approx.exact);
            EXPECT_NEAR(exact.p_value, approx.p_value, 0.01);
        }
    }
    std::vector<double> d25(25);
    for (auto& v : d25) v = norm(rng);
    EXPECT_FALSE(stats::wilcoxon_signed_rank(d25, stats::Sidedness::Greater).exact);
}

TEST(Wilcoxon, ZerosDroppedAndTiesMidranked) {
    std::vector<double> d{0, 1, -1, 2, 2, 0, 3};
    auto o = oracle::wilcoxon_enumerate(d);
    auto r = stats::wilcoxon_signed_rank(d, stats::Sidedness::Greater);
    EXPECT_EQ(r.n, 5u);
    EXPECT_DOUBLE_EQ(r.statistic, o.w);
    EXPECT_NEAR(r.p_value, o.p_greater, 1e-12);
}

TEST(Bonferroni, Examples) {
    auto a = stats::bonferroni(std::vector<double>{0.01, 0.02});
    EXPECT_DOUBLE_EQ(a[0], 0.02);
    EXPECT_DOUBLE_EQ(a[1], 0.04);
    std::vector<double> many(25, 0.01);
    many[0] = 0.9;
    EXPECT_DOUBLE_EQ(stats::bonferroni(many)[0], 1.0);
    EXPECT_TRUE(stats::bonferroni(std::vector<double>{}).empty());
}

TEST(Quantile, LinearInterpolation) {
    std::vector<double> v{0.5, 0.6, 0.7, 0.8, 0.9};
    EXPECT_NEAR(stats::quantile_sorted(v, 0.5), 0.7, 1e-15);
    EXPECT_NEAR(stats::quantile_sorted(v, 0.25), 0.6, 1e-15);
    std::vector<double> two{1, 2};
    EXPECT_NEAR(stats::quantile_sorted(two, 0.25), 1.25, 1e-15);
}
