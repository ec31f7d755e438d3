#include "netclass/classifiers.hpp"
#include "netclass/error.hpp"
#include "netclass/stats.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace netclass;

namespace {

/// Feature matrix from row-major samples.
FeatureMatrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.n_samples = rows.size();
    const std::size_t p = rows.empty() ? 0 : rows[0].size();
    for (std::size_t c = 0; c < p; ++c) {
        for (const auto& r : rows) m.values.push_back(r[c]);
        m.column_ids.push_back("f" + std::to_string(c));
        m.unit_offsets.push_back(c + 1);
    }
    return m;
}

std::vector<std::vector<double>> gaussian_rows(const std::vector<Label>& y, std::size_t p, double shift, Rng& rng) {
    std::normal_distribution<double> norm;
    std::vector<std::vector<double>> rows(y.size(), std::vector<double>(p));
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (auto& v : rows[i]) v = norm(rng) + (y[i] ? shift : 0.0);
    }
    return rows;
}

/// (|x - m0|^2 - |x - m1|^2) / |m1 - m0|, computed directly from the class means.
long double nmc_oracle(const std::vector<std::vector<double>>& train, const std::vector<Label>& y,
                       const std::vector<double>& x) {
    const std::size_t p = x.size();
    std::vector<long double> m0(p, 0), m1(p, 0);
    long double n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto& m = y[i] ? m1 : m0;
        (y[i] ? n1 : n0) += 1;
        for (std::size_t c = 0; c < p; ++c) m[c] += train[i][c];
    }
    long double d0 = 0, d1 = 0, gap = 0;
    for (std::size_t c = 0; c < p; ++c) {
        m0[c] /= n0;
        m1[c] /= n1;
        d0 += (x[c] - m0[c]) * (x[c] - m0[c]);
        d1 += (x[c] - m1[c]) * (x[c] - m1[c]);
        gap += (m1[c] - m0[c]) * (m1[c] - m0[c]);
    }
    return (d0 - d1) / std::sqrt(gap);
}

long double gradient_max_norm(const TrainedLogReg& model, const std::vector<std::vector<double>>& rows,
                              const std::vector<Label>& y) {
    const std::size_t p = model.weights.size();
    std::vector<long double> g(p + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        long double eta = model.intercept;
        for (std::size_t c = 0; c < p; ++c) eta += model.weights[c] * rows[i][c];
        const long double r = y[i] - 1 / (1 + std::exp(-eta));
        g[0] += r;
        for (std::size_t c = 0; c < p; ++c) g[c + 1] += r * rows[i][c];
    }
    long double worst = 0;
    for (auto v : g) worst = std::max(worst, std::abs(v));
    return worst;
}

}

TEST(NMC, TrainExamples) {
    std::vector<Label> y{0, 0, 1, 1};
    auto m = nmc_train(rows_to_matrix({{0, 0}, {0, 0}, {1, 1}, {1, 1}}), y);
    EXPECT_EQ(m.mean_good, (std::vector<double>{0, 0}));
    EXPECT_EQ(m.mean_poor, (std::vector<double>{1, 1}));
    auto dup = nmc_train(rows_to_matrix({{0, 0}, {0, 0}, {1, 1}, {1, 1}, {0, 0}, {0, 0}, {1, 1}, {1, 1}}),
                         std::vector<Label>{0, 0, 1, 1, 0, 0, 1, 1});
    EXPECT_EQ(dup.mean_good, m.mean_good);
    EXPECT_EQ(dup.mean_poor, m.mean_poor);
    auto one = nmc_train(rows_to_matrix({{3, -1}, {2, 5}}), std::vector<Label>{1, 0});
    EXPECT_EQ(one.mean_poor, (std::vector<double>{3, -1}));
    EXPECT_EQ(one.mean_good, (std::vector<double>{2, 5}));
    EXPECT_THROW(nmc_train(rows_to_matrix({{1}, {2}}), std::vector<Label>{1, 1}), Error);
}

TEST(NMC, ScoreExamples) {
    std::vector<Label> y{0, 1};
    auto model = nmc_train(rows_to_matrix({{0, 0}, {3, 4}}), y);
    auto s = nmc_score(model, rows_to_matrix({{3, 4}, {1.5, 2}, {0, 0}, {-4, 3}, {6, 8}}));
    EXPECT_NEAR(s[0], 5.0, 1e-12);
    EXPECT_NEAR(s[1], 0.0, 1e-12);
    EXPECT_NEAR(s[2], -5.0, 1e-12);
    // (-4, 3) is orthogonal to the mean axis and projects onto the good mean.
    EXPECT_NEAR(s[3], -5.0, 1e-12);
    EXPECT_NEAR(s[4], 15.0, 1e-12);
}

TEST(NMC, DegenerateScoresZero) {
    auto model = nmc_train(rows_to_matrix({{1, 1}, {1, 1}}), std::vector<Label>{0, 1});
    EXPECT_TRUE(model.degenerate);
    for (double v : nmc_score(model, rows_to_matrix({{0, 5}, {2, 2}}))) EXPECT_EQ(v, 0.0);
}

TEST(NMC, MatchesProjectionOracle) {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = 1 + rng() % 6;
        auto y = oracle::random_labels(10 + rng() % 20, 1, rng);
        auto rows = gaussian_rows(y, p, 0.7, rng);
        auto model = nmc_train(rows_to_matrix(rows), y);
        auto test = gaussian_rows(y, p, 0.0, rng);
        auto s = nmc_score(model, rows_to_matrix(test));
        for (std::size_t i = 0; i < test.size(); ++i) {
            EXPECT_NEAR(s[i], static_cast<double>(nmc_oracle(rows, y, test[i])), 1e-10);
        }
    }
}

TEST(NMC, OrthogonalInvariance) {
    Rng rng(32);
    std::normal_distribution<double> norm;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = 2 + rng() % 5;
        auto y = oracle::random_labels(30, 3, rng);
        auto train = gaussian_rows(y, p, 0.5, rng);
        auto test = gaussian_rows(y, p, 0.0, rng);
        Eigen::MatrixXd a(p, p);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = 0; c < p; ++c) a(r, c) = norm(rng);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
        auto rotate = [&](std::vector<std::vector<double>> rows) {
            for (auto& r : rows) {
                Eigen::VectorXd v = q * Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(p));
                r.assign(v.data(), v.data() + p);
            }
            return rows;
        };
        auto base = nmc_score(nmc_train(rows_to_matrix(train), y), rows_to_matrix(test));
        auto rot = nmc_score(nmc_train(rows_to_matrix(rotate(train)), y), rows_to_matrix(rotate(test)));
        for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base[i], rot[i], 1e-10);
    }
}

TEST(NMC, TranslationKeepsAuc) {
    Rng rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        auto y = oracle::random_labels(30, 3, rng);
        auto train = gaussian_rows(y, 3, 0.5, rng);
        auto test = gaussian_rows(y, 3, 0.2, rng);
        auto shifted_train = train, shifted_test = test;
        for (auto* rows : {&shifted_train, &shifted_test}) {
            for (auto& r : *rows) {
                r[0] += 10;
                r[1] -= 3;
                r[2] += 0.5;
            }
        }
        auto a = nmc_score(nmc_train(rows_to_matrix(train), y), rows_to_matrix(test));
        auto b = nmc_score(nmc_train(rows_to_matrix(shifted_train), y), rows_to_matrix(shifted_test));
        EXPECT_NEAR(stats::auc(a, y), stats::auc(b, y), 1e-12);
    }
}

TEST(NMC, TrainingScoreMeansSeparate) {
    // Mean training score of poor samples minus that of good samples is exactly 2 |mu_poor - mu_good|.
    Rng rng(34);
    std::size_t below_half = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        auto y = oracle::random_labels(8 + rng() % 30, 1, rng);
        auto rows = gaussian_rows(y, 1 + rng() % 5, 0.0, rng);
        auto X = rows_to_matrix(rows);
        auto model = nmc_train(X, y);
        ASSERT_FALSE(model.degenerate);
        auto s = nmc_score(model, X);
        long double poor = 0, good = 0, n1 = 0, gap = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            (y[i] ? poor : good) += s[i];
            n1 += y[i];
        }
        for (std::size_t c = 0; c < model.mean_good.size(); ++c) {
            const long double d = model.mean_poor[c] - model.mean_good[c];
            gap += d * d;
        }
        const long double diff = poor / n1 - good / (s.size() - n1);
        EXPECT_NEAR(static_cast<double>(diff), static_cast<double>(2 * std::sqrt(gap)), 1e-9);
        below_half += stats::auc(s, y) < 0.5;
    }
    // Rank order can still invert (see OutlierInvertsTrainingAuc); under pure noise this stays rare.
    EXPECT_LT(below_half, 50u);
}

TEST(NMC, OutlierInvertsTrainingAuc) {
    // good = {0, 0, 0, 10}, poor = {1, 1, 1}: the outlier pulls the good mean past the poor mean.
    std::vector<Label> y{0, 0, 0, 0, 1, 1, 1};
    auto X = rows_to_matrix({{0}, {0}, {0}, {10}, {1}, {1}, {1}});
    auto s = nmc_score(nmc_train(X, y), X);
    EXPECT_DOUBLE_EQ(stats::auc(s, y), 0.25);
}

TEST(LogReg, SeparableFlagged) {
    auto model = logreg_train(rows_to_matrix({{-2}, {-1}, {1}, {2}}), std::vector<Label>{0, 0, 1, 1});
    EXPECT_FALSE(model.converged);
    EXPECT_EQ(model.failure, ConvergenceFailure::Separation);
    EXPECT_THROW(logreg_score(model, rows_to_matrix({{0}})), Error);
}

TEST(LogReg, OverlappingGaussians) {
    Rng rng(35);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Label> y(200, 0);
        for (std::size_t i = 100; i < 200; ++i) y[i] = 1;
        const double shift = rep % 2 ? 0.8 : -0.8;
        auto rows = gaussian_rows(y, 1, shift, rng);
        auto model = logreg_train(rows_to_matrix(rows), y);
        ASSERT_TRUE(model.converged);
        EXPECT_EQ(model.weights[0] > 0, shift > 0);
        EXPECT_LE(gradient_max_norm(model, rows, y), 1e-8);
    }
}

TEST(LogReg, ZeroDesignGivesInterceptOnly) {
    std::vector<Label> y{0, 1, 1, 0, 1};
    auto model = logreg_train(rows_to_matrix({{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}), y);
    ASSERT_TRUE(model.converged);
    EXPECT_EQ(model.weights, (std::vector<double>{0, 0}));
    EXPECT_NEAR(model.intercept, std::log(3.0 / 2.0), 1e-10);
}

TEST(LogReg, ScoreLink) {
    TrainedLogReg zero;
    zero.weights = {0, 0};
    zero.converged = true;
    for (double v : logreg_score(zero, rows_to_matrix({{1, 2}, {-5, 9}}))) EXPECT_EQ(v, 0.5);
    TrainedLogReg one;
    one.weights = {1};
    one.converged = true;
    auto s = logreg_score(one, rows_to_matrix({{-800}, {-30}, {-3}, {0}, {3}, {30}, {800}}));
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i], s[i - 1]);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        EXPECT_GT(s[i], 0.0);
        EXPECT_LT(s[i], 1.0);
    }
    for (double v : s) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(LogReg, ConvergedOrFlaggedProperty) {
    Rng rng(36);
    std::size_t converged = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto y = oracle::random_labels(10 + rng() % 60, 2, rng);
        const std::size_t p = 1 + rng() % 6;
        auto rows = gaussian_rows(y, p, 0.5, rng);
        auto model = logreg_train(rows_to_matrix(rows), y);
        if (model.converged) {
            ++converged;
            EXPECT_LE(gradient_max_norm(model, rows, y), 1e-8);
        } else {
            EXPECT_NE(model.failure, ConvergenceFailure::None);
        }
    }
    EXPECT_GT(converged, 100u);
}

TEST(Serialization, ModelsToJson) {
    auto nmc = nmc_train(rows_to_matrix({{0}, {1}}), std::vector<Label>{0, 1});
    auto j = to_json(nmc);
    EXPECT_EQ(j["mean_poor"][0].get<double>(), 1.0);
    auto lr = logreg_train(rows_to_matrix({{-2}, {-1}, {1}, {2}}), std::vector<Label>{0, 0, 1, 1});
    EXPECT_EQ(to_json(lr)["converged"].get<bool>(), false);
}
