#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ppm/glm.hpp"

using namespace ppm;

namespace {

Dataset two_clusters(std::size_t per_cluster, std::uint64_t seed, bool all_positive_a = false)
{
    // Cluster A points along +x, cluster B along +y: every within-cluster
    // cosine exceeds every cross-cluster one.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    d.predictors.resize(static_cast<Eigen::Index>(2 * per_cluster), 2);
    for (std::size_t i = 0; i < 2 * per_cluster; ++i) {
        const bool a = i < per_cluster;
        const double main = 0.5 + 0.5 * u(rng), off = 0.1 * u(rng);
        d.predictors(static_cast<Eigen::Index>(i), 0) = a ? main : off;
        d.predictors(static_cast<Eigen::Index>(i), 1) = a ? off : main;
        d.outcome.push_back(a && all_positive_a ? 1 : (u(rng) < 0.4 ? 1 : 0));
    }
    d.standardized = true;
    return d;
}

} // namespace

TEST(FitLogistic, InterceptOnlyMatchesClosedForm)
{
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 1);
    std::vector<int> y{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    auto m = fit_logistic(X, y);
    EXPECT_TRUE(m.converged);
    EXPECT_NEAR(m.coefficients[0], std::log(0.3 / 0.7), 1e-10);
    EXPECT_NEAR(m.coefficients[1], 0.0, 1e-10);
    EXPECT_TRUE(m.ridge_retry); // zero column: singular without the ridge
}

TEST(FitLogistic, CompleteSeparationIsFlagged)
{
    Eigen::MatrixXd X(2, 1);
    X << -1, 1;
    std::vector<int> y{0, 1};
    auto m = fit_logistic(X, y);
    EXPECT_TRUE(m.separation_flag);
    EXPECT_TRUE(m.coefficients.allFinite());
}

TEST(FitLogistic, MatchesReferenceOptimizer)
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 50;
    Eigen::MatrixXd X(n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = g(rng);
        X(i, 1) = g(rng);
        const double eta = 0.5 - 1.0 * X(i, 0) + 2.0 * X(i, 1);
        y[static_cast<std::size_t>(i)] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    auto m = fit_logistic(X, y);
    Eigen::MatrixXd design(n, 3);
    design.col(0).setOnes();
    design.rightCols(2) = X;
    const Eigen::VectorXd ref = oracle::logistic_mle(design, y);
    ASSERT_TRUE(m.converged);
    for (int j = 0; j < 3; ++j)
        EXPECT_NEAR(m.coefficients[j], ref[j], 1e-6);
}

TEST(FitLogistic, RejectsDegenerateInput)
{
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
    EXPECT_THROW(fit_logistic(X, std::vector<int>{1, 1, 1}), DataError);
    EXPECT_THROW(fit_logistic(X, std::vector<int>{1, 0}), ConfigError);
    EXPECT_THROW(fit_logistic(X, std::vector<int>{1, 0, 2}), DataError);
    FitConfig bad;
    bad.max_iter = 0;
    EXPECT_THROW(fit_logistic(X, std::vector<int>{1, 0, 0}, bad), ConfigError);
}

TEST(PredictProb, HandValues)
{
    LogisticModel m;
    m.coefficients = Eigen::Vector2d(0.0, 0.0);
    EXPECT_EQ(predict_prob(m, Eigen::VectorXd::Constant(1, 3.7)), 0.5);
    m.coefficients = Eigen::Vector2d(-3.0, 1.0);
    EXPECT_EQ(predict_prob(m, Eigen::VectorXd::Constant(1, 3.0)), 0.5);
    m.coefficients = Eigen::Vector2d(0.0, 2.0);
    EXPECT_NEAR(predict_prob(m, Eigen::VectorXd::Constant(1, 1.0)), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(PredictProb, ClampedAwayFromZeroAndOne)
{
    LogisticModel m;
    m.coefficients = Eigen::Vector2d(0.0, 100.0);
    const double hi = predict_prob(m, Eigen::VectorXd::Constant(1, 1.0));
    const double lo = predict_prob(m, Eigen::VectorXd::Constant(1, -1.0));
    EXPECT_LT(hi, 1.0);
    EXPECT_GT(lo, 0.0);
}

TEST(Ppm, SingleClassSubpopulationFallsBack)
{
    Dataset d = two_clusters(30, 2, true);
    const Eigen::RowVector2d index(0.9, 0.05);
    const std::size_t M = 20;
    const auto r = predict_ppm(index, d, M);
    EXPECT_TRUE(r.fallback);
    EXPECT_DOUBLE_EQ(r.probability, (M + 0.5) / (M + 1.0));
}

TEST(Ppm, FullPopulationEqualsGlobalModel)
{
    Dataset d = two_clusters(40, 3);
    const auto global = fit_logistic(d.predictors, d.outcome);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto r = predict_ppm(d.row(i), d, d.rows());
        EXPECT_EQ(r.probability, predict_prob(global, d.row(i)));
    }
}

TEST(Ppm, SmallSubpopulationStaysInOwnCluster)
{
    Dataset d = two_clusters(25, 5);
    const Eigen::RowVector2d index(0.8, 0.02);
    const auto sub = top_m(score_all(index, d), 10);
    for (auto r : sub.row_indices)
        EXPECT_LT(r, 25u);
}
