#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ppm/similarity.hpp"

using namespace ppm;

namespace {

Dataset rows_dataset(const std::vector<std::vector<double>>& rows)
{
    Dataset d;
    d.predictors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            d.predictors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    d.outcome.assign(rows.size(), 0);
    d.standardized = true;
    return d;
}

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

} // namespace

TEST(Cosine, SelfSimilarityIsOne)
{
    EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{0.3, -0.7, 0.1}, {0.3, -0.7, 0.1}), 1.0);
}

TEST(Cosine, OrthogonalIsZero) { EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, {0, 1}), 0.0); }

TEST(Cosine, HandComputed)
{
    EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 2, 3}, {-1, 0, 2}), 5.0 / (std::sqrt(14.0) * std::sqrt(5.0)),
                1e-15);
}

TEST(Cosine, RejectsZeroVectorAndLengthMismatch)
{
    EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, {1, 2}), DataError);
    EXPECT_THROW(cosine_similarity(std::vector<double>{1, 0}, {1, 2, 3}), ConfigError);
}

TEST(Cosine, StaysInsideUnitInterval)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> a(5), b(5);
        for (int j = 0; j < 5; ++j) {
            a[j] = u(rng);
            b[j] = u(rng);
        }
        const double c = cosine_similarity(a, b);
        EXPECT_GE(c, -1.0);
        EXPECT_LE(c, 1.0);
        EXPECT_DOUBLE_EQ(c, cosine_similarity(b, a));
    }
}

TEST(ScoreAll, ExactCopyRanksFirstAndNegationLast)
{
    Dataset train = rows_dataset({{0.5, 0.1, -0.3}, {0.2, -0.4, 0.9}, {-0.2, 0.4, -0.9}, {0.1, 0.1, 0.1}});
    const auto index = vec({0.2, -0.4, 0.9});
    const auto s = score_all(index, train);
    EXPECT_DOUBLE_EQ(s.scores[1], 1.0);
    EXPECT_DOUBLE_EQ(s.scores[2], -1.0);
    const auto order = similarity_order(s);
    EXPECT_EQ(order.front(), 1u);
    EXPECT_EQ(order.back(), 2u);
}

TEST(ScoreAll, MatchesDirectCalls)
{
    Dataset train = rows_dataset({{0.5, 0.1}, {-0.2, 0.7}, {0.9, -0.9}});
    const auto index = vec({0.3, 0.6});
    const auto s = score_all(index, train);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_EQ(s.scores[k], cosine_similarity(index, train.row(k)));
}

TEST(ScoreAll, RequiresStandardizedTraining)
{
    Dataset train = rows_dataset({{0.5, 0.1}});
    train.standardized = false;
    EXPECT_THROW(score_all(vec({1, 1}), train), ConfigError);
}

TEST(TopM, DirectOrder)
{
    SimilarityScores s{{0.9, 0.1, 0.5}, 0};
    EXPECT_EQ(top_m(s, 2).row_indices, (std::vector<std::size_t>{0, 2}));
}

TEST(TopM, FullPopulation)
{
    SimilarityScores s{{0.9, 0.1, 0.5}, 0};
    EXPECT_EQ(top_m(s, 3).row_indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(TopM, TiesGoToSmallerIndex)
{
    SimilarityScores s{{0.5, 0.5, 0.4}, 0};
    EXPECT_EQ(top_m(s, 1).row_indices, (std::vector<std::size_t>{0}));
}

TEST(TopM, AgreesWithPrecomputedOrder)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> u(0, 20);
    SimilarityScores s;
    for (int i = 0; i < 300; ++i)
        s.scores.push_back(u(rng) / 20.0);
    const auto order = similarity_order(s);
    for (std::size_t M : {1u, 7u, 150u, 299u, 300u})
        EXPECT_EQ(top_m(s, M).row_indices, top_m_from_order(order, M).row_indices);
}

TEST(TopM, RejectsOutOfRangeM)
{
    SimilarityScores s{{0.9, 0.1}, 0};
    EXPECT_THROW(top_m(s, 0), ConfigError);
    EXPECT_THROW(top_m(s, 3), ConfigError);
}
