#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"

namespace ppm {

// dot(a,b) / (|a| |b|), clamped to [-1, 1]. Zero vectors have no direction
// and are rejected.
template <class A, class B>
double cosine_similarity(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b)
{
    if (a.size() != b.size())
        throw ConfigError("cosine_similarity: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.derived().coeff(i);
        const double y = b.derived().coeff(i);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0)
        throw DataError("cosine_similarity: zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b)
{
    using Map = Eigen::Map<const Eigen::VectorXd>;
    return cosine_similarity(Map(a.data(), static_cast<Eigen::Index>(a.size())),
                             Map(b.data(), static_cast<Eigen::Index>(b.size())));
}

struct SimilarityScores {
    std::vector<double> scores;
    std::size_t index_id = 0;
};

template <class Row>
SimilarityScores score_all(const Eigen::DenseBase<Row>& index, const Dataset& train, std::size_t index_id = 0)
{
    if (!train.standardized)
        throw ConfigError("score_all: training data must be standardized");
    if (static_cast<std::size_t>(index.size()) != train.cols())
        throw ConfigError("score_all: index patient has " + std::to_string(index.size()) + " predictors, training data has " +
                          std::to_string(train.cols()));
    SimilarityScores out;
    out.index_id = index_id;
    out.scores.resize(train.rows());
    for (std::size_t k = 0; k < train.rows(); ++k) {
        try {
            out.scores[k] = cosine_similarity(index, train.row(k));
        } catch (const DataError&) {
            throw DataError("score_all: zero vector (index patient " + std::to_string(index_id) + " or training row " +
                            std::to_string(k) + ")");
        }
    }
    return out;
}

namespace detail {
// Strict total order: higher score first, then smaller row index.
struct MoreSimilar {
    const std::vector<double>* s;
    bool operator()(std::size_t a, std::size_t b) const
    {
        const double sa = (*s)[a], sb = (*s)[b];
        return sa > sb || (sa == sb && a < b);
    }
};
} // namespace detail

// All training rows from most to least similar.
inline std::vector<std::size_t> similarity_order(const SimilarityScores& scores)
{
    std::vector<std::size_t> order(scores.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), detail::MoreSimilar{&scores.scores});
    return order;
}

struct Subpopulation {
    std::vector<std::size_t> row_indices; // ascending
    std::size_t M = 0;
};

// The M most similar rows, ties at the cut going to the smaller row index.
inline Subpopulation top_m(const SimilarityScores& scores, std::size_t M)
{
    const std::size_t n = scores.scores.size();
    if (M < 1 || M > n)
        throw ConfigError("top_m: M=" + std::to_string(M) + " outside [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (M < n)
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(M - 1), idx.end(),
                         detail::MoreSimilar{&scores.scores});
    idx.resize(M);
    std::sort(idx.begin(), idx.end());
    return {std::move(idx), M};
}

// Same set as top_m, read off a precomputed similarity_order.
inline Subpopulation top_m_from_order(const std::vector<std::size_t>& order, std::size_t M)
{
    if (M < 1 || M > order.size())
        throw ConfigError("top_m: M=" + std::to_string(M) + " outside [1, " + std::to_string(order.size()) + "]");
    std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(M));
    std::sort(idx.begin(), idx.end());
    return {std::move(idx), M};
}

} // namespace ppm
