#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "log.hpp"
#include "random.hpp"

namespace ppm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Predictor matrix plus binary outcome. Rows are patients.
struct Dataset {
    Matrix predictors;
    std::vector<int> outcome;
    std::vector<std::string> feature_names;
    std::string outcome_name = "y";
    bool standardized = false;

    std::size_t rows() const { return static_cast<std::size_t>(predictors.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(predictors.cols()); }

    auto row(std::size_t i) const { return predictors.row(static_cast<Eigen::Index>(i)); }

    std::size_t positives() const
    {
        return static_cast<std::size_t>(std::count(outcome.begin(), outcome.end(), 1));
    }

    double prevalence() const
    {
        return outcome.empty() ? 0.0 : static_cast<double>(positives()) / static_cast<double>(outcome.size());
    }

    // Rows in the given order (duplicates allowed, as in bootstrap resamples).
    Dataset subset(std::span<const std::size_t> rows_idx) const
    {
        Dataset out;
        out.feature_names = feature_names;
        out.outcome_name = outcome_name;
        out.standardized = standardized;
        out.predictors.resize(static_cast<Eigen::Index>(rows_idx.size()), predictors.cols());
        out.outcome.resize(rows_idx.size());
        for (std::size_t i = 0; i < rows_idx.size(); ++i) {
            out.predictors.row(static_cast<Eigen::Index>(i)) = row(rows_idx[i]);
            out.outcome[i] = outcome[rows_idx[i]];
        }
        return out;
    }
};

// Throws DataError when a Dataset breaks its invariants.
inline void validate_dataset(const Dataset& d)
{
    if (d.rows() == 0 || d.cols() == 0)
        throw DataError("dataset must have at least one row and one predictor");
    if (d.outcome.size() != d.rows())
        throw DataError("outcome length does not match predictor rows");
    if (!d.feature_names.empty() && d.feature_names.size() != d.cols())
        throw DataError("feature name count does not match predictor columns");
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.outcome[i] != 0 && d.outcome[i] != 1)
            throw DataError("row " + std::to_string(i) + ": outcome must be 0 or 1");
        for (std::size_t j = 0; j < d.cols(); ++j) {
            if (!std::isfinite(d.predictors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))))
                throw DataError("row " + std::to_string(i) + ", column " + std::to_string(j) + ": non-finite value");
        }
    }
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out)
{
    if (s.empty())
        return false;
    if (s.front() == '+')
        s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace detail

// Parses CSV text with a header row. The outcome column may sit anywhere;
// the remaining columns keep their order as predictors.
inline Dataset parse_csv(std::istream& in, std::string_view outcome_column, std::string_view source = "<csv>")
{
    const std::string src(source);
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!detail::trim(line).empty())
                return true;
        }
        return false;
    };

    if (!next_line())
        throw DataError(src + ": empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line.erase(0, 3); // UTF-8 BOM

    auto header = detail::split_commas(line);
    std::size_t outcome_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == outcome_column) {
            outcome_idx = j;
            break;
        }
    }
    if (outcome_idx == header.size())
        throw DataError(src + ": outcome column '" + std::string(outcome_column) + "' not found in header");
    if (header.size() < 2)
        throw DataError(src + ": need at least one predictor column besides the outcome");

    Dataset d;
    d.outcome_name = std::string(outcome_column);
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != outcome_idx)
            d.feature_names.emplace_back(header[j]);

    const std::size_t p = header.size() - 1;
    std::vector<double> values;
    while (next_line()) {
        auto cells = detail::split_commas(line);
        if (cells.size() != header.size())
            throw DataError(src + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            if (!detail::parse_double(cells[j], v) || !std::isfinite(v))
                throw DataError(src + ":" + std::to_string(line_no) + ": column '" + std::string(header[j]) +
                                "': non-numeric value '" + std::string(cells[j]) + "'");
            if (j == outcome_idx) {
                if (v != 0.0 && v != 1.0)
                    throw DataError(src + ":" + std::to_string(line_no) + ": column '" + std::string(header[j]) +
                                    "': outcome value '" + std::string(cells[j]) + "' is not 0 or 1");
                d.outcome.push_back(static_cast<int>(v));
            } else {
                values.push_back(v);
            }
        }
    }
    if (d.outcome.empty())
        throw DataError(src + ": no data rows");

    d.predictors.resize(static_cast<Eigen::Index>(d.outcome.size()), static_cast<Eigen::Index>(p));
    std::copy(values.begin(), values.end(), d.predictors.data());
    return d;
}

inline Dataset load_csv(const std::string& path, std::string_view outcome_column)
{
    std::ifstream in(path);
    if (!in)
        throw DataError(path + ": cannot open file");
    return parse_csv(in, outcome_column, path);
}

// Predictors first, outcome last, 17 significant digits.
inline void write_csv(const Dataset& d, std::ostream& out)
{
    for (std::size_t j = 0; j < d.cols(); ++j)
        out << (d.feature_names.empty() ? "x" + std::to_string(j + 1) : d.feature_names[j]) << ',';
    out << d.outcome_name << '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j)
            out << format_double(d.predictors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 17) << ',';
        out << d.outcome[i] << '\n';
    }
}

inline void write_csv(const Dataset& d, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError(path + ": cannot open for writing");
    write_csv(d, out);
}

// Column-wise min-max map onto [-1, 1]. Constant columns map to 0.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    static MinMaxScaler fit(const Dataset& d)
    {
        MinMaxScaler s;
        for (Eigen::Index j = 0; j < d.predictors.cols(); ++j) {
            auto col = d.predictors.col(j);
            if (!col.allFinite())
                throw DataError("column " + std::to_string(j) + ": non-finite value");
            s.min.push_back(col.minCoeff());
            s.max.push_back(col.maxCoeff());
        }
        return s;
    }

    double transform(std::size_t j, double x, bool clamp) const
    {
        if (max[j] == min[j])
            return 0.0;
        double v = 2.0 * (x - min[j]) / (max[j] - min[j]) - 1.0;
        return clamp ? std::clamp(v, -1.0, 1.0) : v;
    }

    // clamp=true when applying training-set bounds to other rows.
    Dataset apply(const Dataset& d, bool clamp) const
    {
        if (d.cols() != min.size())
            throw ConfigError("scaler was fit on a different number of columns");
        Dataset out = d;
        for (Eigen::Index i = 0; i < out.predictors.rows(); ++i)
            for (Eigen::Index j = 0; j < out.predictors.cols(); ++j)
                out.predictors(i, j) = transform(static_cast<std::size_t>(j), d.predictors(i, j), clamp);
        out.standardized = true;
        return out;
    }
};

inline Dataset standardize(const Dataset& d)
{
    if (d.standardized)
        throw ConfigError("dataset is already standardized");
    return MinMaxScaler::fit(d).apply(d, false);
}

struct SplitPair {
    Dataset trte;
    Dataset validation;
    std::vector<std::size_t> trte_rows;
    std::vector<std::size_t> validation_rows;
    double q = 0.2;
    std::uint64_t seed = 0;
};

inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

inline std::size_t round_count(std::size_t n, double frac)
{
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * frac));
}

// Hold-out split: round(n*q) validation rows, the rest TrTe. Each side keeps
// the original row order.
inline SplitPair split_holdout(const Dataset& d, double q, std::uint64_t seed)
{
    if (!(q > 0.0 && q < 1.0))
        throw ConfigError("hold-out fraction q must lie in (0, 1)");
    const std::size_t n = d.rows();
    const std::size_t n_val = round_count(n, q);
    if (n_val == 0 || n_val >= n)
        throw ConfigError("hold-out split leaves an empty side (n=" + std::to_string(n) + ")");
    if (static_cast<double>(n) * q < 30.0)
        log_warning("hold-out validation set has fewer than 30 rows");

    auto perm = random_permutation(n, seed);
    SplitPair sp;
    sp.q = q;
    sp.seed = seed;
    sp.validation_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    sp.trte_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
    std::sort(sp.validation_rows.begin(), sp.validation_rows.end());
    std::sort(sp.trte_rows.begin(), sp.trte_rows.end());
    sp.validation = d.subset(sp.validation_rows);
    sp.trte = d.subset(sp.trte_rows);
    return sp;
}

struct FoldAssignment {
    std::vector<int> fold_index;
    int K = 0;
    int repeat_id = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_rows(int k) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_index.size(); ++i)
            if (fold_index[i] == k)
                out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_rows(int k) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_index.size(); ++i)
            if (fold_index[i] != k)
                out.push_back(i);
        return out;
    }
};

// Balanced random fold labels; a fresh permutation per repeat_id.
inline FoldAssignment kfold_partition(std::size_t n, int K, int repeat_id, std::uint64_t seed)
{
    if (K < 2 || static_cast<std::size_t>(K) > n)
        throw ConfigError("fold count K must satisfy 2 <= K <= n");
    auto perm = random_permutation(n, derive_seed(seed, {stream::kfold, static_cast<std::uint64_t>(repeat_id)}));
    FoldAssignment fa;
    fa.K = K;
    fa.repeat_id = repeat_id;
    fa.seed = seed;
    fa.fold_index.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        fa.fold_index[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(K));
    return fa;
}

inline FoldAssignment kfold_partition(const Dataset& d, int K, int repeat_id, std::uint64_t seed)
{
    return kfold_partition(d.rows(), K, repeat_id, seed);
}

} // namespace ppm
