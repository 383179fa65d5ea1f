#pragma once

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "glm.hpp"
#include "log.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "similarity.hpp"

namespace ppm {

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

// Sample quantile by linear interpolation between order statistics (R type 7).
inline double quantile_type7(std::span<const double> sorted, double prob)
{
    if (sorted.empty())
        throw ConfigError("quantile of an empty sample");
    prob = std::clamp(prob, 0.0, 1.0);
    const double h = static_cast<double>(sorted.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size())
        return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct BcaInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    double z0 = 0.0; // bias correction
    double a = 0.0;  // acceleration
    bool z0_clamped = false;
};

// Jackknife acceleration: sum (mean - t_i)^3 / (6 [sum (mean - t_i)^2]^(3/2)).
inline double jackknife_acceleration(std::span<const double> jack)
{
    if (jack.size() < 2)
        return 0.0;
    double mean = 0.0;
    for (double t : jack)
        mean += t;
    mean /= static_cast<double>(jack.size());
    double s2 = 0.0, s3 = 0.0;
    for (double t : jack) {
        const double d = mean - t;
        s2 += d * d;
        s3 += d * d * d;
    }
    if (!(s2 > 0.0))
        return 0.0;
    return s3 / (6.0 * std::pow(s2, 1.5));
}

inline BcaInterval bca_interval(std::span<const double> estimates, double point, std::span<const double> jackknife,
                                double level = 0.95)
{
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("confidence level must lie in (0, 1)");
    const std::size_t B = estimates.size();
    if (B < 2)
        throw MeasureError("BCa: need at least two bootstrap estimates");
    std::vector<double> sorted(estimates.begin(), estimates.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw MeasureError("BCa: zero bootstrap variance");

    BcaInterval ci;
    ci.level = level;
    double below = 0.0;
    for (double t : estimates)
        below += t < point ? 1.0 : (t == point ? 0.5 : 0.0);
    double frac = below / static_cast<double>(B);
    const double fmin = 1.0 / static_cast<double>(B + 1);
    const double fmax = static_cast<double>(B) / static_cast<double>(B + 1);
    if (frac < fmin || frac > fmax) {
        frac = std::clamp(frac, fmin, fmax);
        ci.z0_clamped = true;
    }
    ci.z0 = normal_quantile(frac);
    ci.a = jackknife_acceleration(jackknife);

    const double tail_lo = (1.0 - level) / 2.0;
    const double tail_hi = (1.0 + level) / 2.0;
    double a1 = tail_lo, a2 = tail_hi;
    if (ci.z0 != 0.0 || ci.a != 0.0) {
        auto adjust = [&](double z) {
            const double s = ci.z0 + z;
            const double den = 1.0 - ci.a * s;
            if (den <= 0.0)
                return z < 0.0 ? 0.0 : 1.0;
            return normal_cdf(ci.z0 + s / den);
        };
        a1 = adjust(normal_quantile(tail_lo));
        a2 = adjust(normal_quantile(tail_hi));
    }
    ci.lower = quantile_type7(sorted, a1);
    ci.upper = quantile_type7(sorted, a2);
    return ci;
}

struct ValidationConfig {
    std::size_t B = 1000;
    double train_frac = 0.8;
    double level = 0.95;
    double loess_span = default_loess_span;
    bool jackknife = true; // off: acceleration fixed at 0
    FitConfig fit;
    unsigned threads = 0;
};

// M = ceiling(n_train * m_prop), guarded against representation error
// (0.7 * 10 must give 7, not 8).
inline std::size_t ceiling_m(std::size_t n_train, double m_prop)
{
    if (!(m_prop > 0.0 && m_prop <= 1.0))
        throw ConfigError("M proportion must lie in (0, 1]");
    const double x = static_cast<double>(n_train) * m_prop;
    const auto M = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
    return std::clamp<std::size_t>(M, 1, n_train);
}

// Rows of the validation set feeding one evaluation (duplicates allowed).
struct RowSplit {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

inline std::size_t protocol_train_size(std::size_t n, double train_frac)
{
    const std::size_t n_tr = round_count(n, train_frac);
    if (n_tr < 1 || n_tr >= n)
        throw ConfigError("train/test split of " + std::to_string(n) + " rows leaves an empty side");
    return n_tr;
}

// Replicate b: n draws with replacement; the first round(train_frac*n) draws
// train, the rest test. Draws are iid, so this is a uniformly random split.
inline RowSplit bootstrap_replicate_split(std::size_t n, std::size_t b, std::uint64_t seed, double train_frac = 0.8)
{
    const std::size_t n_tr = protocol_train_size(n, train_frac);
    Rng rng(derive_seed(seed, {stream::bootstrap, static_cast<std::uint64_t>(b)}));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    RowSplit s;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_tr ? s.train_rows : s.test_rows).push_back(pick(rng));
    return s;
}

// The single deterministic split of the un-resampled validation set.
inline RowSplit point_split(std::size_t n, std::uint64_t seed, double train_frac = 0.8)
{
    const std::size_t n_tr = protocol_train_size(n, train_frac);
    auto perm = random_permutation(n, derive_seed(seed, {stream::point_split}));
    RowSplit s;
    s.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_tr));
    s.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_tr), perm.end());
    std::sort(s.train_rows.begin(), s.train_rows.end());
    std::sort(s.test_rows.begin(), s.test_rows.end());
    return s;
}

// PPM predictions for every test row with subpopulation size M. When M is the
// whole training set every patient shares one model, which is fit once.
inline std::vector<double> ppm_predictions(const Dataset& train, const Dataset& test, std::size_t M, const FitConfig& fit,
                                           unsigned threads = 1)
{
    std::vector<double> p(test.rows());
    if (M == train.rows()) {
        std::vector<std::size_t> all(M);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const SubpopulationFit shared = fit_subpopulation(train, all, fit);
        for (std::size_t i = 0; i < test.rows(); ++i)
            p[i] = shared.predict(test.row(i)).probability;
        return p;
    }
    parallel_for(test.rows(), threads, [&](std::size_t i) { p[i] = predict_ppm(test.row(i), train, M, fit, i).probability; });
    return p;
}

struct MeasureSummary {
    Measure measure = Measure::auroc;
    std::optional<double> point;
    std::vector<double> estimates; // bootstrap values where the measure was defined
    std::size_t excluded = 0;
    double se = 0.0;
    std::optional<BcaInterval> interval;
    std::string note;
};

struct BootstrapRun {
    double m_prop = 1.0;
    std::size_t B = 0;
    std::uint64_t seed = 0;
    std::size_t M_point = 0;
    MetricReport point;
    std::vector<MetricReport> replicates; // B x measures
    std::array<MeasureSummary, all_measures.size()> summaries;
    std::vector<std::string> warnings;

    const MeasureSummary& summary(Measure m) const { return summaries[static_cast<std::size_t>(m)]; }
};

namespace detail {

// Jackknife values of every measure: drop one validation row at a time and
// re-run the point split protocol without it.
inline std::vector<MetricReport> jackknife_reports(const Dataset& val, const RowSplit& split, double m_prop,
                                                   const std::vector<double>& point_p, const ValidationConfig& cfg)
{
    const Dataset train = val.subset(split.train_rows);
    const Dataset test = val.subset(split.test_rows);
    const std::size_t n_tr = train.rows();
    const std::size_t n_te = test.rows();
    const std::size_t M = ceiling_m(n_tr, m_prop);

    std::vector<std::vector<std::size_t>> order(n_te), rank(n_te);
    for (std::size_t t = 0; t < n_te; ++t) {
        order[t] = similarity_order(score_all(test.row(t), train, t));
        rank[t].resize(n_tr);
        for (std::size_t r = 0; r < n_tr; ++r)
            rank[t][order[t][r]] = r;
    }

    std::vector<MetricReport> out(n_tr + n_te);
    parallel_for(n_tr + n_te, cfg.threads, [&](std::size_t j) {
        std::vector<int> y;
        std::vector<double> p;
        if (j >= n_tr) {
            const std::size_t skip = j - n_tr;
            for (std::size_t t = 0; t < n_te; ++t) {
                if (t == skip)
                    continue;
                y.push_back(test.outcome[t]);
                p.push_back(point_p[t]);
            }
        } else {
            const std::size_t M2 = ceiling_m(n_tr - 1, m_prop);
            std::optional<SubpopulationFit> shared; // M2 covers every remaining row
            for (std::size_t t = 0; t < n_te; ++t) {
                y.push_back(test.outcome[t]);
                if (M2 == M && rank[t][j] >= M) {
                    p.push_back(point_p[t]);
                    continue;
                }
                std::vector<std::size_t> rows;
                rows.reserve(M2);
                for (std::size_t r = 0; rows.size() < M2; ++r)
                    if (order[t][r] != j)
                        rows.push_back(order[t][r]);
                std::sort(rows.begin(), rows.end());
                if (M2 == n_tr - 1) {
                    if (!shared)
                        shared = fit_subpopulation(train, rows, cfg.fit);
                    p.push_back(shared->predict(test.row(t)).probability);
                } else {
                    p.push_back(predict_from_rows(test.row(t), train, rows, cfg.fit).probability);
                }
            }
        }
        out[j] = report(PredictionSet(std::move(y), std::move(p)), cfg.loess_span);
    });
    return out;
}

} // namespace detail

// Bootstrap validation of a chosen M proportion on the hold-out set, with a
// BCa interval per measure.
inline BootstrapRun bootstrap_validate(const Dataset& val, double m_prop, const ValidationConfig& cfg, std::uint64_t seed)
{
    validate_fit_config(cfg.fit);
    if (!val.standardized)
        throw ConfigError("validation data must be standardized");
    if (cfg.B < 2)
        throw ConfigError("B must be at least 2");
    BootstrapRun run;
    run.m_prop = m_prop;
    run.B = cfg.B;
    run.seed = seed;
    if (cfg.B < 100)
        run.warnings.push_back("B=" + std::to_string(cfg.B) + " is below the minimum of 100 for BCa intervals");
    else if (cfg.B < 1000)
        run.warnings.push_back("B=" + std::to_string(cfg.B) + " is below the recommended 1000");
    if (val.rows() < 50)
        run.warnings.push_back("validation set has fewer than 50 rows");

    // Point estimate on the un-resampled validation set.
    const RowSplit ps = point_split(val.rows(), seed, cfg.train_frac);
    const Dataset p_train = val.subset(ps.train_rows);
    const Dataset p_test = val.subset(ps.test_rows);
    run.M_point = ceiling_m(p_train.rows(), m_prop);
    const auto point_p = ppm_predictions(p_train, p_test, run.M_point, cfg.fit, cfg.threads);
    run.point = report(PredictionSet(p_test.outcome, point_p), cfg.loess_span);

    run.replicates.resize(cfg.B);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
        const RowSplit s = bootstrap_replicate_split(val.rows(), b, seed, cfg.train_frac);
        const Dataset tr = val.subset(s.train_rows);
        const Dataset te = val.subset(s.test_rows);
        const auto p = ppm_predictions(tr, te, ceiling_m(tr.rows(), m_prop), cfg.fit, 1);
        run.replicates[b] = report(PredictionSet(te.outcome, p), cfg.loess_span);
    });

    std::vector<MetricReport> jack;
    if (cfg.jackknife)
        jack = detail::jackknife_reports(val, ps, m_prop, point_p, cfg);

    for (Measure m : all_measures) {
        MeasureSummary& s = run.summaries[static_cast<std::size_t>(m)];
        s.measure = m;
        s.point = run.point.get(m);
        for (const auto& r : run.replicates) {
            if (auto v = r.get(m))
                s.estimates.push_back(*v);
            else
                ++s.excluded;
        }
        if (s.excluded * 5 > cfg.B)
            run.warnings.push_back(std::string(measure_name(m)) + ": " + std::to_string(s.excluded) + " of " +
                                   std::to_string(cfg.B) + " replicates excluded");
        if (!s.estimates.empty()) {
            double mean = 0.0;
            for (double v : s.estimates)
                mean += v;
            mean /= static_cast<double>(s.estimates.size());
            double ss = 0.0;
            for (double v : s.estimates)
                ss += (v - mean) * (v - mean);
            s.se = s.estimates.size() > 1 ? std::sqrt(ss / static_cast<double>(s.estimates.size() - 1)) : 0.0;
        }
        if (!s.point) {
            s.note = "point estimate undefined: " + run.point.failure(m);
            continue;
        }
        std::vector<double> jv;
        for (const auto& r : jack)
            if (auto v = r.get(m))
                jv.push_back(*v);
        try {
            s.interval = bca_interval(s.estimates, *s.point, jv, cfg.level);
            if (s.interval->z0_clamped)
                s.note = "bias correction clamped: all bootstrap estimates on one side of the point estimate";
        } catch (const Error& e) {
            s.note = e.what();
        }
    }
    return run;
}

} // namespace ppm
