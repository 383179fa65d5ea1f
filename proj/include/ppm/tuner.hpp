#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "glm.hpp"
#include "log.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "similarity.hpp"

namespace ppm {

struct TuningConfig {
    int K = 10;                            // folds
    int v = 20;                            // repeats
    double grid_lower_frac = 0.2;
    std::optional<double> grid_upper_frac; // unset: 0.5 if alpha <= 0.5, else 0.7
    int grid_size = 11;
    std::optional<double> grid_step_frac;  // step in proportion units; overrides grid_size
    std::vector<std::size_t> explicit_grid;
    std::optional<std::size_t> random_subset;
    std::uint64_t seed = 1;
    FitConfig fit;
    unsigned threads = 0; // 0: all cores
};

inline double default_upper_frac(double alpha) { return alpha <= 0.5 ? 0.5 : 0.7; }

// Training rows per fold; with unequal folds this is the smallest training side.
inline std::size_t per_fold_train_size(std::size_t n, int K)
{
    const auto k = static_cast<std::size_t>(K);
    return n - (n + k - 1) / k;
}

inline void validate_tuning_config(const TuningConfig& cfg)
{
    if (cfg.K < 2)
        throw ConfigError("K must be >= 2");
    if (cfg.v < 1)
        throw ConfigError("v must be >= 1");
    if (cfg.explicit_grid.empty()) {
        if (!(cfg.grid_lower_frac > 0.0))
            throw ConfigError("grid lower fraction must be > 0");
        if (cfg.grid_upper_frac && !(*cfg.grid_upper_frac > cfg.grid_lower_frac && *cfg.grid_upper_frac <= 1.0))
            throw ConfigError("grid upper fraction must lie in (lower, 1]");
        if (cfg.grid_size < 1 && !cfg.grid_step_frac)
            throw ConfigError("grid size must be >= 1");
        if (cfg.grid_step_frac && !(*cfg.grid_step_frac > 0.0))
            throw ConfigError("grid step must be > 0");
    }
    if (cfg.random_subset && *cfg.random_subset == 0)
        throw ConfigError("random grid subset must draw at least one point");
    validate_fit_config(cfg.fit);
}

// Candidate subpopulation sizes, ascending and distinct.
inline std::vector<std::size_t> build_grid(std::size_t n_train, const TuningConfig& cfg, double alpha)
{
    validate_tuning_config(cfg);
    if (n_train < 50)
        throw ConfigError("build_grid: n_train=" + std::to_string(n_train) + " is below the minimum of 50");

    std::vector<std::size_t> grid;
    if (!cfg.explicit_grid.empty()) {
        grid = cfg.explicit_grid;
        for (auto M : grid)
            if (M < 1 || M > n_train)
                throw ConfigError("grid value M=" + std::to_string(M) + " outside [1, " + std::to_string(n_train) + "]");
    } else {
        const double upper = cfg.grid_upper_frac.value_or(default_upper_frac(alpha));
        if (!(upper > cfg.grid_lower_frac))
            throw ConfigError("grid upper fraction must exceed the lower fraction");
        const double n = static_cast<double>(n_train);
        const double lo = std::max(1.0, std::ceil(cfg.grid_lower_frac * n - 1e-9));
        const double hi = std::min(n, std::floor(upper * n + 1e-9));
        if (hi < lo)
            throw ConfigError("grid is empty after rounding");
        if (cfg.grid_step_frac) {
            for (int k = 0;; ++k) {
                const double frac = cfg.grid_lower_frac + k * *cfg.grid_step_frac;
                if (frac > upper + 1e-9)
                    break;
                const double M = std::clamp(std::round(frac * n), lo, hi);
                grid.push_back(static_cast<std::size_t>(M));
            }
        } else if (cfg.grid_size == 1) {
            grid.push_back(static_cast<std::size_t>(lo));
        } else {
            for (int k = 0; k < cfg.grid_size; ++k)
                grid.push_back(static_cast<std::size_t>(std::round(lo + (hi - lo) * k / (cfg.grid_size - 1))));
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty())
        throw ConfigError("grid is empty");

    if (cfg.random_subset && *cfg.random_subset < grid.size()) {
        Rng rng(derive_seed(cfg.seed, {stream::grid}));
        std::vector<std::size_t> pick;
        std::sample(grid.begin(), grid.end(), std::back_inserter(pick), *cfg.random_subset, rng);
        grid = std::move(pick);
        std::sort(grid.begin(), grid.end());
    }
    return grid;
}

// Predictions of every test patient of every (repeat, fold) at every grid M.
struct FoldPredictions {
    int repeat = 0;
    int fold = 0;
    std::vector<std::size_t> test_rows;
    std::vector<int> y;
    std::vector<std::vector<double>> p_by_m; // [grid position][test patient]
    std::vector<std::size_t> fallbacks;      // per grid position
    std::vector<std::size_t> separations;    // per grid position
    std::size_t n_train = 0;
};

struct PredictionLattice {
    std::vector<std::size_t> grid;
    std::vector<FoldPredictions> folds;

    std::size_t grid_position(std::size_t M) const
    {
        auto it = std::lower_bound(grid.begin(), grid.end(), M);
        if (it == grid.end() || *it != M)
            throw ConfigError("M=" + std::to_string(M) + " is not in the evaluated grid");
        return static_cast<std::size_t>(it - grid.begin());
    }
};

// Personalized predictions for every test row at every grid M. Similarity
// ranking is computed once per index patient and shared across M.
inline void predict_grid(const Dataset& train, const Dataset& test_source, std::span<const std::size_t> test_rows,
                         std::span<const std::size_t> grid, const FitConfig& fit, unsigned threads, FoldPredictions& out)
{
    for (auto M : grid)
        if (M < 1 || M > train.rows())
            throw ConfigError("grid value M=" + std::to_string(M) + " exceeds the training size " +
                              std::to_string(train.rows()));
    const std::size_t nt = test_rows.size();
    out.test_rows.assign(test_rows.begin(), test_rows.end());
    out.y.resize(nt);
    out.p_by_m.assign(grid.size(), std::vector<double>(nt));
    std::vector<std::vector<unsigned char>> fb(grid.size(), std::vector<unsigned char>(nt));
    std::vector<std::vector<unsigned char>> sep(grid.size(), std::vector<unsigned char>(nt));
    out.n_train = train.rows();

    parallel_for(nt, threads, [&](std::size_t t) {
        const std::size_t r = test_rows[t];
        const auto index = test_source.row(r);
        out.y[t] = test_source.outcome[r];
        const auto order = similarity_order(score_all(index, train, r));
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto sub = top_m_from_order(order, grid[g]);
            const PpmPrediction pr = predict_from_rows(index, train, sub.row_indices, fit);
            out.p_by_m[g][t] = pr.probability;
            fb[g][t] = pr.fallback;
            sep[g][t] = pr.separation;
        }
    });
    out.fallbacks.resize(grid.size());
    out.separations.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out.fallbacks[g] = static_cast<std::size_t>(std::count(fb[g].begin(), fb[g].end(), 1));
        out.separations[g] = static_cast<std::size_t>(std::count(sep[g].begin(), sep[g].end(), 1));
    }
}

inline PredictionLattice cv_prediction_lattice(const Dataset& trte, std::vector<std::size_t> grid, const TuningConfig& cfg)
{
    validate_tuning_config(cfg);
    if (!trte.standardized)
        throw ConfigError("tuning data must be standardized");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    PredictionLattice lat;
    lat.grid = grid;
    for (int r = 0; r < cfg.v; ++r) {
        const FoldAssignment fa = kfold_partition(trte, cfg.K, r, cfg.seed);
        for (int k = 0; k < cfg.K; ++k) {
            const auto train_rows = fa.train_rows(k);
            const auto test_rows = fa.test_rows(k);
            const Dataset train = trte.subset(train_rows);
            FoldPredictions fp;
            fp.repeat = r;
            fp.fold = k;
            predict_grid(train, trte, test_rows, lat.grid, cfg.fit, cfg.threads, fp);
            lat.folds.push_back(std::move(fp));
        }
    }
    return lat;
}

// Loss of the PPMs for one train/test split at a single M.
inline LossValue evaluate_fold(const Dataset& train, const Dataset& test, std::size_t M, const LossSpec& spec,
                               const FitConfig& fit = {}, unsigned threads = 1)
{
    std::vector<double> p(test.rows());
    parallel_for(test.rows(), threads, [&](std::size_t i) { p[i] = predict_ppm(test.row(i), train, M, fit, i).probability; });
    return evaluate_loss(spec, PredictionSet(test.outcome, std::move(p)));
}

struct LossRow {
    std::size_t M = 0;
    double mean_loss = 0.0;
    double sd_loss = 0.0;
    double mean_calibration = 0.0;
    double mean_discrimination = 0.0;
    std::size_t n_evals = 0;
    std::size_t n_excluded = 0;
};

struct TuningResult {
    double alpha = 0.5;
    std::string loss;
    std::size_t m_opt = 0;
    double m_prop_opt = 0.0;
    std::size_t n_train_per_fold = 0;
    std::vector<LossRow> loss_by_m;
    std::vector<std::size_t> excluded_m; // every fold undefined
    std::size_t fallback_predictions = 0;
    std::size_t separated_fits = 0;
};

namespace detail {
inline double sample_sd(std::span<const double> v, double mean)
{
    if (v.size() < 2)
        return 0.0;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}
} // namespace detail

// Mean loss per M over all (repeat, fold) evaluations; argmin with ties
// going to the smaller M.
inline TuningResult select_m(const PredictionLattice& lat, std::span<const std::size_t> grid, const LossSpec& spec,
                             std::size_t n_train_per_fold)
{
    validate_loss_spec(spec);
    TuningResult res;
    res.alpha = spec.alpha;
    res.loss = loss_name(spec);
    res.n_train_per_fold = n_train_per_fold;

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t M : grid) {
        const std::size_t g = lat.grid_position(M);
        std::vector<double> totals, cals, discs;
        std::size_t excluded = 0;
        for (const auto& f : lat.folds) {
            res.fallback_predictions += f.fallbacks[g];
            res.separated_fits += f.separations[g];
            try {
                const LossValue lv = evaluate_loss(spec, PredictionSet(f.y, f.p_by_m[g]));
                totals.push_back(lv.total);
                cals.push_back(lv.calibration_component);
                discs.push_back(lv.discrimination_component);
            } catch (const MeasureError&) {
                ++excluded;
            }
        }
        if (excluded > 0)
            log_info("M=" + std::to_string(M) + ": " + std::to_string(excluded) + " fold evaluation(s) excluded");
        if (totals.empty()) {
            res.excluded_m.push_back(M);
            continue;
        }
        LossRow row;
        row.M = M;
        row.mean_loss = detail::mean_of(totals);
        row.sd_loss = detail::sample_sd(totals, row.mean_loss);
        row.mean_calibration = detail::mean_of(cals);
        row.mean_discrimination = detail::mean_of(discs);
        row.n_evals = totals.size();
        row.n_excluded = excluded;
        res.loss_by_m.push_back(row);
        if (row.mean_loss < best) {
            best = row.mean_loss;
            res.m_opt = M;
        }
    }
    if (res.loss_by_m.empty())
        throw MeasureError("tuning failed: the loss is undefined on every fold for every grid value");
    res.m_prop_opt = static_cast<double>(res.m_opt) / static_cast<double>(n_train_per_fold);
    return res;
}

// Tunes M for several alphas at once. Predictions do not depend on alpha, so
// one lattice over the union of the per-alpha grids serves all of them.
inline std::vector<TuningResult> tune_alphas(const Dataset& trte, const LossSpec& spec_template, std::span<const double> alphas,
                                             const TuningConfig& cfg)
{
    validate_tuning_config(cfg);
    if (cfg.v * cfg.K < 200)
        log_warning("v*K = " + std::to_string(cfg.v * cfg.K) + " is below the recommended 200");
    const std::size_t n_train = per_fold_train_size(trte.rows(), cfg.K);

    std::vector<std::vector<std::size_t>> grids;
    std::set<std::size_t> all;
    for (double a : alphas) {
        grids.push_back(build_grid(n_train, cfg, a));
        all.insert(grids.back().begin(), grids.back().end());
    }
    const PredictionLattice lat = cv_prediction_lattice(trte, {all.begin(), all.end()}, cfg);

    std::vector<TuningResult> out;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        LossSpec spec = spec_template;
        spec.alpha = alphas[i];
        out.push_back(select_m(lat, grids[i], spec, n_train));
    }
    return out;
}

inline TuningResult tune_m(const Dataset& trte, const LossSpec& spec, const TuningConfig& cfg)
{
    const double alpha[] = {spec.alpha};
    return tune_alphas(trte, spec, alpha, cfg).front();
}

// Raw performance measures at each grid M, averaged over the CV lattice.
struct SweepRow {
    std::size_t M = 0;
    Measure measure = Measure::auroc;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n_evals = 0;
};

inline std::vector<SweepRow> sweep_measures(const PredictionLattice& lat, std::span<const Measure> measures,
                                            double span = default_loess_span)
{
    std::vector<SweepRow> rows;
    for (std::size_t g = 0; g < lat.grid.size(); ++g) {
        std::vector<MetricReport> reps;
        for (const auto& f : lat.folds)
            reps.push_back(report(PredictionSet(f.y, f.p_by_m[g]), span));
        for (Measure m : measures) {
            std::vector<double> vals;
            for (const auto& r : reps)
                if (auto v = r.get(m))
                    vals.push_back(*v);
            SweepRow row;
            row.M = lat.grid[g];
            row.measure = m;
            row.n_evals = vals.size();
            if (!vals.empty()) {
                row.mean = detail::mean_of(vals);
                row.sd = detail::sample_sd(vals, row.mean);
            } else {
                row.mean = std::numeric_limits<double>::quiet_NaN();
                row.sd = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace ppm
