#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "data.hpp"
#include "error.hpp"
#include "log.hpp"
#include "loss.hpp"
#include "random.hpp"
#include "tuner.hpp"

namespace ppm {

enum class StandardizeMode {
    full, // once over the whole dataset before any split
    trte, // fit on each TrTe side, applied (clamped) to its hold-out set
};

struct StudyConfig {
    std::vector<double> alphas{0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9};
    LossSpec spec_template;
    TuningConfig tuning;
    ValidationConfig validation;
    double q = 0.2;
    int Z = 10;
    std::uint64_t seed = 1;
    StandardizeMode standardize = StandardizeMode::full;
};

// One (repeat, alpha) cell, or the full-model comparison row of a repeat.
struct StudyRow {
    int z = 0;
    std::optional<double> alpha; // empty for the full-model row
    bool full_model = false;
    double m_prop = 1.0;
    std::size_t m_opt = 0;
    std::size_t n_train_per_fold = 0;
    std::size_t M_validation = 0;
    std::optional<TuningResult> tuning;
    std::array<MeasureSummary, all_measures.size()> summaries;
    std::vector<std::string> notes;

    const MeasureSummary& summary(Measure m) const { return summaries[static_cast<std::size_t>(m)]; }
};

struct StudyReport {
    StudyConfig config;
    std::size_t n = 0;
    std::vector<StudyRow> rows;
};

namespace detail {
inline void fill_from_run(StudyRow& row, const BootstrapRun& run)
{
    row.M_validation = run.M_point;
    row.summaries = run.summaries;
    for (auto& s : row.summaries)
        s.estimates.clear();
    row.notes.insert(row.notes.end(), run.warnings.begin(), run.warnings.end());
}
} // namespace detail

// Z repeats of: hold-out split, M tuning per alpha on the TrTe side, and
// bootstrap validation of each tuned proportion plus the full model.
//
// Seeds per repeat z: hold-out split derive(seed, {holdout, z}); tuning
// derive(seed, {tuning, z}); bootstrap derive(seed, {bootstrap, z}). The
// bootstrap stream is shared by every row of a repeat, so rows are compared
// on the same resamples.
inline StudyReport run_study(const Dataset& full, const StudyConfig& cfg)
{
    if (cfg.Z < 1)
        throw ConfigError("Z must be >= 1");
    if (cfg.alphas.empty())
        throw ConfigError("at least one alpha is required");
    for (double a : cfg.alphas)
        if (!(a >= 0.0 && a <= 1.0))
            throw ConfigError("alpha must lie in [0, 1]");
    validate_loss_spec(cfg.spec_template);
    validate_tuning_config(cfg.tuning);

    Dataset data = full;
    if (cfg.standardize == StandardizeMode::full && !data.standardized)
        data = standardize(data);

    StudyReport rep;
    rep.config = cfg;
    rep.n = full.rows();
    for (int z = 0; z < cfg.Z; ++z) {
        const auto zz = static_cast<std::uint64_t>(z);
        SplitPair sp = split_holdout(data, cfg.q, derive_seed(cfg.seed, {stream::holdout, zz}));
        if (cfg.standardize == StandardizeMode::trte) {
            const MinMaxScaler scaler = MinMaxScaler::fit(sp.trte);
            sp.trte = scaler.apply(sp.trte, false);
            sp.validation = scaler.apply(sp.validation, true);
        }

        TuningConfig tcfg = cfg.tuning;
        tcfg.seed = derive_seed(cfg.seed, {stream::tuning, zz});
        const std::uint64_t boot_seed = derive_seed(cfg.seed, {stream::bootstrap, zz});

        std::vector<TuningResult> tuned;
        std::string tuning_error;
        try {
            tuned = tune_alphas(sp.trte, cfg.spec_template, cfg.alphas, tcfg);
        } catch (const MeasureError& e) {
            tuning_error = e.what();
        }

        std::map<double, BootstrapRun> runs;
        auto run_for = [&](double m_prop) -> const BootstrapRun& {
            auto it = runs.find(m_prop);
            if (it == runs.end())
                it = runs.emplace(m_prop, bootstrap_validate(sp.validation, m_prop, cfg.validation, boot_seed)).first;
            return it->second;
        };

        for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
            StudyRow row;
            row.z = z;
            row.alpha = cfg.alphas[i];
            if (!tuning_error.empty()) {
                row.m_prop = std::nan("");
                row.notes.push_back("tuning failed: " + tuning_error);
                rep.rows.push_back(std::move(row));
                continue;
            }
            const TuningResult& t = tuned[i];
            row.m_prop = t.m_prop_opt;
            row.m_opt = t.m_opt;
            row.n_train_per_fold = t.n_train_per_fold;
            row.tuning = t;
            if (!t.excluded_m.empty())
                row.notes.push_back(std::to_string(t.excluded_m.size()) + " grid value(s) excluded during tuning");
            detail::fill_from_run(row, run_for(std::min(1.0, t.m_prop_opt)));
            rep.rows.push_back(std::move(row));
        }

        StudyRow full_row;
        full_row.z = z;
        full_row.full_model = true;
        full_row.m_prop = 1.0;
        detail::fill_from_run(full_row, run_for(1.0));
        rep.rows.push_back(std::move(full_row));
        log_info("study repeat " + std::to_string(z + 1) + "/" + std::to_string(cfg.Z) + " done");
    }
    return rep;
}

} // namespace ppm
