#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "glm.hpp"
#include "loess.hpp"

namespace ppm {

// Observed outcomes paired with predicted probabilities.
struct PredictionSet {
    std::vector<int> y;
    std::vector<double> p_hat;

    PredictionSet() = default;
    PredictionSet(std::vector<int> outcomes, std::vector<double> probs) : y(std::move(outcomes)), p_hat(std::move(probs))
    {
        if (y.size() != p_hat.size())
            throw DataError("PredictionSet: outcome and prediction lengths differ");
        if (y.empty())
            throw DataError("PredictionSet: empty");
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] != 0 && y[i] != 1)
                throw DataError("PredictionSet: outcome must be 0 or 1 (position " + std::to_string(i) + ")");
            if (!(p_hat[i] > 0.0 && p_hat[i] < 1.0))
                throw DataError("PredictionSet: prediction outside (0, 1) at position " + std::to_string(i));
        }
    }

    std::size_t size() const { return y.size(); }
    std::size_t positives() const { return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)); }
};

inline double brier(const PredictionSet& ps)
{
    double s = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double r = ps.y[i] - ps.p_hat[i];
        s += r * r;
    }
    return s / static_cast<double>(ps.size());
}

struct BrierDecomposition {
    double cal_term = 0.0;  // mean (y - p)(1 - 2p); mean calibration
    double disc_term = 0.0; // mean p(1 - p); lack of spread
};

inline BrierDecomposition brier_decomposition(const PredictionSet& ps)
{
    BrierDecomposition d;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = ps.p_hat[i];
        d.cal_term += (ps.y[i] - p) * (1.0 - 2.0 * p);
        d.disc_term += p * (1.0 - p);
    }
    d.cal_term /= static_cast<double>(ps.size());
    d.disc_term /= static_cast<double>(ps.size());
    return d;
}

inline double lack_of_spread(const PredictionSet& ps) { return brier_decomposition(ps).disc_term; }

inline double spiegelhalter_z(const PredictionSet& ps)
{
    double num = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = ps.p_hat[i];
        const double c = 1.0 - 2.0 * p;
        num += (ps.y[i] - p) * c;
        var += c * c * p * (1.0 - p);
    }
    if (!(var > 0.0))
        throw MeasureError("Spiegelhalter z: zero variance");
    return num / std::sqrt(var);
}

namespace detail {
inline void require_both_classes(const PredictionSet& ps, std::string_view what)
{
    const std::size_t pos = ps.positives();
    if (pos == 0 || pos == ps.size())
        throw MeasureError(std::string(what) + " undefined: only one outcome class present");
}
} // namespace detail

// Mann-Whitney form; tied pairs earn half credit.
inline double auroc(const PredictionSet& ps)
{
    detail::require_both_classes(ps, "AUROC");
    const std::size_t n = ps.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ps.p_hat[a] < ps.p_hat[b]; });

    double rank_sum = 0.0; // over positives, midranks for ties
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && ps.p_hat[order[j]] == ps.p_hat[order[i]])
            ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (ps.y[order[k]] == 1)
                rank_sum += midrank;
        i = j;
    }
    const double n1 = static_cast<double>(ps.positives());
    const double n0 = static_cast<double>(n) - n1;
    const double u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n0);
}

// Step-wise area under the precision-recall curve: sum over descending
// distinct cutoffs of precision(c) * (recall(c) - recall(c_prev)).
inline double auprc(const PredictionSet& ps)
{
    const std::size_t npos = ps.positives();
    if (npos == 0)
        throw MeasureError("AUPRC undefined: no positive outcomes");
    const std::size_t n = ps.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ps.p_hat[a] > ps.p_hat[b]; });

    double area = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < n;) {
        const std::size_t tp_prev = tp;
        std::size_t j = i;
        while (j < n && ps.p_hat[order[j]] == ps.p_hat[order[i]]) {
            (ps.y[order[j]] == 1 ? tp : fp) += 1;
            ++j;
        }
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double delta_recall = static_cast<double>(tp - tp_prev) / static_cast<double>(npos);
        area += precision * delta_recall;
        i = j;
    }
    return area;
}

namespace detail {
inline std::vector<double> logit_predictions(const PredictionSet& ps)
{
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        out[i] = logit(clamp_prob(ps.p_hat[i]));
    return out;
}

inline Eigen::VectorXd outcome_vector(const PredictionSet& ps)
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = ps.y[i];
    return y;
}

inline FitConfig recalibration_fit()
{
    FitConfig cfg;
    cfg.max_iter = 100;
    cfg.tol = 1e-10;
    return cfg;
}
} // namespace detail

// Calibration-in-the-large: intercept a of logit P(y=1) = a + logit(p_hat).
inline double citl(const PredictionSet& ps)
{
    detail::require_both_classes(ps, "CITL");
    const auto lp = detail::logit_predictions(ps);
    const auto n = static_cast<Eigen::Index>(ps.size());
    Eigen::MatrixXd design = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd offset = Eigen::Map<const Eigen::VectorXd>(lp.data(), n);
    LogisticModel m = detail::irls(design, detail::outcome_vector(ps), &offset, detail::recalibration_fit(),
                                   Eigen::VectorXd::Zero(1));
    if (!m.converged || m.ridge_retry)
        throw MeasureError("CITL: recalibration fit did not converge after " + std::to_string(m.iterations) + " iterations");
    return m.coefficients[0];
}

// Calibration slope: b in logit P(y=1) = a + b * logit(p_hat).
inline double calibration_slope(const PredictionSet& ps)
{
    detail::require_both_classes(ps, "calibration slope");
    const auto lp = detail::logit_predictions(ps);
    const double mean = std::accumulate(lp.begin(), lp.end(), 0.0) / static_cast<double>(lp.size());
    double var = 0.0;
    for (double v : lp)
        var += (v - mean) * (v - mean);
    if (!(var > 1e-12 * static_cast<double>(lp.size())))
        throw MeasureError("calibration slope undefined: predictions have no spread on the logit scale");

    const auto n = static_cast<Eigen::Index>(ps.size());
    Eigen::MatrixXd design(n, 2);
    design.col(0).setOnes();
    design.col(1) = Eigen::Map<const Eigen::VectorXd>(lp.data(), n);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(2);
    start[1] = 1.0;
    LogisticModel m = detail::irls(design, detail::outcome_vector(ps), nullptr, detail::recalibration_fit(), start);
    if (!m.converged || m.ridge_retry)
        throw MeasureError("calibration slope: recalibration fit did not converge after " + std::to_string(m.iterations) +
                           " iterations");
    return m.coefficients[1];
}

inline constexpr std::size_t loess_min_points = 10;
inline constexpr double default_loess_span = 0.75;

// Smoothed calibration curve, index-aligned with ps.p_hat.
struct CalibrationCurve {
    std::vector<double> p_tilde;
    double span = default_loess_span;
    int degree = 1;
};

inline CalibrationCurve loess_smooth(const PredictionSet& ps, double span = default_loess_span, int degree = 1)
{
    if (ps.size() < loess_min_points)
        throw MeasureError("LOESS: too few points to smooth (" + std::to_string(ps.size()) + " < 10)");
    std::vector<double> y(ps.y.begin(), ps.y.end());
    CalibrationCurve c;
    c.span = span;
    c.degree = degree;
    c.p_tilde = loess_fit(ps.p_hat, y, span, degree);
    for (double& v : c.p_tilde)
        v = std::clamp(v, 0.0, 1.0);
    return c;
}

// Integrated calibration index: mean |p_tilde - p_hat|.
inline double ici(const PredictionSet& ps, double span = default_loess_span)
{
    const auto curve = loess_smooth(ps, span, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        s += std::abs(curve.p_tilde[i] - ps.p_hat[i]);
    return s / static_cast<double>(ps.size());
}

enum class Measure { auroc, auprc, lack_of_spread, citl, calibration_slope, ici, brier, spiegelhalter_z };

inline constexpr std::array<Measure, 8> all_measures{Measure::auroc,  Measure::auprc,
                                                     Measure::lack_of_spread, Measure::citl,
                                                     Measure::calibration_slope, Measure::ici,
                                                     Measure::brier,  Measure::spiegelhalter_z};

inline std::string_view measure_name(Measure m)
{
    switch (m) {
    case Measure::auroc: return "auroc";
    case Measure::auprc: return "auprc";
    case Measure::lack_of_spread: return "lack_of_spread";
    case Measure::citl: return "citl";
    case Measure::calibration_slope: return "calibration_slope";
    case Measure::ici: return "ici";
    case Measure::brier: return "brier";
    case Measure::spiegelhalter_z: return "spiegelhalter_z";
    }
    return "?";
}

inline Measure parse_measure(std::string_view name)
{
    for (Measure m : all_measures)
        if (measure_name(m) == name)
            return m;
    if (name == "slope")
        return Measure::calibration_slope;
    if (name == "spread")
        return Measure::lack_of_spread;
    throw ConfigError("unknown measure '" + std::string(name) + "'");
}

inline double compute_measure(Measure m, const PredictionSet& ps, double span = default_loess_span)
{
    switch (m) {
    case Measure::auroc: return auroc(ps);
    case Measure::auprc: return auprc(ps);
    case Measure::lack_of_spread: return lack_of_spread(ps);
    case Measure::citl: return citl(ps);
    case Measure::calibration_slope: return calibration_slope(ps);
    case Measure::ici: return ici(ps, span);
    case Measure::brier: return brier(ps);
    case Measure::spiegelhalter_z: return spiegelhalter_z(ps);
    }
    throw ConfigError("unknown measure");
}

// All measures for one prediction set; a measure that is undefined for this
// set is left empty and its reason recorded.
struct MetricReport {
    std::array<std::optional<double>, all_measures.size()> values{};
    std::array<std::string, all_measures.size()> failures{};

    std::optional<double> get(Measure m) const { return values[static_cast<std::size_t>(m)]; }
    const std::string& failure(Measure m) const { return failures[static_cast<std::size_t>(m)]; }
    bool has(Measure m) const { return get(m).has_value(); }
};

inline MetricReport report(const PredictionSet& ps, double span = default_loess_span)
{
    MetricReport r;
    for (Measure m : all_measures) {
        const auto i = static_cast<std::size_t>(m);
        try {
            r.values[i] = compute_measure(m, ps, span);
        } catch (const Error& e) {
            r.failures[i] = e.what();
        }
    }
    return r;
}

} // namespace ppm
