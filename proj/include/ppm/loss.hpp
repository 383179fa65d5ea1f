#pragma once

#include <string>
#include <string_view>

#include "error.hpp"
#include "metrics.hpp"

namespace ppm {

// Calibration measures usable in the mixture loss. Every registered measure
// is oriented so that lower is better.
enum class CalibrationMeasure {
    mean_cal_term, // first Brier term, mean (y - p)(1 - 2p); signed
    ici,
};

enum class DiscriminationMeasure {
    lack_of_spread,
    one_minus_auprc,
    one_minus_auroc,
};

// Adding a measure means extending one of the enums above together with
// calibration_component / discrimination_component and the name tables.
struct LossSpec {
    CalibrationMeasure calibration = CalibrationMeasure::ici;
    DiscriminationMeasure discrimination = DiscriminationMeasure::lack_of_spread;
    double alpha = 0.5;
    double loess_span = default_loess_span;
};

struct LossValue {
    double total = 0.0;
    double calibration_component = 0.0;
    double discrimination_component = 0.0;
};

inline void validate_loss_spec(const LossSpec& spec)
{
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
        throw ConfigError("alpha must lie in [0, 1]");
    if (!(spec.loess_span > 0.0 && spec.loess_span <= 1.0))
        throw ConfigError("LOESS span must lie in (0, 1]");
}

inline std::string_view calibration_name(CalibrationMeasure c)
{
    return c == CalibrationMeasure::ici ? "ici" : "cal";
}

inline std::string_view discrimination_name(DiscriminationMeasure d)
{
    switch (d) {
    case DiscriminationMeasure::lack_of_spread: return "spread";
    case DiscriminationMeasure::one_minus_auprc: return "auprc";
    case DiscriminationMeasure::one_minus_auroc: return "auroc";
    }
    return "?";
}

inline std::string loss_name(const LossSpec& spec)
{
    return std::string(calibration_name(spec.calibration)) + "+" + std::string(discrimination_name(spec.discrimination));
}

// Parses "<calibration>+<discrimination>", e.g. "ici+spread", "ici+auprc",
// "cal+spread" (the Brier-decomposition loss).
inline LossSpec parse_loss_spec(std::string_view name, double alpha, double span = default_loess_span)
{
    const auto plus = name.find('+');
    if (plus == std::string_view::npos)
        throw ConfigError("loss must look like '<calibration>+<discrimination>', got '" + std::string(name) + "'");
    const auto c = name.substr(0, plus);
    const auto d = name.substr(plus + 1);

    LossSpec spec;
    spec.alpha = alpha;
    spec.loess_span = span;
    if (c == "ici")
        spec.calibration = CalibrationMeasure::ici;
    else if (c == "cal" || c == "mean_cal")
        spec.calibration = CalibrationMeasure::mean_cal_term;
    else
        throw ConfigError("unknown calibration measure '" + std::string(c) + "' (expected ici or cal)");
    if (d == "spread" || d == "lack_of_spread")
        spec.discrimination = DiscriminationMeasure::lack_of_spread;
    else if (d == "auprc")
        spec.discrimination = DiscriminationMeasure::one_minus_auprc;
    else if (d == "auroc")
        spec.discrimination = DiscriminationMeasure::one_minus_auroc;
    else
        throw ConfigError("unknown discrimination measure '" + std::string(d) + "' (expected spread, auprc or auroc)");
    validate_loss_spec(spec);
    return spec;
}

inline double calibration_component(CalibrationMeasure c, const PredictionSet& ps, double span)
{
    try {
        switch (c) {
        case CalibrationMeasure::mean_cal_term: return brier_decomposition(ps).cal_term;
        case CalibrationMeasure::ici: return ici(ps, span);
        }
    } catch (const MeasureError& e) {
        throw MeasureError(std::string("calibration component: ") + e.what());
    }
    throw ConfigError("unknown calibration measure");
}

inline double discrimination_component(DiscriminationMeasure d, const PredictionSet& ps)
{
    try {
        switch (d) {
        case DiscriminationMeasure::lack_of_spread: return lack_of_spread(ps);
        case DiscriminationMeasure::one_minus_auprc: return 1.0 - auprc(ps);
        case DiscriminationMeasure::one_minus_auroc: return 1.0 - auroc(ps);
        }
    } catch (const MeasureError& e) {
        throw MeasureError(std::string("discrimination component: ") + e.what());
    }
    throw ConfigError("unknown discrimination measure");
}

// alpha * C + (1 - alpha) * D over the whole prediction set.
inline LossValue evaluate_loss(const LossSpec& spec, const PredictionSet& ps)
{
    validate_loss_spec(spec);
    LossValue v;
    v.calibration_component = calibration_component(spec.calibration, ps, spec.loess_span);
    v.discrimination_component = discrimination_component(spec.discrimination, ps);
    v.total = spec.alpha * v.calibration_component + (1.0 - spec.alpha) * v.discrimination_component;
    return v;
}

// Brier-decomposition loss: mean calibration term plus lack of spread.
inline LossValue loss_original(const PredictionSet& ps, double alpha)
{
    return evaluate_loss({CalibrationMeasure::mean_cal_term, DiscriminationMeasure::lack_of_spread, alpha}, ps);
}

// ICI plus lack of spread.
inline LossValue loss_L_star(const PredictionSet& ps, double alpha, double span = default_loess_span)
{
    return evaluate_loss({CalibrationMeasure::ici, DiscriminationMeasure::lack_of_spread, alpha, span}, ps);
}

// ICI plus (1 - AUPRC).
inline LossValue loss_L_double_star(const PredictionSet& ps, double alpha, double span = default_loess_span)
{
    return evaluate_loss({CalibrationMeasure::ici, DiscriminationMeasure::one_minus_auprc, alpha, span}, ps);
}

} // namespace ppm
