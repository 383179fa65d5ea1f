#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "error.hpp"
#include "format.hpp"
#include "metrics.hpp"
#include "study.hpp"
#include "tuner.hpp"

namespace ppm {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number_or_null(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

inline Json number_or_null(const std::optional<double>& x) { return x ? number_or_null(*x) : Json(nullptr); }

inline std::string cell(const Json& v)
{
    if (v.is_null())
        return "NA";
    if (v.is_number_float())
        return format_double(v.get<double>());
    if (v.is_number())
        return v.dump();
    if (v.is_string())
        return v.get<std::string>();
    return v.dump();
}

} // namespace detail

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError(path + ": cannot open for writing");
    out << text;
    if (!out)
        throw DataError(path + ": write failed");
}

inline Json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError(path + ": cannot open");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

// ---- metrics

inline Json to_json(const MetricReport& r)
{
    Json j = Json::object();
    for (Measure m : all_measures) {
        Json e = {{"value", detail::number_or_null(r.get(m))}};
        if (!r.has(m))
            e["failure"] = r.failure(m);
        j[std::string(measure_name(m))] = e;
    }
    return j;
}

inline void write_metric_csv(std::ostream& out, const MetricReport& r)
{
    out << "measure,value\n";
    for (Measure m : all_measures)
        out << measure_name(m) << ',' << format_double(r.get(m)) << '\n';
}

// ---- tuning

inline Json to_json(const TuningResult& t)
{
    Json rows = Json::array();
    for (const auto& r : t.loss_by_m)
        rows.push_back({{"M", r.M},
                        {"mean_loss", detail::number_or_null(r.mean_loss)},
                        {"sd_loss", detail::number_or_null(r.sd_loss)},
                        {"mean_calibration", detail::number_or_null(r.mean_calibration)},
                        {"mean_discrimination", detail::number_or_null(r.mean_discrimination)},
                        {"n_evals", r.n_evals},
                        {"n_excluded", r.n_excluded}});
    return {{"alpha", t.alpha},
            {"loss", t.loss},
            {"m_opt", t.m_opt},
            {"m_prop_opt", t.m_prop_opt},
            {"n_train_per_fold", t.n_train_per_fold},
            {"excluded_m", t.excluded_m},
            {"fallback_predictions", t.fallback_predictions},
            {"separated_fits", t.separated_fits},
            {"loss_by_m", rows}};
}

inline void write_tuning_csv(std::ostream& out, std::span<const TuningResult> results)
{
    out << "alpha,loss,M,m_prop,mean_loss,sd_loss,mean_calibration,mean_discrimination,n_evals,n_excluded,selected\n";
    for (const auto& t : results)
        for (const auto& r : t.loss_by_m) {
            const bool evaluated = r.n_evals > 0;
            out << format_double(t.alpha) << ',' << t.loss << ',' << r.M << ','
                << format_double(static_cast<double>(r.M) / static_cast<double>(t.n_train_per_fold)) << ','
                << (evaluated ? format_double(r.mean_loss) : "NA") << ',' << (evaluated ? format_double(r.sd_loss) : "NA")
                << ',' << (evaluated ? format_double(r.mean_calibration) : "NA") << ','
                << (evaluated ? format_double(r.mean_discrimination) : "NA") << ',' << r.n_evals << ',' << r.n_excluded
                << ',' << (r.M == t.m_opt ? 1 : 0) << '\n';
        }
}

// ---- sweep

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "M,measure,mean,sd,n_evals\n";
    for (const auto& r : rows)
        out << r.M << ',' << measure_name(r.measure) << ',' << (r.n_evals ? format_double(r.mean) : "NA") << ','
            << (r.n_evals ? format_double(r.sd) : "NA") << ',' << r.n_evals << '\n';
}

// ---- bootstrap validation

inline Json to_json(const MeasureSummary& s)
{
    Json j = {{"point", detail::number_or_null(s.point)},
              {"se", detail::number_or_null(s.se)},
              {"lower", nullptr},
              {"upper", nullptr},
              {"z0", nullptr},
              {"a", nullptr},
              {"n_estimates", s.estimates.size()},
              {"excluded", s.excluded}};
    if (s.interval) {
        j["lower"] = detail::number_or_null(s.interval->lower);
        j["upper"] = detail::number_or_null(s.interval->upper);
        j["z0"] = detail::number_or_null(s.interval->z0);
        j["a"] = detail::number_or_null(s.interval->a);
    }
    if (!s.note.empty())
        j["note"] = s.note;
    return j;
}

inline Json summaries_json(const std::array<MeasureSummary, all_measures.size()>& summaries)
{
    Json j = Json::object();
    for (Measure m : all_measures)
        j[std::string(measure_name(m))] = to_json(summaries[static_cast<std::size_t>(m)]);
    return j;
}

inline Json to_json(const BootstrapRun& run)
{
    return {{"m_prop", run.m_prop},
            {"B", run.B},
            {"seed", run.seed},
            {"M", run.M_point},
            {"measures", summaries_json(run.summaries)},
            {"warnings", run.warnings}};
}

inline void write_bootstrap_csv(std::ostream& out, const BootstrapRun& run)
{
    out << "m_prop,M,measure,point,se,lower,upper,z0,a,n_estimates,excluded\n";
    const Json j = to_json(run);
    for (Measure m : all_measures) {
        const Json& s = j["measures"][std::string(measure_name(m))];
        out << format_double(run.m_prop) << ',' << run.M_point << ',' << measure_name(m);
        for (const char* k : {"point", "se", "lower", "upper", "z0", "a", "n_estimates", "excluded"})
            out << ',' << detail::cell(s[k]);
        out << '\n';
    }
}

// ---- study

inline Json to_json(const StudyReport& rep)
{
    const StudyConfig& c = rep.config;
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        Json row = {{"z", r.z},
                    {"alpha", r.alpha ? Json(*r.alpha) : Json(nullptr)},
                    {"model", r.full_model ? "full" : "ppm"},
                    {"m_prop", detail::number_or_null(r.m_prop)},
                    {"m_opt", r.m_opt},
                    {"n_train_per_fold", r.n_train_per_fold},
                    {"M_validation", r.M_validation},
                    {"measures", summaries_json(r.summaries)},
                    {"notes", r.notes}};
        if (r.tuning)
            row["tuning"] = to_json(*r.tuning);
        rows.push_back(std::move(row));
    }
    return {{"n", rep.n},
            {"config",
             {{"seed", c.seed},
              {"Z", c.Z},
              {"q", c.q},
              {"alphas", c.alphas},
              {"loss", loss_name(c.spec_template)},
              {"K", c.tuning.K},
              {"v", c.tuning.v},
              {"B", c.validation.B},
              {"train_frac", c.validation.train_frac},
              {"level", c.validation.level},
              {"standardize", c.standardize == StandardizeMode::full ? "full" : "trte"}}},
            {"rows", rows}};
}

// One line per (row, measure).
inline void write_study_long_csv(std::ostream& out, const Json& study)
{
    out << "z,alpha,model,m_prop,M_validation,measure,point,se,lower,upper,n_estimates,excluded\n";
    for (const auto& r : study.at("rows"))
        for (Measure m : all_measures) {
            const Json& s = r.at("measures").at(std::string(measure_name(m)));
            out << detail::cell(r.at("z")) << ',' << detail::cell(r.at("alpha")) << ',' << detail::cell(r.at("model"))
                << ',' << detail::cell(r.at("m_prop")) << ',' << detail::cell(r.at("M_validation")) << ','
                << measure_name(m);
            for (const char* k : {"point", "se", "lower", "upper", "n_estimates", "excluded"})
                out << ',' << detail::cell(s.at(k));
            out << '\n';
        }
}

inline constexpr std::array<Measure, 5> table_measures{Measure::auprc, Measure::lack_of_spread, Measure::citl,
                                                       Measure::calibration_slope, Measure::ici};

// Wide layout: one line per row, point / se / interval for the reported measures.
inline void write_study_table_csv(std::ostream& out, const Json& study)
{
    out << "z,alpha,model,proportion";
    for (Measure m : table_measures) {
        const std::string n(measure_name(m));
        out << ',' << n << ',' << n << "_se," << n << "_lower," << n << "_upper";
    }
    out << '\n';
    for (const auto& r : study.at("rows")) {
        out << detail::cell(r.at("z")) << ',' << detail::cell(r.at("alpha")) << ',' << detail::cell(r.at("model")) << ','
            << detail::cell(r.at("m_prop"));
        for (Measure m : table_measures) {
            const Json& s = r.at("measures").at(std::string(measure_name(m)));
            for (const char* k : {"point", "se", "lower", "upper"})
                out << ',' << detail::cell(s.at(k));
        }
        out << '\n';
    }
}

// Fixed-width text rendering of the wide table.
inline std::string study_text_table(const Json& study)
{
    auto fmt = [](const Json& v) {
        if (v.is_null())
            return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
        return std::string(buf);
    };
    std::ostringstream out;
    out << std::left << std::setw(4) << "z" << std::setw(7) << "alpha" << std::setw(6) << "model" << std::setw(7)
        << "prop";
    for (Measure m : table_measures)
        out << std::setw(36) << measure_name(m);
    out << '\n';
    for (const auto& r : study.at("rows")) {
        out << std::setw(4) << detail::cell(r.at("z")) << std::setw(7)
            << (r.at("alpha").is_null() ? std::string("-") : fmt(r.at("alpha"))) << std::setw(6)
            << r.at("model").get<std::string>() << std::setw(7) << fmt(r.at("m_prop"));
        for (Measure m : table_measures) {
            const Json& s = r.at("measures").at(std::string(measure_name(m)));
            out << std::setw(36)
                << (fmt(s.at("point")) + " (" + fmt(s.at("se")) + ") [" + fmt(s.at("lower")) + ", " + fmt(s.at("upper")) +
                    "]");
        }
        out << '\n';
    }
    return out.str();
}

} // namespace ppm
