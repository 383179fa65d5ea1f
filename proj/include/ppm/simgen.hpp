#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "glm.hpp"
#include "random.hpp"
#include "ppm/scenario_library_data.hpp"

namespace ppm {

// N(mean, variance): the second parameter is a variance, so N(30, 4) has
// standard deviation 2.
struct ContinuousBlock {
    int count = 0;
    double mean = 0.0;
    double variance = 1.0;
};

struct BernoulliBlock {
    int count = 0;
    double probability = 0.5;
};

struct ClusterSpec {
    std::size_t n = 0;
    std::vector<ContinuousBlock> continuous;
    std::vector<BernoulliBlock> bernoulli;

    int predictors() const
    {
        int p = 0;
        for (const auto& b : continuous)
            p += b.count;
        for (const auto& b : bernoulli)
            p += b.count;
        return p;
    }
};

inline ClusterSpec default_cluster1(std::size_t n = 5000)
{
    return {n, {{8, 30.0, 4.0}, {5, 5.0, 1.0}, {7, 89.0, 29.0}}, {{7, 0.3}, {9, 0.5}, {4, 0.7}}};
}

inline ClusterSpec default_cluster2(std::size_t n = 5000)
{
    return {n, {{8, 20.0, 8.0}, {5, 15.0, 8.0}, {7, 50.0, 9.0}}, {{7, 0.5}, {9, 0.15}, {4, 0.45}}};
}

inline void validate_cluster_spec(const ClusterSpec& s)
{
    for (const auto& b : s.continuous)
        if (b.count < 0 || !(b.variance > 0.0))
            throw ConfigError("continuous block needs count >= 0 and variance > 0");
    for (const auto& b : s.bernoulli)
        if (b.count < 0 || !(b.probability > 0.0 && b.probability < 1.0))
            throw ConfigError("Bernoulli block needs count >= 0 and probability in (0, 1)");
}

// Unstandardized predictors: cluster 1 rows, then cluster 2 rows; columns in
// block order (continuous blocks, then Bernoulli blocks).
inline Matrix gen_raw_predictors(const ClusterSpec& c1, const ClusterSpec& c2, std::uint64_t seed)
{
    validate_cluster_spec(c1);
    validate_cluster_spec(c2);
    if (c1.predictors() != c2.predictors())
        throw ConfigError("both clusters must have the same number of predictors");
    if (c1.n + c2.n == 0 || c1.predictors() == 0)
        throw ConfigError("simulation needs at least one row and one predictor");

    Matrix x(static_cast<Eigen::Index>(c1.n + c2.n), c1.predictors());
    Rng rng(derive_seed(seed, {stream::predictors}));
    Eigen::Index row = 0;
    for (const ClusterSpec* c : {&c1, &c2}) {
        for (std::size_t i = 0; i < c->n; ++i, ++row) {
            Eigen::Index col = 0;
            for (const auto& b : c->continuous) {
                std::normal_distribution<double> dist(b.mean, std::sqrt(b.variance));
                for (int k = 0; k < b.count; ++k)
                    x(row, col++) = dist(rng);
            }
            for (const auto& b : c->bernoulli) {
                std::bernoulli_distribution dist(b.probability);
                for (int k = 0; k < b.count; ++k)
                    x(row, col++) = dist(rng) ? 1.0 : 0.0;
            }
        }
    }
    return x;
}

// Standardized predictors with a placeholder all-zero outcome.
inline Dataset gen_predictors(const ClusterSpec& c1, const ClusterSpec& c2, std::uint64_t seed)
{
    Dataset d;
    d.predictors = gen_raw_predictors(c1, c2, seed);
    d.outcome.assign(d.rows(), 0);
    for (std::size_t j = 0; j < d.cols(); ++j)
        d.feature_names.push_back("x" + std::to_string(j + 1));
    return standardize(d);
}

enum class OutcomeForm { linear, nonlinear };
enum class Prevalence { low, moderate, balanced };

inline double prevalence_target(Prevalence p)
{
    switch (p) {
    case Prevalence::low: return 0.05;
    case Prevalence::moderate: return 0.15;
    case Prevalence::balanced: return 0.5;
    }
    return 0.5;
}

enum class Transform { linear, product, exp_product, sin_product, cos_product, power };

struct Term {
    Transform transform = Transform::linear;
    std::vector<int> predictors; // 0-based columns
    double coef = 0.0;
    double exponent = 1.0;

    template <class Row>
    double eval(const Row& x) const
    {
        const double a = x(predictors.at(0));
        switch (transform) {
        case Transform::linear: return coef * a;
        case Transform::product: return coef * a * x(predictors.at(1));
        case Transform::exp_product: return coef * std::exp(a * x(predictors.at(1)));
        case Transform::sin_product: return coef * std::sin(a * x(predictors.at(1)));
        case Transform::cos_product: return coef * std::cos(a * x(predictors.at(1)));
        case Transform::power: return coef * std::pow(a, exponent);
        }
        return 0.0;
    }
};

// Per-cluster linear predictor z = intercept + sum(terms) + noise,
// outcome ~ Bernoulli(1 / (1 + exp(-z))).
struct OutcomeModel {
    OutcomeForm form = OutcomeForm::linear;
    std::array<std::vector<Term>, 2> terms;
    std::array<double, 2> intercepts{0.0, 0.0};
    double noise_sd = 1.0;
    double target_prevalence = 0.5;
};

// pi for one patient of cluster 0 or 1, given its noise draw.
template <class Row>
double outcome_probability(const Row& x, int cluster, const OutcomeModel& model, double noise = 0.0)
{
    const auto c = static_cast<std::size_t>(cluster);
    double z = model.intercepts.at(c) + model.noise_sd * noise;
    for (const auto& t : model.terms.at(c))
        z += t.eval(x);
    return sigmoid(z);
}

struct ScenarioId {
    OutcomeForm form = OutcomeForm::linear;
    int n_assoc = 10;
    Prevalence prevalence = Prevalence::low;

    std::string str() const
    {
        static constexpr std::string_view prev[] = {"low", "moderate", "balanced"};
        return std::string(form == OutcomeForm::linear ? "linear" : "nonlinear") + "-" + std::to_string(n_assoc) + "-" +
               std::string(prev[static_cast<int>(prevalence)]);
    }

    bool operator==(const ScenarioId&) const = default;
};

inline std::vector<ScenarioId> all_scenarios()
{
    std::vector<ScenarioId> out;
    for (auto f : {OutcomeForm::linear, OutcomeForm::nonlinear})
        for (int k : {10, 20})
            for (auto p : {Prevalence::low, Prevalence::moderate, Prevalence::balanced})
                out.push_back({f, k, p});
    return out;
}

inline ScenarioId parse_scenario_id(std::string_view s)
{
    for (const auto& id : all_scenarios())
        if (id.str() == s)
            return id;
    std::string valid;
    for (const auto& id : all_scenarios())
        valid += (valid.empty() ? "" : ", ") + id.str();
    throw ConfigError("unknown scenario '" + std::string(s) + "'; valid ids: " + valid);
}

// Outcome-model library: one model per scenario id, read from JSON.
class ScenarioLibrary {
public:
    static ScenarioLibrary parse(std::string_view text)
    {
        ScenarioLibrary lib;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("scenario library: ") + e.what());
        }
        try {
            lib.version_ = doc.at("version").get<int>();
            const double noise = doc.value("noise_sd", 1.0);
            for (const auto& s : doc.at("scenarios")) {
                const ScenarioId id = parse_scenario_id(s.at("id").get<std::string>());
                OutcomeModel m;
                m.form = id.form;
                m.noise_sd = noise;
                m.target_prevalence = s.at("target_prevalence").get<double>();
                const auto ic = s.at("intercepts");
                const auto cl = s.at("clusters");
                if (ic.size() != 2 || cl.size() != 2)
                    throw DataError("scenario " + id.str() + ": expected two clusters");
                for (std::size_t c = 0; c < 2; ++c) {
                    m.intercepts[c] = ic[c].get<double>();
                    for (const auto& t : cl[c])
                        m.terms[c].push_back(parse_term(t));
                }
                lib.entries_.emplace_back(id, std::move(m));
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("scenario library: ") + e.what());
        }
        for (const auto& id : all_scenarios())
            (void)lib.model(id);
        return lib;
    }

    static ScenarioLibrary load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw DataError(path + ": cannot open scenario library");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static const ScenarioLibrary& builtin()
    {
        static const ScenarioLibrary lib = parse(builtin_scenario_library_json);
        return lib;
    }

    const OutcomeModel& model(const ScenarioId& id) const
    {
        for (const auto& [k, m] : entries_)
            if (k == id)
                return m;
        throw DataError("scenario library has no entry for " + id.str());
    }

    int version() const { return version_; }

private:
    static Term parse_term(const nlohmann::json& t)
    {
        static const std::pair<std::string_view, Transform> names[] = {
            {"linear", Transform::linear},           {"product", Transform::product},
            {"exp_product", Transform::exp_product}, {"sin_product", Transform::sin_product},
            {"cos_product", Transform::cos_product}, {"power", Transform::power}};
        Term term;
        const auto name = t.at("transform").get<std::string>();
        bool found = false;
        for (const auto& [n, tr] : names)
            if (n == name) {
                term.transform = tr;
                found = true;
            }
        if (!found)
            throw DataError("scenario library: unknown transform '" + name + "'");
        for (const auto& i : t.at("predictors")) {
            const int idx = i.get<int>();
            if (idx < 1)
                throw DataError("scenario library: predictor indices are 1-based");
            term.predictors.push_back(idx - 1);
        }
        const std::size_t arity = (term.transform == Transform::linear || term.transform == Transform::power) ? 1 : 2;
        if (term.predictors.size() != arity)
            throw DataError("scenario library: transform '" + name + "' takes " + std::to_string(arity) + " predictor(s)");
        term.coef = t.at("coef").get<double>();
        term.exponent = t.value("exponent", 1.0);
        return term;
    }

    int version_ = 0;
    std::vector<std::pair<ScenarioId, OutcomeModel>> entries_;
};

namespace detail {

// Linear predictor without intercepts, noise included.
inline std::vector<double> outcome_scores(const Dataset& x, std::size_t n1, const OutcomeModel& model, Rng& rng)
{
    for (const auto& terms : model.terms)
        for (const auto& t : terms)
            for (int j : t.predictors)
                if (j < 0 || static_cast<std::size_t>(j) >= x.cols())
                    throw ConfigError("outcome model references predictor x" + std::to_string(j + 1) + " but data has " +
                                      std::to_string(x.cols()));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> z(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        double s = 0.0;
        for (const auto& t : model.terms[i < n1 ? 0 : 1])
            s += t.eval(row);
        z[i] = s + model.noise_sd * noise(rng);
    }
    return z;
}

inline std::vector<int> draw_outcomes(std::span<const double> z, std::size_t n1, const OutcomeModel& model, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        y[i] = u(rng) < sigmoid(z[i] + model.intercepts[i < n1 ? 0 : 1]) ? 1 : 0;
    return y;
}

inline std::vector<int> simulate_outcome(const Dataset& x, std::size_t n1, const OutcomeModel& model, std::uint64_t seed)
{
    if (n1 > x.rows())
        throw ConfigError("cluster-1 size exceeds the number of rows");
    Rng rng(derive_seed(seed, {stream::outcome}));
    const auto z = outcome_scores(x, n1, model, rng);
    return draw_outcomes(z, n1, model, rng);
}

} // namespace detail

// Outcomes from a linear model; rows [0, n1) belong to cluster 1.
inline std::vector<int> linear_outcome(const Dataset& x, std::size_t n1, const OutcomeModel& model, std::uint64_t seed)
{
    if (model.form != OutcomeForm::linear)
        throw ConfigError("linear_outcome needs a linear outcome model");
    return detail::simulate_outcome(x, n1, model, seed);
}

inline std::vector<int> nonlinear_outcome(const Dataset& x, std::size_t n1, const OutcomeModel& model, std::uint64_t seed)
{
    if (model.form != OutcomeForm::nonlinear)
        throw ConfigError("nonlinear_outcome needs a non-linear outcome model");
    return detail::simulate_outcome(x, n1, model, seed);
}

// Shift c with mean(sigmoid(z + c)) = target, by bisection.
inline double calibrate_intercept(std::span<const double> z, double target)
{
    if (!(target > 0.0 && target < 1.0))
        throw ConfigError("target prevalence must lie in (0, 1)");
    if (z.empty())
        throw ConfigError("calibrate_intercept: empty score vector");
    auto excess = [&](double c) {
        double s = 0.0;
        for (double v : z)
            s += sigmoid(v + c);
        return s / static_cast<double>(z.size()) - target;
    };
    double lo = -1.0, hi = 1.0;
    for (int i = 0; excess(lo) > 0.0; ++i) {
        if (i > 12)
            throw NumericalError("calibrate_intercept: cannot bracket the target from below");
        lo *= 2.0;
    }
    for (int i = 0; excess(hi) < 0.0; ++i) {
        if (i > 12)
            throw NumericalError("calibrate_intercept: cannot bracket the target from above");
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double e = excess(mid);
        if (e == 0.0)
            return mid;
        (e < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Full scenario dataset. Both cluster intercepts are shifted by one common
// constant so that the expected prevalence hits the scenario target; the
// library's intercept gap between clusters is preserved.
inline Dataset scenario(const ScenarioId& id, std::size_t n1, std::size_t n2, std::uint64_t seed,
                        const ScenarioLibrary& lib = ScenarioLibrary::builtin())
{
    Dataset d = gen_predictors(default_cluster1(n1), default_cluster2(n2), seed);
    OutcomeModel model = lib.model(id);

    Rng rng(derive_seed(seed, {stream::outcome}));
    auto z = detail::outcome_scores(d, n1, model, rng);
    std::vector<double> with_base(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        with_base[i] = z[i] + model.intercepts[i < n1 ? 0 : 1];
    const double shift = calibrate_intercept(with_base, model.target_prevalence);
    model.intercepts[0] += shift;
    model.intercepts[1] += shift;
    d.outcome = detail::draw_outcomes(z, n1, model, rng);
    return d;
}

} // namespace ppm
