#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "log.hpp"
#include "similarity.hpp"

namespace ppm {

struct FitConfig {
    int max_iter = 50;
    double tol = 1e-8;                  // on the absolute log-likelihood change
    double ridge = 0.0;                 // L2 penalty on slopes (intercept unpenalized)
    double separation_threshold = 15.0; // |coefficient| above this flags separation
};

inline void validate_fit_config(const FitConfig& cfg)
{
    if (cfg.max_iter < 1)
        throw ConfigError("FitConfig.max_iter must be >= 1");
    if (!(cfg.tol > 0.0))
        throw ConfigError("FitConfig.tol must be > 0");
    if (!(cfg.ridge >= 0.0))
        throw ConfigError("FitConfig.ridge must be >= 0");
}

struct LogisticModel {
    Eigen::VectorXd coefficients; // intercept first
    bool converged = false;
    int iterations = 0;
    bool separation_flag = false;
    bool ridge_retry = false;
    double log_likelihood = 0.0;
    std::vector<std::string> notes;
};

inline constexpr double prob_floor = 1e-12;
inline constexpr double retry_ridge = 1e-8;

inline double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double clamp_prob(double p) { return std::clamp(p, prob_floor, 1.0 - prob_floor); }

namespace detail {

inline double log1pexp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Newton-Raphson on the (ridge-penalized) logistic log-likelihood with step
// halving. Column 0 of `design` is the intercept and is never penalized.
inline LogisticModel irls(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd* offset,
                          const FitConfig& cfg, const Eigen::VectorXd& start)
{
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.cols();
    const double ridge = cfg.ridge;

    Eigen::VectorXd eta(n);
    auto objective = [&](const Eigen::VectorXd& b) {
        eta.noalias() = design * b;
        if (offset)
            eta += *offset;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            ll += y[i] * eta[i] - log1pexp(eta[i]);
        if (ridge > 0.0)
            ll -= 0.5 * ridge * b.tail(k - 1).squaredNorm();
        return ll;
    };

    LogisticModel m;
    Eigen::VectorXd beta = start;
    double ll = objective(beta);

    Eigen::VectorXd p(n), sw(n), grad(k), delta(k), cand(k);
    Eigen::MatrixXd weighted(n, k), hessian(k, k);
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(k);

    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = sigmoid(eta[i]);
            sw[i] = std::sqrt(p[i] * (1.0 - p[i]));
        }
        grad.noalias() = design.transpose() * (y - p);
        weighted = design.array().colwise() * sw.array();
        hessian.setZero();
        hessian.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
        if (ridge > 0.0) {
            grad.tail(k - 1) -= ridge * beta.tail(k - 1);
            hessian.diagonal().tail(k - 1).array() += ridge;
        }

        llt.compute(hessian);
        bool singular = llt.info() != Eigen::Success || !(llt.rcond() > 1e-13);
        if (!singular) {
            delta = llt.solve(grad);
            singular = !delta.allFinite();
        }
        if (singular) {
            if (ridge < retry_ridge) {
                FitConfig retry = cfg;
                retry.ridge = retry_ridge;
                LogisticModel r = irls(design, y, offset, retry, start);
                r.ridge_retry = true;
                r.notes.insert(r.notes.begin(), "singular weighted system; refit with ridge 1e-8");
                return r;
            }
            throw NumericalError("IRLS: singular weighted system even with ridge " + std::to_string(ridge));
        }

        double step = 1.0;
        double ll_new = ll;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            cand = beta + step * delta;
            ll_new = objective(cand);
            if (std::isfinite(ll_new) && ll_new >= ll) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        m.iterations = it;
        if (!improved) {
            // No ascent direction left at working precision.
            m.converged = true;
            break;
        }
        const double change = ll_new - ll;
        beta = cand;
        ll = ll_new;
        if (std::abs(change) < cfg.tol) {
            m.converged = true;
            break;
        }
    }

    m.coefficients = beta;
    m.log_likelihood = ll;
    m.separation_flag = (beta.array().abs() > cfg.separation_threshold).any();
    if (!beta.allFinite())
        throw NumericalError("IRLS produced non-finite coefficients");
    return m;
}

inline Eigen::VectorXd default_start(const Eigen::VectorXd& y, Eigen::Index k)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    b[0] = logit(std::clamp(y.mean(), 1e-3, 1.0 - 1e-3));
    return b;
}

inline LogisticModel fit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const FitConfig& cfg)
{
    LogisticModel m = irls(design, y, nullptr, cfg, default_start(y, design.cols()));
    if (design.rows() < design.cols())
        m.notes.push_back("fewer rows than parameters");
    return m;
}

} // namespace detail

// Logistic regression of y on the columns of X (an intercept is added).
template <class Derived>
LogisticModel fit_logistic(const Eigen::MatrixBase<Derived>& X, std::span<const int> y, const FitConfig& cfg = {})
{
    validate_fit_config(cfg);
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw ConfigError("fit_logistic: X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
    if (y.empty())
        throw DataError("fit_logistic: no rows");
    Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
    std::size_t pos = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1)
            throw DataError("fit_logistic: outcome must be 0 or 1");
        yv[static_cast<Eigen::Index>(i)] = y[i];
        pos += static_cast<std::size_t>(y[i]);
    }
    if (pos == 0 || pos == y.size())
        throw DataError("fit_logistic: degenerate outcome (single class)");

    Eigen::MatrixXd design(X.rows(), X.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(X.cols()) = X;
    return detail::fit_design(design, yv, cfg);
}

template <class Derived>
double predict_prob(const LogisticModel& m, const Eigen::DenseBase<Derived>& x)
{
    if (x.size() + 1 != m.coefficients.size())
        throw ConfigError("predict_prob: dimension mismatch");
    double eta = m.coefficients[0];
    for (Eigen::Index j = 0; j < x.size(); ++j)
        eta += m.coefficients[j + 1] * x.derived().coeff(j);
    return clamp_prob(sigmoid(eta));
}

struct PpmPrediction {
    double probability = 0.5;
    bool fallback = false; // single-class subpopulation
    bool separation = false;
    bool ridge_retry = false;
    bool converged = true;
};

// Laplace-smoothed subpopulation mean, used when only one class is present.
inline double single_class_fallback(std::size_t positives, std::size_t M)
{
    return (static_cast<double>(positives) + 0.5) / (static_cast<double>(M) + 1.0);
}

// Model fit on one subpopulation; single-class subpopulations fall back to
// the smoothed outcome mean instead of a logistic fit.
struct SubpopulationFit {
    LogisticModel model;
    bool fallback = false;
    double fallback_probability = 0.5;

    template <class Row>
    PpmPrediction predict(const Eigen::DenseBase<Row>& index) const
    {
        PpmPrediction out;
        if (fallback) {
            out.fallback = true;
            out.probability = fallback_probability;
            return out;
        }
        out.probability = predict_prob(model, index);
        out.separation = model.separation_flag;
        out.ridge_retry = model.ridge_retry;
        out.converged = model.converged;
        return out;
    }
};

inline SubpopulationFit fit_subpopulation(const Dataset& train, std::span<const std::size_t> rows, const FitConfig& cfg)
{
    const auto M = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(train.cols());
    SubpopulationFit fit;
    std::size_t positives = 0;
    for (auto r : rows)
        positives += static_cast<std::size_t>(train.outcome[r]);
    if (positives == 0 || positives == rows.size()) {
        fit.fallback = true;
        fit.fallback_probability = single_class_fallback(positives, rows.size());
        return fit;
    }
    Eigen::MatrixXd design(M, p + 1);
    Eigen::VectorXd y(M);
    design.col(0).setOnes();
    for (Eigen::Index i = 0; i < M; ++i) {
        const std::size_t r = rows[static_cast<std::size_t>(i)];
        design.row(i).tail(p) = train.row(r);
        y[i] = train.outcome[r];
    }
    fit.model = detail::fit_design(design, y, cfg);
    return fit;
}

// Fits on the given training rows and predicts the index patient.
template <class Row>
PpmPrediction predict_from_rows(const Eigen::DenseBase<Row>& index, const Dataset& train, std::span<const std::size_t> rows,
                                const FitConfig& cfg)
{
    return fit_subpopulation(train, rows, cfg).predict(index);
}

// score_all -> top_m -> fit_logistic -> predict_prob, with diagnostics.
template <class Row>
PpmPrediction predict_ppm(const Eigen::DenseBase<Row>& index, const Dataset& train, std::size_t M, const FitConfig& cfg = {},
                          std::size_t index_id = 0)
{
    validate_fit_config(cfg);
    auto scores = score_all(index, train, index_id);
    auto sub = top_m(scores, M);
    return predict_from_rows(index, train, sub.row_indices, cfg);
}

template <class Row>
double fit_ppm_and_predict(const Eigen::DenseBase<Row>& index, const Dataset& train, std::size_t M, const FitConfig& cfg = {},
                           std::size_t index_id = 0)
{
    PpmPrediction r = predict_ppm(index, train, M, cfg, index_id);
    if (r.fallback)
        log_warning("index patient " + std::to_string(index_id) + ": single-class subpopulation of size " +
                    std::to_string(M) + "; using smoothed outcome mean");
    return r.probability;
}

} // namespace ppm
