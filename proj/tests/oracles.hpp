#pragma once

// Brute-force reference implementations. Deliberately naive: they share no
// code with the library beyond plain containers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

// Pairwise concordance with half credit for ties.
inline double auroc(const std::vector<int>& y, const std::vector<double>& p)
{
    double credit = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1)
            continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0)
                continue;
            pairs += 1.0;
            if (p[i] > p[j])
                credit += 1.0;
            else if (p[i] == p[j])
                credit += 0.5;
        }
    }
    return credit / pairs;
}

// Enumerate every distinct threshold c (descending) and rescan all points:
// sum of P(c) * (R(c) - R(previous c)).
inline double auprc(const std::vector<int>& y, const std::vector<double>& p)
{
    std::set<double, std::greater<>> cutoffs(p.begin(), p.end());
    std::size_t npos = 0;
    for (int v : y)
        npos += static_cast<std::size_t>(v);
    double area = 0.0;
    std::size_t tp_prev = 0;
    for (double c : cutoffs) {
        std::size_t tp = 0, flagged = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (p[i] >= c) {
                ++flagged;
                tp += static_cast<std::size_t>(y[i]);
            }
        const double precision = static_cast<double>(tp) / static_cast<double>(flagged);
        area += precision * (static_cast<double>(tp - tp_prev) / static_cast<double>(npos));
        tp_prev = tp;
    }
    return area;
}

// Local linear fit at every point, computed independently: the q = ceil(span n)
// nearest neighbours, tricube weights scaled by the q-th distance, and a
// weighted least-squares line solved from uncentered normal equations.
inline std::vector<double> loess(const std::vector<double>& x, const std::vector<double>& y, double span)
{
    const std::size_t n = x.size();
    const auto q = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i)
            d[i] = std::abs(x[i] - x[k]);
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        const double h = sorted[std::min(q, n) - 1];
        long double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double w;
            if (h > 0) {
                const double u = d[i] / h;
                w = u < 1 ? std::pow(1 - u * u * u, 3) : 0.0;
            } else {
                w = d[i] == 0 ? 1.0 : 0.0;
            }
            s0 += w;
            s1 += w * x[i];
            s2 += w * x[i] * x[i];
            t0 += w * y[i];
            t1 += w * x[i] * y[i];
        }
        const long double det = s0 * s2 - s1 * s1;
        if (std::abs(static_cast<double>(det)) < 1e-14 * static_cast<double>(s0 * s0)) {
            out[k] = static_cast<double>(t0 / s0);
            continue;
        }
        const long double b = (s0 * t1 - s1 * t0) / det;
        const long double a = (t0 - b * s1) / s0;
        out[k] = static_cast<double>(a + b * x[k]);
    }
    return out;
}

inline double ici(const std::vector<int>& y, const std::vector<double>& p, double span = 0.75)
{
    std::vector<double> yd(y.begin(), y.end());
    const auto s = loess(p, yd, span);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        total += std::abs(std::clamp(s[i], 0.0, 1.0) - p[i]);
    return total / static_cast<double>(p.size());
}

// Standard normal via erfc; quantile by bisection on the cdf.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double phi_inv(double p)
{
    double lo = -40, hi = 40;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Hyndman-Fan type 7: h = (n-1) prob, linear interpolation.
inline double quantile7(std::vector<double> v, double prob)
{
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

struct Bca {
    double z0, a, alpha1, alpha2, lower, upper;
};

// Step-by-step BCa, spreadsheet style.
inline Bca bca(const std::vector<double>& est, double point, const std::vector<double>& jack, double level)
{
    const double B = static_cast<double>(est.size());
    double below = 0, ties = 0;
    for (double e : est) {
        if (e < point)
            below += 1;
        else if (e == point)
            ties += 1;
    }
    double frac = (below + 0.5 * ties) / B;
    frac = std::clamp(frac, 1.0 / (B + 1.0), B / (B + 1.0));
    const double z0 = phi_inv(frac);

    double a = 0.0;
    if (jack.size() >= 2) {
        double m = 0;
        for (double t : jack)
            m += t;
        m /= static_cast<double>(jack.size());
        double num = 0, den = 0;
        for (double t : jack) {
            num += std::pow(m - t, 3);
            den += std::pow(m - t, 2);
        }
        a = den > 0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;
    }
    const double zl = phi_inv((1 - level) / 2), zu = phi_inv(1 - (1 - level) / 2);
    const double alpha1 = phi(z0 + (z0 + zl) / (1 - a * (z0 + zl)));
    const double alpha2 = phi(z0 + (z0 + zu) / (1 - a * (z0 + zu)));
    return {z0, a, alpha1, alpha2, quantile7(est, alpha1), quantile7(est, alpha2)};
}

// Plain Newton on the logistic likelihood with explicit loops, full-pivot LU
// and backtracking, started from zero. Design must include the intercept.
inline Eigen::VectorXd logistic_mle(const Eigen::MatrixXd& X, const std::vector<int>& y, double grad_tol = 1e-13)
{
    const auto n = X.rows(), k = X.cols();
    auto loglik = [&](const Eigen::VectorXd& b) {
        long double ll = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double eta = 0;
            for (Eigen::Index j = 0; j < k; ++j)
                eta += X(i, j) * b[j];
            ll += y[static_cast<std::size_t>(i)] * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)));
        }
        return static_cast<double>(ll);
    };
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            double eta = 0;
            for (Eigen::Index j = 0; j < k; ++j)
                eta += X(i, j) * b[j];
            const double p = 1.0 / (1.0 + std::exp(-eta));
            for (Eigen::Index j = 0; j < k; ++j) {
                g[j] += (y[static_cast<std::size_t>(i)] - p) * X(i, j);
                for (Eigen::Index l = 0; l < k; ++l)
                    H(j, l) += p * (1 - p) * X(i, j) * X(i, l);
            }
        }
        if (g.norm() < grad_tol)
            break;
        Eigen::VectorXd step = H.fullPivLu().solve(g);
        double t = 1.0;
        const double ll0 = loglik(b);
        while (loglik(b + t * step) < ll0 && t > 1e-10)
            t *= 0.5;
        b += t * step;
    }
    return b;
}

inline std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && v[idx[j]] == v[idx[i]])
            ++j;
        for (std::size_t k = i; k < j; ++k)
            r[idx[k]] = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        i = j;
    }
    return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Random prediction set with a few deliberate ties.
struct RandomSet {
    std::vector<int> y;
    std::vector<double> p;
};

inline RandomSet random_set(std::mt19937_64& rng, std::size_t n, bool ties = true)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomSet s;
    for (std::size_t i = 0; i < n; ++i) {
        double p = 0.001 + 0.998 * u(rng);
        if (ties)
            p = std::round(p * 50.0) / 50.0;
        p = std::clamp(p, 0.001, 0.999);
        s.p.push_back(p);
        s.y.push_back(u(rng) < p ? 1 : 0);
    }
    s.y[0] = 1;
    s.y[1] = 0;
    return s;
}

} // namespace oracle
