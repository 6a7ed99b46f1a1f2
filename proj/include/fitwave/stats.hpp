#pragma once

// Statistics used by the verification harness: summary statistics with
// standard errors, a two-sample chi-square homogeneity test, and small
// least-squares fits.  Distribution CDFs come from Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "fitwave/errors.hpp"

namespace fitwave::stats {

struct MeanSE {
    double mean = 0;
    double se = 0;
    std::size_t n = 0;
};

inline MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double sum = 0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                           static_cast<double>(xs.size()));
    }
    return out;
}

// Linear-interpolation quantile of an unsorted sample.
inline double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

inline double median(const std::vector<double>& xs) { return quantile(xs, 0.5); }

inline double binomial_se(double fraction, std::size_t n) {
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(fraction * (1.0 - fraction) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Two-sample chi-square homogeneity test.
// ---------------------------------------------------------------------------

struct ChiSquareResult {
    double statistic = 0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

// Tests whether two samples of cell counts come from the same categorical
// distribution.  Cells with pooled expected count below `min_expected` are
// merged into the following cell.
inline ChiSquareResult chi_square_homogeneity(std::vector<double> a, std::vector<double> b,
                                              double min_expected = 5.0) {
    if (a.size() != b.size()) throw InvalidParams("chi_square_homogeneity: size mismatch");
    // merge sparse cells left to right
    std::vector<std::pair<double, double>> cells;
    double ca = 0, cb = 0;
    double na = 0, nb = 0;
    for (double x : a) na += x;
    for (double x : b) nb += x;
    const double total = na + nb;
    if (total <= 0) throw InvalidParams("chi_square_homogeneity: empty samples");
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += a[i];
        cb += b[i];
        const double pooled = ca + cb;
        const double exp_a = na * pooled / total;
        const double exp_b = nb * pooled / total;
        if (std::min(exp_a, exp_b) >= min_expected) {
            cells.emplace_back(ca, cb);
            ca = cb = 0;
        }
    }
    if (ca + cb > 0) {
        if (cells.empty()) cells.emplace_back(ca, cb);
        else {
            cells.back().first += ca;
            cells.back().second += cb;
        }
    }

    ChiSquareResult res;
    if (cells.size() < 2) {
        res.dof = 0;
        res.p_value = 1.0;
        return res;
    }
    for (const auto& [oa, ob] : cells) {
        const double pooled = oa + ob;
        const double ea = na * pooled / total;
        const double eb = nb * pooled / total;
        res.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    res.dof = cells.size() - 1;
    boost::math::chi_squared dist(static_cast<double>(res.dof));
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
    return res;
}

// Bin edges at the k-quantiles of a pooled sample (deciles by default).
// Duplicate edges from ties are dropped, so the bin count can be < k.
inline std::vector<double> quantile_edges(std::vector<double> pooled, int k = 10) {
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> edges;
    for (int i = 1; i < k; ++i) {
        const double pos = static_cast<double>(i) / k * static_cast<double>(pooled.size() - 1);
        const double e = pooled[static_cast<std::size_t>(pos)];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    return edges;
}

inline std::size_t bin_of(const std::vector<double>& edges, double x) {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                                    edges.begin());
}

// ---------------------------------------------------------------------------
// Least squares.
// ---------------------------------------------------------------------------

struct QuadraticFit {
    double c0 = 0, c1 = 0, c2 = 0; // y ~ c0 + c1 x + c2 x^2
};

// Weighted least squares on a quadratic, solved by Gaussian elimination on
// the 3x3 normal equations.
inline QuadraticFit wls_quadratic(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 3)
        throw TooFewTypes("wls_quadratic: need at least 3 points");
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p[3] = {1.0, x[i], x[i] * x[i]};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += w[i] * p[r] * p[c];
            m[r][3] += w[i] * p[r] * y[i];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-300)
            throw TooFewTypes("wls_quadratic: singular normal equations");
        std::swap(m[col], m[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return QuadraticFit{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

struct LineFit {
    double slope = 0, intercept = 0, correlation = 0;
    std::size_t n = 0;
};

inline LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    out.n = x.size();
    if (x.size() != y.size() || x.size() < 2) return out;
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cov = sxy - sx * sy / n;
    if (vx <= 0) return out;
    out.slope = cov / vx;
    out.intercept = (sy - out.slope * sx) / n;
    out.correlation = vy > 0 ? cov / std::sqrt(vx * vy) : 0.0;
    return out;
}

} // namespace fitwave::stats
