#pragma once

// Numerical solution of the delayed integral equation satisfied by the
// scaling limit of the wave lead,
//
//     q(t) = e^t                  for 0 <= t < 1,
//     q(t) = integral_{t-1}^t q   for t >= 1,
//
// together with the mean-fitness limit m(t) = 1 + integral_0^{t-1} q for
// t >= 1 (0 before 1).  q jumps at t = 1 from e down to e - 1 and is taken
// right continuous; the left limits are kept in metadata and the marching
// quadrature splits every window at the jump so the O(h^2) order survives
// the discontinuity.
//
// An independent Monte Carlo oracle is provided: for a renewal process
// with Uniform(0,1) inter-arrival times, the right derivative of
// U(t) = E[#renewals by t] solves the same equation, and m(t) = 1 + U(t-1).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "fitwave/errors.hpp"
#include "fitwave/numeric.hpp"
#include "fitwave/rng.hpp"

namespace fitwave::renewal {

struct TheoryCurves {
    double h = 0;     // grid step; 1/h is an integer
    double t_max = 0; // last grid time
    std::vector<double> q; // q[i] = q(i*h), right-continuous value at t = 1
    std::vector<double> m; // m[i] = m(i*h), right-continuous value at t = 1
    std::size_t unit_index = 0;     // index of t = 1
    double q_left_at_1 = 0;         // left limit e (stored value is e - 1)
    double m_left_at_1 = 0;         // left limit 0 (stored value is 1)

    std::size_t size() const { return q.size(); }
    double t_of(std::size_t i) const { return static_cast<double>(i) * h; }

    // Linear interpolation; at the discontinuity the stored right limit
    // wins, so callers needing q(1-) must read q_left_at_1 themselves.
    double q_at(double t) const { return interp(q, t); }
    double m_at(double t) const { return interp(m, t); }

  private:
    double interp(const std::vector<double>& v, double t) const {
        if (t < 0.0 || t > t_max + 1e-12)
            throw QueryOutOfRange("TheoryCurves: t outside [0, t_max]");
        const double x = t / h;
        auto i = static_cast<std::size_t>(x);
        if (i + 1 >= v.size()) return v.back();
        const double frac = x - static_cast<double>(i);
        return v[i] + frac * (v[i + 1] - v[i]);
    }
};

namespace detail {

using numeric::KahanSum;

inline std::size_t steps_per_unit(double h) {
    const double inv = 1.0 / h;
    const auto n = static_cast<std::size_t>(std::llround(inv));
    if (n < 2 || std::abs(static_cast<double>(n) * h - 1.0) > 1e-12)
        throw InvalidGrid("solve_q: h must divide 1 exactly");
    return n;
}

} // namespace detail

// Marches q across [0, t_max] by the method of steps with an implicit
// composite-trapezoid window integral.  Global error O(h^2).
inline TheoryCurves solve_q(double h, double t_max) {
    const std::size_t n = detail::steps_per_unit(h);
    if (t_max < 1.0) throw InvalidGrid("solve_q: t_max must be >= 1");
    const auto total = static_cast<std::size_t>(std::llround(t_max / h));

    TheoryCurves cv;
    cv.h = h;
    cv.t_max = static_cast<double>(total) * h;
    cv.unit_index = n;
    cv.q_left_at_1 = std::exp(1.0);
    cv.m_left_at_1 = 0.0;
    cv.q.resize(total + 1);
    cv.m.assign(total + 1, 0.0);

    // I[i] = integral_0^{t_i} q, with the step ending at t = 1 closed with
    // the left limit e rather than the stored value e - 1.
    std::vector<double> prefix(total + 1, 0.0);
    detail::KahanSum acc;

    for (std::size_t i = 0; i < n && i <= total; ++i) cv.q[i] = std::exp(cv.t_of(i));
    for (std::size_t i = 1; i < n && i <= total; ++i) {
        acc.add(0.5 * h * (cv.q[i - 1] + cv.q[i]));
        prefix[i] = acc.sum;
    }
    if (n <= total) {
        acc.add(0.5 * h * (cv.q[n - 1] + cv.q_left_at_1));
        prefix[n] = acc.sum;
        cv.q[n] = prefix[n]; // q(1) = integral_0^1 e^u du = e - 1
    }
    const double half = 0.5 * h;
    for (std::size_t i = n + 1; i <= total; ++i) {
        // q_i solves q_i = I_{i-1} + (h/2)(q_{i-1} + q_i) - I_{i-n}
        cv.q[i] = (prefix[i - 1] - prefix[i - n] + half * cv.q[i - 1]) / (1.0 - half);
        acc.add(half * (cv.q[i - 1] + cv.q[i]));
        prefix[i] = acc.sum;
    }

    // m(t) = 1 + integral_0^{t-1} q for t >= 1 (prefix already carries the
    // split at the jump); 0 before 1.
    for (std::size_t i = n; i <= total; ++i) cv.m[i] = 1.0 + prefix[i - n];
    return cv;
}

// q and m on the default grid used by the CLI and the verification suite.
inline TheoryCurves solve_curves(double h = 1e-4, double t_max = 64.0) {
    return solve_q(h, t_max);
}

// Recomputes the defining window integral from the stored grid values
// (fresh trapezoid sum, split at the jump) and returns the residual
// q(t_i) - integral_{t_i - 1}^{t_i} q.  Diagnostic for drift in the
// marching prefix sums; O(h^2)-small at every grid point.
inline double defining_equation_residual(const TheoryCurves& cv, std::size_t i) {
    const std::size_t n = cv.unit_index;
    if (i < n || i >= cv.size()) throw QueryOutOfRange("residual: need 1 <= t_i <= t_max");
    detail::KahanSum acc;
    for (std::size_t k = i - n; k < i; ++k) {
        const double right = (k + 1 == n) ? cv.q_left_at_1 : cv.q[k + 1];
        acc.add(0.5 * cv.h * (cv.q[k] + right));
    }
    return cv.q[i] - acc.sum;
}

// ---------------------------------------------------------------------------
// Monte Carlo renewal oracle.
// ---------------------------------------------------------------------------

struct RenewalEstimate {
    double dt = 0;               // grid step of the estimate
    std::vector<double> t;       // grid times
    std::vector<double> U, U_se; // mean and standard error of #renewals
    std::vector<double> q, q_se; // finite-difference estimate of q = U'
    std::vector<double> m, m_se; // 1 + U(t-1)
    std::size_t paths = 0;

    std::size_t index_of(double time) const {
        const auto i = static_cast<std::size_t>(std::llround(time / dt));
        if (i >= t.size() || std::abs(t[i] - time) > 1e-9)
            throw QueryOutOfRange("RenewalEstimate: time not on grid");
        return i;
    }
};

// Simulates `n_paths` renewal processes with Uniform(0,1) gaps.  q is
// estimated by centered differences of U except at the jump t = 1, where a
// second-order right-sided difference matches the right-derivative
// convention (a centered stencil would straddle the jump and estimate the
// mean of the two one-sided limits).
inline RenewalEstimate renewal_oracle(double t_max, std::size_t n_paths, std::uint64_t seed,
                                      double dt = 0.025) {
    if (n_paths < 1) throw InvalidParams("renewal_oracle: n_paths must be >= 1");
    const double inv = 1.0 / dt;
    const auto per_unit = static_cast<std::size_t>(std::llround(inv));
    if (per_unit < 2 || std::abs(static_cast<double>(per_unit) * dt - 1.0) > 1e-12)
        throw InvalidGrid("renewal_oracle: dt must divide 1 exactly");
    // Two extra steps of margin so centered/one-sided stencils stay in range.
    const auto total = static_cast<std::size_t>(std::llround(t_max / dt)) + 2;

    RenewalEstimate est;
    est.dt = dt;
    est.paths = n_paths;
    est.t.resize(total + 1);
    for (std::size_t i = 0; i <= total; ++i) est.t[i] = static_cast<double>(i) * dt;

    std::vector<double> u_sum(total + 1, 0.0), u_sq(total + 1, 0.0);
    std::vector<double> d_sum(total + 1, 0.0), d_sq(total + 1, 0.0);
    std::vector<double> counts(total + 1, 0.0);

    for (std::size_t path = 0; path < n_paths; ++path) {
        rng::Xoshiro256 gen(rng::seed_for_replicate(seed, path));
        double next = gen.uniform01();
        double n_renewals = 0.0;
        for (std::size_t i = 0; i <= total; ++i) {
            const double tg = est.t[i];
            while (next <= tg) {
                n_renewals += 1.0;
                next += gen.uniform01();
            }
            counts[i] = n_renewals;
        }
        for (std::size_t i = 0; i <= total; ++i) {
            u_sum[i] += counts[i];
            u_sq[i] += counts[i] * counts[i];
            double diff;
            if (i == per_unit)
                diff = (-3.0 * counts[i] + 4.0 * counts[i + 1] - counts[i + 2]) / (2.0 * dt);
            else if (i >= 1 && i + 1 <= total)
                diff = (counts[i + 1] - counts[i - 1]) / (2.0 * dt);
            else
                diff = 0.0;
            d_sum[i] += diff;
            d_sq[i] += diff * diff;
        }
    }

    const double np = static_cast<double>(n_paths);
    auto finalize = [&](const std::vector<double>& sum, const std::vector<double>& sq,
                        std::vector<double>& mean, std::vector<double>& se) {
        mean.resize(total + 1);
        se.resize(total + 1);
        for (std::size_t i = 0; i <= total; ++i) {
            mean[i] = sum[i] / np;
            const double var = std::max(0.0, sq[i] / np - mean[i] * mean[i]);
            se[i] = n_paths > 1 ? std::sqrt(var / (np - 1.0)) : 0.0;
        }
    };
    finalize(u_sum, u_sq, est.U, est.U_se);
    finalize(d_sum, d_sq, est.q, est.q_se);

    est.m.assign(total + 1, 0.0);
    est.m_se.assign(total + 1, 0.0);
    for (std::size_t i = per_unit; i <= total; ++i) {
        est.m[i] = 1.0 + est.U[i - per_unit];
        est.m_se[i] = est.U_se[i - per_unit];
    }
    return est;
}

// CSV emission: one row per grid point, 17 significant digits so values
// round-trip bit exactly.
inline void write_curves_csv(std::FILE* out, const TheoryCurves& cv) {
    std::fputs("t,q,m\n", out);
    for (std::size_t i = 0; i < cv.size(); ++i)
        std::fprintf(out, "%.17g,%.17g,%.17g\n", cv.t_of(i), cv.q[i], cv.m[i]);
}

} // namespace fitwave::renewal
