#pragma once

// Closed-form scales and predictions derived from the model parameters:
// the characteristic time a_N between a type's establishment and its
// dominance, the characteristic width k_N of the fitness wave, and the
// Desai-Fisher / Rouzine-Brunet-Wilke rate-of-adaptation formulas.

#include <cmath>
#include <cstdint>

#include "fitwave/errors.hpp"
#include "fitwave/model.hpp"

namespace fitwave::theory {

struct Scales {
    double a_N = 0;       // (1/s) ln(s/mu)
    double k_N = 0;       // ln N / ln(s/mu)
    double k_N_minus = 0; // k_N - (ln N / ln(s/mu)^2) ln k_N
    double k_N_plus = 0;  // k_N + 2 (ln N / ln(s/mu)^2) ln k_N
    std::int64_t k_star = 0; // largest integer < k_N_plus
    double t_star = 0;    // (4/s) ln k_N if an integer lies in (k_N_minus, k_N_plus), else (2/s) ln k_N

    // Finite-N values of the three asymptotic assumption expressions.
    // Reported as diagnostics only; no threshold is meaningful at fixed N.
    double A1 = 0; // ln N / (ln(s/mu) ln(1/s))         -> infinity in the regime
    double A2 = 0; // ln N / ln(s/mu)^2 * ln(ln N/ln(s/mu)) -> 0
    double A3 = 0; // s ln N / ln(s/mu) = s k_N          -> 0
};

inline Scales scales(const ModelParams& p) {
    if (!(p.mu > 0.0) || p.mu >= p.s)
        throw InvalidParams("scales: need 0 < mu < s");
    Scales sc;
    const double ln_sm = std::log(p.s / p.mu);
    const double ln_n = std::log(static_cast<double>(p.N));
    sc.a_N = ln_sm / p.s;
    sc.k_N = ln_n / ln_sm;
    const double corr = ln_n / (ln_sm * ln_sm) * std::log(sc.k_N);
    sc.k_N_minus = sc.k_N - corr;
    sc.k_N_plus = sc.k_N + 2.0 * corr;
    sc.k_star = static_cast<std::int64_t>(std::ceil(sc.k_N_plus)) - 1;
    const bool integer_between = std::floor(sc.k_N_minus) + 1.0 < sc.k_N_plus;
    sc.t_star = (integer_between ? 4.0 : 2.0) / p.s * std::log(sc.k_N);
    sc.A1 = ln_n / (ln_sm * std::log(1.0 / p.s));
    sc.A2 = ln_n / (ln_sm * ln_sm) * std::log(ln_n / ln_sm);
    sc.A3 = p.s * ln_n / ln_sm;
    return sc;
}

// Early-phase deterministic curve x_j(t) = N mu^j (e^{st}-1)^j / (s^j j!),
// the expected number of type j individuals while the mean fitness is
// still near zero.  Evaluated in log space: j! and (e^{st}-1)^j overflow
// at modest j otherwise.
inline double early_curve(std::int64_t j, double t, const ModelParams& p) {
    if (j == 0) return static_cast<double>(p.N);
    const double st = p.s * t;
    if (st <= 0.0) return 0.0;
    // log(e^{st} - 1), stable for both tiny and large st
    const double log_em1 = st > 36.0 ? st : std::log(std::expm1(st));
    const double jd = static_cast<double>(j);
    const double log_x = std::log(static_cast<double>(p.N)) +
                         jd * (std::log(p.mu) - std::log(p.s) + log_em1) -
                         std::lgamma(jd + 1.0);
    return std::exp(log_x);
}

struct Predictions {
    double df_width;  // 2 ln(N s) / ln(s/mu)
    double df_speed;  // 2 s ln(N s) / ln(s/mu)^2
    double rbw_speed; // 2 s ln(N sqrt(s mu)) / ln((s/mu) ln(N sqrt(s mu)))^2
    double sigma_sq;  // q(t-1) ln N / ln(s/mu)^2, with q(t-1) passed in
    double tau_gap;   // a_N / (q * k_N): heuristic spacing of establishment times
};

inline Predictions predictions(const ModelParams& p, double q_at) {
    const double ln_sm = std::log(p.s / p.mu);
    const double ln_n = std::log(static_cast<double>(p.N));
    const double ln_ns = std::log(static_cast<double>(p.N) * p.s);
    const double ln_nr = std::log(static_cast<double>(p.N) * std::sqrt(p.s * p.mu));
    const double rbw_den = std::log((p.s / p.mu) * ln_nr);
    Predictions out;
    out.df_width = 2.0 * ln_ns / ln_sm;
    out.df_speed = 2.0 * p.s * ln_ns / (ln_sm * ln_sm);
    out.rbw_speed = 2.0 * p.s * ln_nr / (rbw_den * rbw_den);
    out.sigma_sq = q_at * ln_n / (ln_sm * ln_sm);
    const double a_n = ln_sm / p.s;
    const double k_n = ln_n / ln_sm;
    out.tau_gap = a_n / (q_at * k_n);
    return out;
}

// Heuristic gap tau_{j+1} - tau_j ~ a_N / Q(tau_j) for an observed lead Q.
inline double tau_gap_from_lead(const Scales& sc, double q_at_tau) {
    return sc.a_N / q_at_tau;
}

// Predicted value of ln(X_{j(t)+ell} / X_{j(t)}) at time a_N t:
// -ln(s/mu)^2 (ell^2 - 2 ell d) / (2 q(t-1) ln N).  The Gaussian-wave
// picture: a quadratic in ell with curvature set by the wave variance.
inline double gauss_log_ratio(std::int64_t ell, double d, double q_tm1, const ModelParams& p) {
    const double ln_sm = std::log(p.s / p.mu);
    const double ln_n = std::log(static_cast<double>(p.N));
    const double l = static_cast<double>(ell);
    return -ln_sm * ln_sm * (l * l - 2.0 * l * d) / (2.0 * q_tm1 * ln_n);
}

} // namespace fitwave::theory
