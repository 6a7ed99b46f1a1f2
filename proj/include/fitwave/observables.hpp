#pragma once

// Wave observables derived from trajectories -- the lead Q, the type
// turnover count R, the dominant type index j(t) and its phase d(t) -- and
// the martingale diagnostics Z_j / Y_j, which are exact finite-N properties
// of the model and the strongest correctness check available for the
// event engine.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <vector>

#include "fitwave/engine.hpp"
#include "fitwave/errors.hpp"
#include "fitwave/model.hpp"
#include "fitwave/numeric.hpp"
#include "fitwave/theory.hpp"

namespace fitwave::observables {

struct WaveRecord {
    double time = 0;
    double mean = 0;   // M
    double lead = 0;   // Q = jmax - M
    double turnover = 0; // R(t) = k* 1{t < a_N} + #{j >= k*+1: t-a_N < tau_j <= t}
    std::int64_t jmin = 0, jmax = 0;
};

inline double turnover_R(const engine::Trajectory& tr, const theory::Scales& sc, double t) {
    double r = t < sc.a_N ? static_cast<double>(sc.k_star) : 0.0;
    for (const auto& rec : tr.taus)
        if (rec.j >= sc.k_star + 1 && rec.tau > t - sc.a_N && rec.tau <= t) r += 1.0;
    return r;
}

// One row per recorded snapshot.
inline std::vector<WaveRecord> wave_records(const engine::Trajectory& tr,
                                            const theory::Scales& sc) {
    std::vector<WaveRecord> rows;
    rows.reserve(tr.snapshots.size());
    for (const auto& snap : tr.snapshots) {
        WaveRecord row;
        row.time = snap.time;
        row.mean = snap.mean_mutations();
        row.lead = snap.lead();
        row.turnover = turnover_R(tr, sc, snap.time);
        row.jmin = snap.jmin;
        row.jmax = snap.jmax;
        rows.push_back(row);
    }
    return rows;
}

// Dominant-type index and phase at scaled time t (in units of a_N):
// j(t) = max{j: gamma_j <= a_N t} with gamma_j = tau_j + a_N and gamma_0 =
// a_N, and d(t) in [-1/2, 1/2) solving
//     a_N t = (1/2 - d) gamma_j(t) + (1/2 + d) gamma_{j(t)+1}.
// d is absent (not 0) when gamma_{j(t)+1} was never reached in the run.
struct WavePoint {
    std::int64_t j = 0;
    std::optional<double> d;
    double gamma_j = 0;
    std::optional<double> gamma_next;
};

inline WavePoint wave_point(const engine::Trajectory& tr, const theory::Scales& sc,
                            double t_scaled) {
    const double at = t_scaled * sc.a_N;
    if (t_scaled <= 1.0)
        throw QueryOutOfRange("wave_point: j(t) is defined for t > 1");
    if (at > tr.t_end + 1e-9)
        throw QueryOutOfRange("wave_point: query beyond the simulated horizon");
    WavePoint out;
    out.j = 0;
    out.gamma_j = sc.a_N; // tau_0 = 0 by convention
    for (const auto& rec : tr.taus) {
        const double gamma = rec.tau + sc.a_N;
        if (gamma <= at && rec.j > out.j) {
            out.j = rec.j;
            out.gamma_j = gamma;
        }
    }
    if (const auto* next = tr.tau_for(static_cast<std::int32_t>(out.j + 1))) {
        const double gamma_next = next->tau + sc.a_N;
        out.gamma_next = gamma_next;
        out.d = (at - 0.5 * (out.gamma_j + gamma_next)) / (gamma_next - out.gamma_j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Martingale diagnostics.
//
//   Z_j(t) = e^{-I_j(t)} X_j(t)
//            - integral_0^t mu X_{j-1}(u) e^{-I_j(u)} du - X_j(0),
//   I_j(t) = integral_0^t G*_j(v) dv,   G*_j = N F_j - 1 - mu,
//
// is a mean-zero martingale, and Y_j(t) = e^{-Itilde_j(t)} S_j(t) with
// S_j = X_0 + ... + X_j and Gtilde_j = max_{l<=j}(N F_l - 1 - mu 1{l=j})
// is a supermartingale.  Between events M (hence every F) is constant, so
// both integrals are exact sums of closed-form terms over the inter-event
// intervals.  Exponents are carried in log space with compensated
// summation; the u-integral is accumulated by log-sum-exp.
// ---------------------------------------------------------------------------

namespace detail {

struct LogSumExp {
    double max_log = -std::numeric_limits<double>::infinity();
    double scaled = 0.0; // sum of exp(term - max_log)

    void add(double log_term) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (log_term > max_log) {
            scaled = scaled * std::exp(max_log - log_term) + 1.0;
            max_log = log_term;
        } else {
            scaled += std::exp(log_term - max_log);
        }
    }
    double value() const { return scaled > 0.0 ? std::exp(max_log) * scaled : 0.0; }
};

// (1 - e^{-g*dt}) / g, the integral of e^{-g u} over [0, dt].
inline double exp_integral(double g, double dt) {
    const double x = g * dt;
    if (std::abs(x) < 1e-12) return dt;
    return -std::expm1(-x) / g;
}

} // namespace detail

// Evaluates Z_j(t) and Y_j(t) for a set of types and query times in one
// replay of the event log.
class MartingaleEvaluator {
  public:
    MartingaleEvaluator(const engine::Trajectory& tr, std::vector<std::int64_t> types,
                        std::vector<double> times)
        : tr_(tr), types_(std::move(types)), times_(std::move(times)) {
        if (!tr.has_event_log)
            throw InsufficientResolution(
                "martingale diagnostics need a trajectory recorded with record_events");
        for (double t : times_)
            if (t > tr.t_end + 1e-12)
                throw QueryOutOfRange("martingale query beyond the simulated horizon");
        std::sort(times_.begin(), times_.end());
        evaluate();
    }

    // Z_{types[a]}(times[b]) and Y likewise.
    double Z(std::size_t type_idx, std::size_t time_idx) const {
        return z_[type_idx][time_idx];
    }
    double Y(std::size_t type_idx, std::size_t time_idx) const {
        return y_[type_idx][time_idx];
    }
    const std::vector<double>& times() const { return times_; }

  private:
    struct Accum {
        numeric::KahanSum I;      // integral of G*_j
        numeric::KahanSum Itilde; // integral of Gtilde_j
        detail::LogSumExp source; // integral of mu X_{j-1} e^{-I}
    };

    void evaluate() {
        const ModelParams& p = tr_.params;
        const double n = static_cast<double>(p.N);
        PopulationState st = PopulationState::monomorphic(p.N, 0);
        std::vector<Accum> acc(types_.size());
        z_.assign(types_.size(), std::vector<double>(times_.size(), 0.0));
        y_.assign(types_.size(), std::vector<double>(times_.size(), 0.0));

        std::size_t next_time = 0;
        double now = 0.0;
        const double mu_log = p.mu > 0.0 ? std::log(p.mu) : 0.0;

        auto advance_to = [&](double t_stop) {
            // extends every accumulator across [now, t_stop) where the
            // state (hence every rate) is constant
            const double w_sum = weight_sum(p, st);
            if (w_sum <= 0.0) throw DegeneratePopulation("martingale replay: zero weight sum");
            const double dt = t_stop - now;
            if (dt <= 0.0) return;
            for (std::size_t a = 0; a < types_.size(); ++a) {
                const std::int64_t j = types_[a];
                const double g = n * raw_weight(p, st, j) / w_sum - 1.0 - p.mu;
                const double g_below =
                    j >= 1 ? n * raw_weight(p, st, j - 1) / w_sum - 1.0 : -std::numeric_limits<double>::infinity();
                const double g_tilde = std::max(g, g_below);
                const std::int64_t x_src = j >= 1 ? st.count(j - 1) : 0;
                if (p.mu > 0.0 && x_src > 0) {
                    const double log_term = mu_log + std::log(static_cast<double>(x_src)) -
                                            acc[a].I.sum +
                                            std::log(detail::exp_integral(g, dt));
                    acc[a].source.add(log_term);
                }
                acc[a].I.add(g * dt);
                acc[a].Itilde.add(g_tilde * dt);
            }
            now = t_stop;
        };
        auto record_queries_at = [&](double upto) {
            while (next_time < times_.size() && times_[next_time] <= upto + 1e-15) {
                advance_to(times_[next_time]);
                for (std::size_t a = 0; a < types_.size(); ++a) {
                    const std::int64_t j = types_[a];
                    const std::int64_t xj = st.count(j);
                    const double decayed =
                        xj > 0 ? std::exp(std::log(static_cast<double>(xj)) - acc[a].I.sum) : 0.0;
                    const double x0 = j == 0 ? n : 0.0; // all-type-0 start
                    z_[a][next_time] = decayed - acc[a].source.value() - x0;
                    std::int64_t s_j = 0; // S_j = X_0 + ... + X_j
                    for (std::int64_t l = st.jmin(); l <= std::min(j, st.jmax()); ++l)
                        s_j += st.count(l);
                    y_[a][next_time] =
                        s_j > 0
                            ? std::exp(std::log(static_cast<double>(s_j)) - acc[a].Itilde.sum)
                            : 0.0;
                }
                ++next_time;
            }
        };

        for (const auto& ev : tr_.events) {
            record_queries_at(ev.time);
            advance_to(ev.time);
            if (ev.is_mutation()) st.apply_mutation(ev.parent);
            else if (!ev.is_noop()) st.apply_replacement(ev.dying, ev.parent);
        }
        record_queries_at(std::numeric_limits<double>::infinity());
    }

    const engine::Trajectory& tr_;
    std::vector<std::int64_t> types_;
    std::vector<double> times_;
    std::vector<std::vector<double>> z_, y_;
};

// Single-query conveniences (one replay each).
inline double martingale_Z(const engine::Trajectory& tr, std::int64_t j, double t) {
    return MartingaleEvaluator(tr, {j}, {t}).Z(0, 0);
}
inline double supermartingale_Y(const engine::Trajectory& tr, std::int64_t j, double t) {
    return MartingaleEvaluator(tr, {j}, {t}).Y(0, 0);
}

// CSV emission ---------------------------------------------------------------

inline void write_wave_csv(std::FILE* out, const std::vector<WaveRecord>& rows) {
    std::fputs("time,M,Q,R,jmin,jmax\n", out);
    for (const auto& r : rows)
        std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%lld,%lld\n", r.time, r.mean, r.lead,
                     r.turnover, static_cast<long long>(r.jmin), static_cast<long long>(r.jmax));
}

inline void write_tau_csv(std::FILE* out, const engine::Trajectory& tr,
                          const theory::Scales& sc) {
    std::fputs("j,tau,gamma\n", out);
    for (const auto& rec : tr.taus)
        std::fprintf(out, "%d,%.17g,%.17g\n", rec.j, rec.tau, rec.tau + sc.a_N);
}

} // namespace fitwave::observables
