#pragma once

// Seeded parallel ensembles and the statistical comparisons of simulation
// against the limit theory: sup-norm statistics for the scaled lead and
// mean (Theorems on Q/k_N and M/k_N), the Gaussian-wave curvature fit, the
// establishment-time spacing bounds, the martingale suite, and the
// faithful-vs-effective engine equivalence test.
//
// Replicates are embarrassingly parallel: each one draws its stream from
// seed_for_replicate(master, index) and results are folded in index order,
// so a report is a pure function of (config, master seed) regardless of
// worker count or completion order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fitwave/engine.hpp"
#include "fitwave/errors.hpp"
#include "fitwave/model.hpp"
#include "fitwave/observables.hpp"
#include "fitwave/renewal.hpp"
#include "fitwave/rng.hpp"
#include "fitwave/stats.hpp"
#include "fitwave/theory.hpp"

namespace fitwave::ensemble {

struct ExperimentConfig {
    ModelParams params{};
    int replicates = 1;
    std::uint64_t master_seed = 20260501;
    double t_mult = 3.0;     // horizon in units of a_N
    double t_end_abs = 0.0;  // absolute horizon override (used when > 0)
    int resolution = 64;     // snapshot grid intervals
    engine::EngineKind engine_kind = engine::EngineKind::effective;
    int workers = 0;         // 0 = hardware concurrency
    bool record_events = false;

    std::vector<std::string> verify_targets;
    std::vector<double> trend_N; // population sizes for the trend targets

    // Probe times (units of a_N) for the sup-norm comparisons; kept away
    // from the t = 1 discontinuity.
    std::vector<double> probes = {0.5, 1.2, 1.6, 2.0, 2.5, 3.0};
    double theorem3_t = 2.5;
    int theorem3_ell_max = 2;
    std::int64_t theorem3_min_count = 10;

    void validate() const {
        params.validate();
        if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
        if (!(t_mult > 0.0)) throw ConfigError("config: t_mult must be > 0");
        if (resolution < 2) throw ConfigError("config: resolution must be >= 2");
        if (workers < 0) throw ConfigError("config: workers must be >= 0");
        for (double t : probes)
            if (std::abs(t - 1.0) < 0.1)
                throw ConfigError("config: probes must avoid t = 1 by at least 0.1");
    }

    double horizon(const theory::Scales& sc) const {
        return t_end_abs > 0.0 ? t_end_abs : t_mult * sc.a_N;
    }
};

// Per-replicate summary kept for the report and the comparisons.
struct ReplicateSummary {
    int index = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;
    bool clamping = false;
    bool tau_monotone = true; // soft diagnostic: tau_j nondecreasing in j
    std::uint64_t n_events = 0, n_mutations = 0, n_replacements = 0, n_self = 0;

    std::vector<double> probe_lead; // Q(a_N t) at each config probe
    std::vector<double> probe_mean; // M(a_N t) at each config probe
    std::vector<engine::TauRecord> taus;
    engine::Snapshot shape_snapshot; // state at a_N * theorem3_t (if within horizon)
    bool has_shape_snapshot = false;
};

struct EnsembleResult {
    ExperimentConfig config;
    theory::Scales scales;
    double t_end = 0;
    std::vector<ReplicateSummary> replicates;

    std::size_t usable() const {
        std::size_t n = 0;
        for (const auto& r : replicates) n += !r.degenerate;
        return n;
    }
};

namespace detail {

inline ReplicateSummary summarize(const engine::Trajectory& tr, const ExperimentConfig& cfg,
                                  const theory::Scales& sc, int index,
                                  const std::vector<std::size_t>& probe_idx,
                                  std::optional<std::size_t> shape_idx) {
    ReplicateSummary rs;
    rs.index = index;
    rs.seed = tr.seed;
    rs.degenerate = tr.degenerate;
    rs.clamping = tr.clamping_occurred;
    rs.n_events = tr.n_events;
    rs.n_mutations = tr.n_mutations;
    rs.n_replacements = tr.n_replacements;
    rs.n_self = tr.n_self_replacements;
    rs.taus = tr.taus;
    for (auto& rec : rs.taus) rec.gamma = rec.tau + sc.a_N;
    std::sort(rs.taus.begin(), rs.taus.end(),
              [](const auto& a, const auto& b) { return a.j < b.j; });
    for (std::size_t i = 1; i < rs.taus.size(); ++i)
        if (rs.taus[i].tau < rs.taus[i - 1].tau) rs.tau_monotone = false;
    if (!tr.degenerate) {
        for (std::size_t i : probe_idx) {
            rs.probe_lead.push_back(tr.snapshots[i].lead());
            rs.probe_mean.push_back(tr.snapshots[i].mean_mutations());
        }
        if (shape_idx) {
            rs.shape_snapshot = tr.snapshots[*shape_idx];
            rs.has_shape_snapshot = true;
        }
    }
    return rs;
}

} // namespace detail

// Builds the snapshot schedule shared by all replicates: a uniform grid of
// `resolution` intervals plus the probe times and the wave-shape time.
// Returns the schedule and the snapshot indices of the probes.
struct PreparedSchedule {
    engine::RunSchedule schedule;
    std::vector<std::size_t> probe_idx;
    std::optional<std::size_t> shape_idx;
};

inline PreparedSchedule prepare_schedule(const ExperimentConfig& cfg,
                                         const theory::Scales& sc) {
    const double t_end = cfg.horizon(sc);
    std::vector<double> times;
    for (int i = 0; i <= cfg.resolution; ++i)
        times.push_back(t_end * static_cast<double>(i) / static_cast<double>(cfg.resolution));
    for (double t : cfg.probes)
        if (t * sc.a_N <= t_end) times.push_back(t * sc.a_N);
    const double shape_time = cfg.theorem3_t * sc.a_N;
    if (shape_time <= t_end) times.push_back(shape_time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    PreparedSchedule prep;
    prep.schedule.t_end = t_end;
    prep.schedule.snapshot_times = times;
    prep.schedule.record_events = cfg.record_events;
    for (double t : cfg.probes) {
        const double at = t * sc.a_N;
        if (at > t_end) continue;
        const auto it = std::lower_bound(times.begin(), times.end(), at);
        prep.probe_idx.push_back(static_cast<std::size_t>(it - times.begin()));
    }
    if (shape_time <= t_end) {
        const auto it = std::lower_bound(times.begin(), times.end(), shape_time);
        prep.shape_idx = static_cast<std::size_t>(it - times.begin());
    }
    return prep;
}

// Runs the configured number of replicates across worker threads.  Partial
// failures (DegeneratePopulation) are recorded per replicate, not fatal.
inline EnsembleResult run_ensemble(const ExperimentConfig& cfg) {
    cfg.validate();
    const theory::Scales sc = theory::scales(cfg.params);
    const PreparedSchedule prep = prepare_schedule(cfg, sc);

    EnsembleResult res;
    res.config = cfg;
    res.scales = sc;
    res.t_end = prep.schedule.t_end;
    res.replicates.resize(static_cast<std::size_t>(cfg.replicates));

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_workers = std::min<unsigned>(
        cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : hw,
        static_cast<unsigned>(cfg.replicates));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= cfg.replicates) return;
            const std::uint64_t seed =
                rng::seed_for_replicate(cfg.master_seed, static_cast<std::uint64_t>(idx));
            const engine::Trajectory tr =
                engine::run(cfg.params, prep.schedule, seed, cfg.engine_kind);
            res.replicates[static_cast<std::size_t>(idx)] =
                detail::summarize(tr, cfg, sc, idx, prep.probe_idx, prep.shape_idx);
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Comparisons against theory.
// ---------------------------------------------------------------------------

struct SupNormStat {
    std::vector<double> per_replicate; // sup over probes, one entry per usable replicate
    double median = 0, q25 = 0, q75 = 0;
    std::size_t n = 0;

    void finalize() {
        n = per_replicate.size();
        if (n == 0) return;
        median = stats::median(per_replicate);
        q25 = stats::quantile(per_replicate, 0.25);
        q75 = stats::quantile(per_replicate, 0.75);
    }
    double iqr() const { return q75 - q25; }
};

namespace detail {

template <class PerProbeValue>
SupNormStat sup_norm_stat(const EnsembleResult& res, const std::vector<double>& probe_set,
                          PerProbeValue&& value) {
    // map requested probes onto the config's probe list
    std::vector<std::size_t> sel;
    for (double t : probe_set) {
        const auto& probes = res.config.probes;
        bool found = false;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (std::abs(probes[i] - t) < 1e-12) {
                sel.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) throw InvalidParams("sup_norm_stat: probe not in the ensemble's probe set");
    }
    SupNormStat out;
    for (const auto& rep : res.replicates) {
        if (rep.degenerate || rep.probe_lead.empty()) continue;
        double sup = 0;
        for (std::size_t i : sel) sup = std::max(sup, value(rep, i));
        out.per_replicate.push_back(sup);
    }
    out.finalize();
    return out;
}

} // namespace detail

// sup_{t in S} |Q(a_N t)/k_N - q(t)|, per replicate; median and IQR across
// the ensemble.  k_N may be overridden for degenerate diagnostics.
inline SupNormStat compare_theorem1(const EnsembleResult& res,
                                    const renewal::TheoryCurves& curves,
                                    const std::vector<double>& probe_set,
                                    double k_N_override = 0.0) {
    const double k_n = k_N_override > 0.0 ? k_N_override : res.scales.k_N;
    return detail::sup_norm_stat(res, probe_set, [&](const ReplicateSummary& rep, std::size_t i) {
        const double t = res.config.probes[i];
        return std::abs(rep.probe_lead[i] / k_n - curves.q_at(t));
    });
}

// sup_{t in S} |M(a_N t)/k_N - m(t)|.
inline SupNormStat compare_theorem2(const EnsembleResult& res,
                                    const renewal::TheoryCurves& curves,
                                    const std::vector<double>& probe_set,
                                    double k_N_override = 0.0) {
    const double k_n = k_N_override > 0.0 ? k_N_override : res.scales.k_N;
    return detail::sup_norm_stat(res, probe_set, [&](const ReplicateSummary& rep, std::size_t i) {
        const double t = res.config.probes[i];
        return std::abs(rep.probe_mean[i] / k_n - curves.m_at(t));
    });
}

// Gaussian-wave shape check at a_N * t: weighted least-squares fit of
// ln X_{j(t)+ell} against (ell, ell^2) and comparison of the fitted
// curvature with -ln(s/mu)^2 / (2 q(t-1) ln N).
struct ShapeFitStat {
    double t = 0;
    double predicted_curvature = 0;
    std::vector<double> fitted_curvature;   // per usable replicate
    std::vector<double> fitted_linear;
    std::vector<double> predicted_linear;   // needs d(t); NaN when absent
    std::vector<double> ell_values;         // the ell grid of the residual medians
    std::vector<double> residual_median;    // median over replicates per ell
    std::size_t n_fitted = 0, n_too_few = 0;

    double fraction_negative() const {
        if (fitted_curvature.empty()) return std::numeric_limits<double>::quiet_NaN();
        double neg = 0;
        for (double c : fitted_curvature) neg += c < 0.0;
        return neg / static_cast<double>(fitted_curvature.size());
    }
    double median_curvature() const { return stats::median(fitted_curvature); }
};

inline ShapeFitStat compare_theorem3(const EnsembleResult& res,
                                     const renewal::TheoryCurves& curves) {
    const ExperimentConfig& cfg = res.config;
    const double t = cfg.theorem3_t;
    if (t <= 1.0) throw InvalidParams("compare_theorem3: t must be > 1");
    ShapeFitStat out;
    out.t = t;
    const double ln_sm = std::log(cfg.params.s / cfg.params.mu);
    const double ln_n = std::log(static_cast<double>(cfg.params.N));
    const double q_tm1 = curves.q_at(t - 1.0);
    out.predicted_curvature = -ln_sm * ln_sm / (2.0 * q_tm1 * ln_n);

    const int ell_max = cfg.theorem3_ell_max;
    std::vector<std::vector<double>> residuals(static_cast<std::size_t>(2 * ell_max + 1));
    for (const auto& rep : res.replicates) {
        if (rep.degenerate || !rep.has_shape_snapshot) continue;
        engine::Trajectory probe_view; // reuse wave_point on a thin wrapper
        probe_view.taus = rep.taus;
        probe_view.t_end = res.t_end;
        const observables::WavePoint wp = observables::wave_point(probe_view, res.scales, t);
        const std::int64_t j_t = wp.j;
        const std::int64_t x_center = rep.shape_snapshot.count(j_t);
        std::vector<double> xs, ys, ws;
        for (int ell = -ell_max; ell <= ell_max; ++ell) {
            const std::int64_t x = rep.shape_snapshot.count(j_t + ell);
            if (x < cfg.theorem3_min_count) continue;
            xs.push_back(static_cast<double>(ell));
            ys.push_back(std::log(static_cast<double>(x)));
            ws.push_back(static_cast<double>(x));
        }
        if (xs.size() < 3) {
            ++out.n_too_few;
            continue;
        }
        const stats::QuadraticFit fit = stats::wls_quadratic(xs, ys, ws);
        out.fitted_curvature.push_back(fit.c2);
        out.fitted_linear.push_back(fit.c1);
        out.predicted_linear.push_back(
            wp.d ? ln_sm * ln_sm * (*wp.d) / (q_tm1 * ln_n)
                 : std::numeric_limits<double>::quiet_NaN());
        ++out.n_fitted;
        if (x_center >= cfg.theorem3_min_count) {
            for (int ell = -ell_max; ell <= ell_max; ++ell) {
                const std::int64_t x = rep.shape_snapshot.count(j_t + ell);
                if (x < cfg.theorem3_min_count) continue;
                const double observed = std::log(static_cast<double>(x) /
                                                 static_cast<double>(x_center));
                const double predicted =
                    theory::gauss_log_ratio(ell, wp.d.value_or(0.0), q_tm1, cfg.params);
                residuals[static_cast<std::size_t>(ell + ell_max)].push_back(observed -
                                                                             predicted);
            }
        }
    }
    for (int ell = -ell_max; ell <= ell_max; ++ell) {
        auto& rs = residuals[static_cast<std::size_t>(ell + ell_max)];
        if (rs.empty()) continue;
        out.ell_values.push_back(static_cast<double>(ell));
        out.residual_median.push_back(stats::median(rs));
    }
    return out;
}

// Establishment-time spacings: the fraction of gaps tau_{j+1} - tau_j
// (j >= k*+1) inside [a_N/3k_N, 2a_N/k_N], and the regression of the gap
// against the heuristic a_N/Q(tau_j).
struct SpacingStat {
    std::size_t n_gaps = 0;
    double fraction_in_bounds = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    double lower = 0, upper = 0;
    stats::LineFit heuristic_fit; // gap ~ a_N / Q(tau_j)
};

inline SpacingStat compare_spacings(const EnsembleResult& res) {
    const theory::Scales& sc = res.scales;
    SpacingStat out;
    out.lower = sc.a_N / (3.0 * sc.k_N);
    out.upper = 2.0 * sc.a_N / sc.k_N;
    std::vector<double> xs, ys;
    std::size_t in_bounds = 0;
    for (const auto& rep : res.replicates) {
        if (rep.degenerate) continue;
        for (std::size_t i = 0; i + 1 < rep.taus.size(); ++i) {
            const auto& a = rep.taus[i];
            const auto& b = rep.taus[i + 1];
            if (b.j != a.j + 1 || a.j < sc.k_star + 1) continue;
            const double gap = b.tau - a.tau;
            ++out.n_gaps;
            in_bounds += gap >= out.lower && gap <= out.upper;
            if (a.lead_at > 0) {
                xs.push_back(sc.a_N / a.lead_at);
                ys.push_back(gap);
            }
        }
    }
    if (out.n_gaps > 0) {
        out.fraction_in_bounds =
            static_cast<double>(in_bounds) / static_cast<double>(out.n_gaps);
        out.se = stats::binomial_se(out.fraction_in_bounds, out.n_gaps);
    }
    out.heuristic_fit = stats::ols_line(xs, ys);
    return out;
}

// ---------------------------------------------------------------------------
// Martingale suite and engine equivalence.
// ---------------------------------------------------------------------------

struct MartingaleReport {
    std::vector<std::int64_t> types;
    std::vector<double> times;
    // indexed [type][time]
    std::vector<std::vector<stats::MeanSE>> z;
    std::vector<stats::MeanSE> y1; // Y_1(t) per time
    double y1_start = 0;           // Y_1(0) = N
    std::size_t replicates = 0;

    bool pass(double n_se = 3.0) const {
        for (const auto& row : z)
            for (const auto& cell : row)
                if (std::abs(cell.mean) > n_se * cell.se) return false;
        for (const auto& cell : y1)
            if (cell.mean > y1_start + n_se * cell.se) return false;
        return true;
    }
};

inline MartingaleReport verify_martingale(const ExperimentConfig& cfg,
                                          std::vector<std::int64_t> types = {0, 1, 2},
                                          std::vector<double> times = {1.0, 5.0, 10.0}) {
    ExperimentConfig local = cfg;
    local.validate();
    MartingaleReport rep;
    rep.types = types;
    rep.times = times;
    rep.replicates = static_cast<std::size_t>(local.replicates);
    rep.y1_start = static_cast<double>(local.params.N);

    const double t_end = local.t_end_abs > 0.0
                             ? local.t_end_abs
                             : *std::max_element(times.begin(), times.end());
    engine::RunSchedule sched;
    sched.t_end = t_end;
    sched.record_events = true;

    // Y is taken at type 1; share one replay per replicate with the Z set.
    std::vector<std::int64_t> eval_types = types;
    std::size_t y_pos = eval_types.size();
    for (std::size_t a = 0; a < eval_types.size(); ++a)
        if (eval_types[a] == 1) y_pos = a;
    if (y_pos == eval_types.size()) eval_types.push_back(1);

    const std::size_t nt = types.size(), nq = times.size();
    const auto n_rep = static_cast<std::size_t>(local.replicates);
    // per-replicate slots, folded in index order after the join so the
    // result is independent of worker count and completion order
    std::vector<std::uint8_t> ok(n_rep, 0);
    std::vector<std::vector<std::vector<double>>> z_by_rep(
        n_rep, std::vector<std::vector<double>>(nt, std::vector<double>(nq, 0.0)));
    std::vector<std::vector<double>> y_by_rep(n_rep, std::vector<double>(nq, 0.0));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= local.replicates) break;
            const auto slot = static_cast<std::size_t>(idx);
            const std::uint64_t seed =
                rng::seed_for_replicate(local.master_seed, static_cast<std::uint64_t>(idx));
            const engine::Trajectory tr =
                engine::run(local.params, sched, seed, local.engine_kind);
            if (tr.degenerate) continue;
            observables::MartingaleEvaluator eval(tr, eval_types, times);
            for (std::size_t a = 0; a < nt; ++a)
                for (std::size_t b = 0; b < nq; ++b) z_by_rep[slot][a][b] = eval.Z(a, b);
            for (std::size_t b = 0; b < nq; ++b) y_by_rep[slot][b] = eval.Y(y_pos, b);
            ok[slot] = 1;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_workers = std::min<unsigned>(
        local.workers > 0 ? static_cast<unsigned>(local.workers) : hw,
        static_cast<unsigned>(local.replicates));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    rep.z.assign(nt, std::vector<stats::MeanSE>(nq));
    for (std::size_t a = 0; a < nt; ++a) {
        for (std::size_t b = 0; b < nq; ++b) {
            std::vector<double> samples;
            samples.reserve(n_rep);
            for (std::size_t r = 0; r < n_rep; ++r)
                if (ok[r]) samples.push_back(z_by_rep[r][a][b]);
            rep.z[a][b] = stats::mean_se(samples);
        }
    }
    rep.y1.resize(nq);
    for (std::size_t b = 0; b < nq; ++b) {
        std::vector<double> samples;
        samples.reserve(n_rep);
        for (std::size_t r = 0; r < n_rep; ++r)
            if (ok[r]) samples.push_back(y_by_rep[r][b]);
        rep.y1[b] = stats::mean_se(samples);
    }
    return rep;
}

struct EngineEquivalenceReport {
    stats::ChiSquareResult chi;
    std::size_t replicates_per_engine = 0;
    bool pass(double alpha = 0.001) const { return chi.p_value > alpha; }
};

// Runs the same ensemble under both samplers and tests the joint law of
// (X_0 decile, j_max) at the horizon for homogeneity.
inline EngineEquivalenceReport verify_engines(const ExperimentConfig& cfg) {
    ExperimentConfig local = cfg;
    local.validate();
    const double t_end = local.t_end_abs;
    if (!(t_end > 0.0))
        throw ConfigError("verify engines: set an absolute horizon (run.t_end)");

    engine::RunSchedule sched;
    sched.t_end = t_end;
    sched.snapshot_times = {t_end};
    sched.threshold_watch = false;

    const int n = local.replicates;
    std::vector<double> x0_a(static_cast<std::size_t>(n)), x0_b(static_cast<std::size_t>(n));
    std::vector<std::int64_t> jm_a(static_cast<std::size_t>(n)), jm_b(static_cast<std::size_t>(n));

    auto run_side = [&](engine::EngineKind kind, std::uint64_t seed_salt,
                        std::vector<double>& x0, std::vector<std::int64_t>& jm) {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int idx = next.fetch_add(1);
                if (idx >= n) return;
                const std::uint64_t seed = rng::seed_for_replicate(
                    local.master_seed + seed_salt, static_cast<std::uint64_t>(idx));
                const engine::Trajectory tr = engine::run(local.params, sched, seed, kind);
                const auto& snap = tr.snapshots.back();
                x0[static_cast<std::size_t>(idx)] = static_cast<double>(snap.count(0));
                jm[static_cast<std::size_t>(idx)] = snap.jmax;
            }
        };
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const unsigned n_workers =
            std::min<unsigned>(local.workers > 0 ? static_cast<unsigned>(local.workers) : hw,
                               static_cast<unsigned>(n));
        if (n_workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
    };
    run_side(engine::EngineKind::faithful, 0x0f, x0_a, jm_a);
    run_side(engine::EngineKind::effective, 0xef, x0_b, jm_b);

    // joint histogram over (X_0 decile, j_max)
    std::vector<double> pooled_x0 = x0_a;
    pooled_x0.insert(pooled_x0.end(), x0_b.begin(), x0_b.end());
    const std::vector<double> edges = stats::quantile_edges(pooled_x0, 10);
    std::int64_t jmax_hi = 0;
    for (auto v : jm_a) jmax_hi = std::max(jmax_hi, v);
    for (auto v : jm_b) jmax_hi = std::max(jmax_hi, v);
    const std::size_t n_x0 = edges.size() + 1;
    const auto n_jm = static_cast<std::size_t>(jmax_hi + 1);
    std::vector<double> hist_a(n_x0 * n_jm, 0.0), hist_b(n_x0 * n_jm, 0.0);
    for (int i = 0; i < n; ++i) {
        hist_a[stats::bin_of(edges, x0_a[static_cast<std::size_t>(i)]) * n_jm +
               static_cast<std::size_t>(jm_a[static_cast<std::size_t>(i)])] += 1.0;
        hist_b[stats::bin_of(edges, x0_b[static_cast<std::size_t>(i)]) * n_jm +
               static_cast<std::size_t>(jm_b[static_cast<std::size_t>(i)])] += 1.0;
    }
    EngineEquivalenceReport out;
    out.replicates_per_engine = static_cast<std::size_t>(n);
    out.chi = stats::chi_square_homogeneity(hist_a, hist_b);
    return out;
}

} // namespace fitwave::ensemble
