#pragma once

// Exact continuous-time event simulation of the model, with two sampling
// schemes that generate the same law on state paths:
//
//   faithful  — every death/birth is an event.  Total rate N(1+mu) in every
//               state; a death replaces an individual of type i with a
//               child of a type j parent, and i == j is emitted as a no-op.
//   effective — only state-changing events are sampled.  Mutations keep
//               their total rate mu*N; replacements are thinned by the
//               self-replacement mass and the (dying, parent) pair is drawn
//               from the joint law conditioned on dying != parent.
//
// With one type carrying most of the population the faithful scheme spends
// most events on no-ops, so the effective scheme is the default and the
// faithful one is retained as the distributional reference.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fitwave/errors.hpp"
#include "fitwave/model.hpp"
#include "fitwave/rng.hpp"

namespace fitwave::engine {

enum class EngineKind { faithful, effective };

inline const char* to_string(EngineKind k) {
    return k == EngineKind::faithful ? "faithful" : "effective";
}

// One sampled event.  dying < 0 marks a mutation of a type `parent`
// individual (parent -> parent+1); otherwise a type `dying` individual is
// replaced by a child of a type `parent` individual.
struct Event {
    double time = 0.0;
    std::int32_t parent = 0;
    std::int32_t dying = -1;

    bool is_mutation() const { return dying < 0; }
    bool is_noop() const { return dying >= 0 && dying == parent; }
};

namespace detail {

// sum over occupied types of X_i^2 w_i, plus the weight sum when clamped.
struct BandSums {
    double W = 0;        // sum X_i w_i
    double self_sq = 0;  // sum X_i^2 w_i
};

inline BandSums band_sums(const ModelParams& p, const PopulationState& st) {
    BandSums out;
    const std::int64_t* c = st.band();
    const std::int64_t width = st.band_width();
    double w = raw_weight(p, st, st.jmin());
    if (!st.min_type_clamped(p.s)) {
        // Unclamped: W = N exactly; only the quadratic sum is needed.
        out.W = static_cast<double>(st.population_size());
        for (std::int64_t k = 0; k < width; ++k, w += p.s) {
            const double x = static_cast<double>(c[k]);
            out.self_sq += x * x * w;
        }
        return out;
    }
    for (std::int64_t k = 0; k < width; ++k, w += p.s) {
        if (w <= 0.0) continue;
        const double x = static_cast<double>(c[k]);
        out.W += x * w;
        out.self_sq += x * x * w;
    }
    if (out.W <= 0.0)
        throw DegeneratePopulation("every occupied type has zero fitness");
    return out;
}

// Categorical draw over the occupied band with weight X_i * (a + b*w_i),
// w affine in the type index.  target must be in [0, total).
inline std::int64_t pick_affine(const ModelParams& p, const PopulationState& st, double a,
                                double b, double target, std::int64_t skip = -1) {
    const std::int64_t* c = st.band();
    const std::int64_t width = st.band_width();
    const std::int64_t jmin = st.jmin();
    double w = raw_weight(p, st, jmin);
    std::int64_t last = jmin;
    double acc = 0.0;
    for (std::int64_t k = 0; k < width; ++k, w += p.s) {
        const std::int64_t j = jmin + k;
        if (j == skip || c[k] == 0) continue;
        const double wt = static_cast<double>(c[k]) * (a + b * std::max(w, 0.0));
        if (wt <= 0.0) continue;
        acc += wt;
        last = j;
        if (acc > target) return j;
    }
    return last; // floating-point shortfall at the top end
}

} // namespace detail

// Rate of faithful events that would not change the state: N * sum_i
// (X_i/N)(X_i F_i), the mass of deaths whose replacement has the dying type.
inline double self_replacement_rate(const ModelParams& p, const PopulationState& st) {
    const auto sums = detail::band_sums(p, st);
    return sums.self_sq / sums.W;
}

// Total event rate of the effective scheme: mu*N + N*(1 - c) with c the
// self-replacement fraction.  Zero for a monomorphic population with mu = 0.
inline double effective_event_rate(const ModelParams& p, const PopulationState& st) {
    const double n = static_cast<double>(st.population_size());
    return p.mu * n + (n - self_replacement_rate(p, st));
}

// Faithful sampler.  dt ~ Exponential(N(1+mu)); the event is a death with
// probability 1/(1+mu) (dying type ~ X_i, parent type ~ X_j F_j,
// independently), otherwise a mutation (type ~ X_j).
inline Event next_event_faithful(const ModelParams& p, const PopulationState& st,
                                 rng::Xoshiro256& gen, double& dt) {
    const double n = static_cast<double>(st.population_size());
    const double rate = n * (1.0 + p.mu);
    dt = gen.exponential(rate);

    Event ev;
    if (gen.uniform01() * (1.0 + p.mu) >= 1.0) {
        // mutation: pick the mutating type proportional to counts
        ev.parent = static_cast<std::int32_t>(
            detail::pick_affine(p, st, 1.0, 0.0, gen.uniform01() * n));
        ev.dying = -1;
        return ev;
    }
    const auto sums = detail::band_sums(p, st);
    ev.dying = static_cast<std::int32_t>(
        detail::pick_affine(p, st, 1.0, 0.0, gen.uniform01() * n));
    ev.parent = static_cast<std::int32_t>(
        detail::pick_affine(p, st, 0.0, 1.0, gen.uniform01() * sums.W));
    return ev;
}

// Effective sampler.  Emits only state-changing events; the marginal law
// of the state path is identical to the faithful scheme.  dt is infinite
// when the total effective rate is zero (monomorphic, mu = 0).
inline Event next_event_effective(const ModelParams& p, const PopulationState& st,
                                  rng::Xoshiro256& gen, double& dt) {
    const double n = static_cast<double>(st.population_size());
    const auto sums = detail::band_sums(p, st);
    const double rate_mut = p.mu * n;
    const double rate_rep = n - sums.self_sq / sums.W;
    const double total = rate_mut + rate_rep;
    if (total <= 0.0) {
        dt = std::numeric_limits<double>::infinity();
        return Event{};
    }
    dt = gen.exponential(total);

    Event ev;
    if (gen.uniform01() * total < rate_mut) {
        ev.parent = static_cast<std::int32_t>(
            detail::pick_affine(p, st, 1.0, 0.0, gen.uniform01() * n));
        ev.dying = -1;
        return ev;
    }
    // dying type i with weight X_i (W - X_i w_i) / W, i.e. a death whose
    // replacement is some other type; then parent j ~ X_j w_j over j != i.
    const std::int64_t* c = st.band();
    const std::int64_t width = st.band_width();
    const std::int64_t jmin = st.jmin();
    {
        const double target = gen.uniform01() * (n * sums.W - sums.self_sq);
        double w = raw_weight(p, st, jmin);
        double acc = 0.0;
        std::int64_t last = jmin;
        for (std::int64_t k = 0; k < width; ++k, w += p.s) {
            if (c[k] == 0) continue;
            const double x = static_cast<double>(c[k]);
            const double wt = x * (sums.W - x * std::max(w, 0.0));
            if (wt <= 0.0) continue;
            acc += wt;
            last = jmin + k;
            if (acc > target) break;
        }
        ev.dying = static_cast<std::int32_t>(last);
    }
    {
        const double wd = raw_weight(p, st, ev.dying);
        const double rest = sums.W - static_cast<double>(st.count(ev.dying)) * wd;
        ev.parent = static_cast<std::int32_t>(
            detail::pick_affine(p, st, 0.0, 1.0, gen.uniform01() * rest, ev.dying));
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Trajectories.
// ---------------------------------------------------------------------------

struct RunSchedule {
    double t_end = 0.0;                 // absolute horizon
    std::vector<double> snapshot_times; // sorted ascending, within [0, t_end]
    bool threshold_watch = true;        // record establishment times tau_j
    bool record_events = false;         // dense event log (martingale diagnostics)

    void validate() const {
        if (!(t_end >= 0.0)) throw InvalidParams("RunSchedule: t_end must be >= 0");
        double prev = -1.0;
        for (double t : snapshot_times) {
            if (t < prev || t < 0.0 || t > t_end)
                throw InvalidParams("RunSchedule: snapshot times must be sorted within [0, t_end]");
            prev = t;
        }
    }

    // Uniform grid with `resolution` intervals over [0, t_end].
    static RunSchedule uniform(double t_end, int resolution) {
        RunSchedule sched;
        sched.t_end = t_end;
        sched.snapshot_times.reserve(static_cast<std::size_t>(resolution) + 1);
        for (int i = 0; i <= resolution; ++i)
            sched.snapshot_times.push_back(t_end * static_cast<double>(i) /
                                           static_cast<double>(resolution));
        return sched;
    }
};

// State summary at a scheduled time: the state as of the last event at or
// before the snapshot time (the process is a jump process; snapshots are
// read off the cadlag path).
struct Snapshot {
    double time = 0.0;
    std::int64_t jmin = 0, jmax = 0;
    std::int64_t mutation_sum = 0;
    std::int64_t n = 0;
    std::vector<std::int64_t> counts; // counts[k] = X_{jmin+k}

    double mean_mutations() const {
        return static_cast<double>(mutation_sum) / static_cast<double>(n);
    }
    double lead() const { return static_cast<double>(jmax) - mean_mutations(); }
    std::int64_t count(std::int64_t j) const {
        if (j < jmin || j > jmax) return 0;
        return counts[static_cast<std::size_t>(j - jmin)];
    }
};

// tau_j: first time the type j-1 count reaches s/mu.  `lead_at` is the
// wave lead Q at that instant, used by the spacing heuristic.
struct TauRecord {
    std::int32_t j = 0;
    double tau = 0.0;
    double gamma = 0.0; // tau + a_N, filled when scales are known (else NaN)
    double lead_at = 0.0;
};

struct Trajectory {
    ModelParams params;
    EngineKind engine = EngineKind::effective;
    std::uint64_t seed = 0;
    double t_end = 0.0;

    std::vector<Snapshot> snapshots;
    std::vector<TauRecord> taus; // ascending detection time; j >= 1
    std::vector<Event> events;   // dense log, only when schedule.record_events
    bool has_event_log = false;

    std::uint64_t n_events = 0; // events sampled (incl. faithful no-ops)
    std::uint64_t n_mutations = 0;
    std::uint64_t n_replacements = 0;
    std::uint64_t n_self_replacements = 0; // faithful no-ops

    bool degenerate = false; // DegeneratePopulation ended the replicate
    double degenerate_time = std::numeric_limits<double>::quiet_NaN();
    bool clamping_occurred = false; // some occupied type ever had zero fitness

    const TauRecord* tau_for(std::int32_t j) const {
        for (const auto& r : taus)
            if (r.j == j) return &r;
        return nullptr;
    }
};

namespace detail {

inline Snapshot take_snapshot(const PopulationState& st, double at) {
    Snapshot snap;
    snap.time = at;
    snap.jmin = st.jmin();
    snap.jmax = st.jmax();
    snap.mutation_sum = st.mutation_sum();
    snap.n = st.population_size();
    snap.counts.assign(st.band(), st.band() + st.band_width());
    return snap;
}

struct NoHook {
    void operator()(const PopulationState&, const Event&) const {}
};

} // namespace detail

// Runs one replicate from the all-type-0 initial condition.  Identical
// (params, schedule, seed, kind) give a bit-identical trajectory.  The
// hook is invoked after every applied event (test instrumentation).
template <class Hook = detail::NoHook>
Trajectory run(const ModelParams& params, const RunSchedule& schedule, std::uint64_t seed,
               EngineKind kind = EngineKind::effective, Hook&& hook = Hook{}) {
    params.validate();
    schedule.validate();

    Trajectory tr;
    tr.params = params;
    tr.engine = kind;
    tr.seed = seed;
    tr.t_end = schedule.t_end;
    tr.has_event_log = schedule.record_events;

    PopulationState st = PopulationState::monomorphic(params.N, 0);
    rng::Xoshiro256 gen(seed);

    const double threshold =
        params.mu > 0.0 ? params.s / params.mu : std::numeric_limits<double>::infinity();
    std::vector<std::uint8_t> tau_seen; // tau_seen[j] for recorded tau_j
    auto watch_type = [&](std::int64_t type, double now) {
        if (!schedule.threshold_watch) return;
        if (static_cast<double>(st.count(type)) < threshold) return;
        const auto j = static_cast<std::size_t>(type + 1);
        if (tau_seen.size() <= j) tau_seen.resize(j + 1, 0);
        if (tau_seen[j]) return;
        tau_seen[j] = 1;
        tr.taus.push_back(TauRecord{static_cast<std::int32_t>(j), now,
                                    std::numeric_limits<double>::quiet_NaN(), st.lead()});
    };
    for (std::int64_t j = st.jmin(); j <= st.jmax(); ++j) watch_type(j, 0.0);

    std::size_t next_snap = 0;
    auto flush_snapshots_before = [&](double t) {
        while (next_snap < schedule.snapshot_times.size() &&
               schedule.snapshot_times[next_snap] < t) {
            tr.snapshots.push_back(detail::take_snapshot(st, schedule.snapshot_times[next_snap]));
            ++next_snap;
        }
    };

    double kahan_c = 0.0;
    double now = 0.0;
    try {
        for (;;) {
            double dt = 0.0;
            const Event raw = kind == EngineKind::faithful
                                  ? next_event_faithful(params, st, gen, dt)
                                  : next_event_effective(params, st, gen, dt);
            // Compensated time accumulation keeps 1e8-event runs drift-free.
            const double y = dt - kahan_c;
            const double t_next = now + y;
            if (!(t_next <= schedule.t_end)) break;
            kahan_c = (t_next - now) - y;
            flush_snapshots_before(t_next);
            now = t_next;

            Event ev = raw;
            ev.time = now;
            ++tr.n_events;
            if (ev.is_mutation()) {
                st.apply_mutation(ev.parent);
                ++tr.n_mutations;
                watch_type(ev.parent + 1, now);
            } else if (ev.is_noop()) {
                ++tr.n_self_replacements;
            } else {
                st.apply_replacement(ev.dying, ev.parent);
                ++tr.n_replacements;
                watch_type(ev.parent, now);
            }
            st.set_time(now);
            if (!tr.clamping_occurred && st.min_type_clamped(params.s))
                tr.clamping_occurred = true;
            if (schedule.record_events) tr.events.push_back(ev);
            hook(st, ev);
        }
        flush_snapshots_before(std::numeric_limits<double>::infinity());
        st.set_time(schedule.t_end);
    } catch (const DegeneratePopulation&) {
        // Ends the replicate early; snapshots past the failure time are
        // left unrecorded and the flag excludes this run from comparisons.
        tr.degenerate = true;
        tr.degenerate_time = now;
    }
    return tr;
}

} // namespace fitwave::engine
