#pragma once

// Core population model: N individuals, each carrying some number j of
// beneficial mutations ("type j").  Each individual mutates at rate mu
// (j -> j+1) and dies at rate 1; on a death the replacement's parent is
// chosen with probability proportional to fitness
//
//     w_j = max{0, 1 + s*(j - M)},      M = (1/N) * sum_j j*X_j.
//
// The profile is kept as exact 64-bit counts over the occupied band
// [j_min, j_max], and the mutation sum is maintained incrementally with
// overflow-checked integer arithmetic so M never drifts.

#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "fitwave/errors.hpp"

namespace fitwave {

struct ModelParams {
    std::int64_t N = 0; // population size
    double mu = 0.0;    // per-individual mutation rate
    double s = 0.0;     // selection increment per mutation

    // The paper's regime has 0 < mu < s < 1 and N large.  mu == 0 is
    // additionally accepted as a degenerate diagnostic case (no mutations);
    // theory::scales rejects it separately since a_N would be infinite.
    void validate() const {
        if (N < 2) throw InvalidParams("ModelParams: N must be >= 2");
        if (!(s > 0.0 && s < 1.0)) throw InvalidParams("ModelParams: s must be in (0,1)");
        if (!(mu >= 0.0 && mu < s)) throw InvalidParams("ModelParams: need 0 <= mu < s");
    }
};

// Exact value of M = mutation_sum / N.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational reduced() const {
        const std::int64_t g = std::gcd(num, den);
        return g > 1 ? Rational{num / g, den / g} : *this;
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

class PopulationState {
  public:
    PopulationState() = default;

    // All N individuals of a single type.
    static PopulationState monomorphic(std::int64_t n, std::int64_t type = 0) {
        PopulationState st;
        st.n_ = n;
        st.origin_ = type;
        st.counts_.assign(1, n);
        st.jmin_ = st.jmax_ = type;
        st.mutation_sum_ = checked_mul(type, n);
        return st;
    }

    // Arbitrary profile {type -> count}; validates the basic invariants.
    static PopulationState from_profile(const std::map<std::int64_t, std::int64_t>& profile,
                                        double time = 0.0) {
        PopulationState st;
        st.time_ = time;
        bool first = true;
        for (const auto& [j, x] : profile) {
            if (x < 0) throw InvalidParams("from_profile: negative count");
            if (x == 0) continue;
            if (first) {
                st.origin_ = st.jmin_ = j;
                first = false;
            }
            st.jmax_ = j;
            st.n_ += x;
            st.mutation_sum_ = checked_add(st.mutation_sum_, checked_mul(j, x));
        }
        if (first) throw InvalidParams("from_profile: empty profile");
        st.counts_.assign(static_cast<std::size_t>(st.jmax_ - st.origin_ + 1), 0);
        for (const auto& [j, x] : profile)
            if (x > 0) st.counts_[static_cast<std::size_t>(j - st.origin_)] = x;
        return st;
    }

    std::int64_t population_size() const { return n_; }
    std::int64_t mutation_sum() const { return mutation_sum_; }
    std::int64_t jmin() const { return jmin_; }
    std::int64_t jmax() const { return jmax_; }
    std::int64_t band_width() const { return jmax_ - jmin_ + 1; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    std::int64_t count(std::int64_t j) const {
        if (j < jmin_ || j > jmax_) return 0;
        return counts_[static_cast<std::size_t>(j - origin_)];
    }

    // Raw pointer to the count of type `jmin()`; valid for band_width()
    // consecutive entries.  Used by the samplers' hot loops.
    const std::int64_t* band() const {
        return counts_.data() + static_cast<std::size_t>(jmin_ - origin_);
    }

    // Population mean number of mutations.
    double mean_mutations() const {
        return static_cast<double>(mutation_sum_) / static_cast<double>(n_);
    }
    Rational mean_mutations_exact() const { return Rational{mutation_sum_, n_}.reduced(); }

    // Lead of the fittest type over the mean (the nose of the wave).
    double lead() const { return static_cast<double>(jmax_) - mean_mutations(); }

    // One individual of type j acquires its (j+1)st mutation.
    void apply_mutation(std::int64_t j) {
        if (count(j) < 1) throw InvalidEvent("apply_mutation: no individual of that type");
        ensure_slot(j + 1);
        --slot(j);
        ++slot(j + 1);
        mutation_sum_ = checked_add(mutation_sum_, 1);
        if (j + 1 > jmax_) jmax_ = j + 1;
        if (j == jmin_ && slot(j) == 0) advance_jmin();
    }

    // One individual of type `dying` is replaced by a child of a type
    // `parent` individual.  dying == parent is a no-op on the counts.
    void apply_replacement(std::int64_t dying, std::int64_t parent) {
        if (count(dying) < 1) throw InvalidEvent("apply_replacement: dying type empty");
        if (count(parent) < 1) throw InvalidEvent("apply_replacement: parent type empty");
        if (dying == parent) return;
        ++slot(parent);
        --slot(dying);
        mutation_sum_ = checked_add(mutation_sum_, parent - dying);
        if (slot(dying) == 0) {
            if (dying == jmin_) advance_jmin();
            else if (dying == jmax_) retreat_jmax();
        }
    }

    // True when the least-fit occupied type has fitness clamped to zero,
    // i.e. 1 + s*(jmin - M) <= 0.  Only then can the weight sum differ
    // from N.
    bool min_type_clamped(double s) const {
        return 1.0 + s * type_offset(jmin_) <= 0.0;
    }

    // Exact j - M, computed from integers to avoid cancellation: the
    // numerator j*N - mutation_sum is held in 128 bits.
    double type_offset(std::int64_t j) const {
        const __int128 num = static_cast<__int128>(j) * n_ - mutation_sum_;
        return static_cast<double>(num) / static_cast<double>(n_);
    }

    // Recomputes sum of counts over the band (test/diagnostic use).
    std::int64_t recount() const {
        std::int64_t total = 0;
        const std::int64_t* c = band();
        for (std::int64_t k = 0; k < band_width(); ++k) total += c[k];
        return total;
    }
    std::int64_t recount_mutation_sum() const {
        std::int64_t total = 0;
        const std::int64_t* c = band();
        for (std::int64_t k = 0; k < band_width(); ++k)
            total = checked_add(total, checked_mul(jmin_ + k, c[k]));
        return total;
    }

    // Deliberately unvalidated write access for constructing pathological
    // states in tests.
    void debug_set_mutation_sum(std::int64_t v) { mutation_sum_ = v; }

  private:
    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw InvalidEvent("mutation_sum overflow");
        return r;
    }
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw InvalidEvent("mutation_sum overflow");
        return r;
    }

    std::int64_t& slot(std::int64_t j) {
        return counts_[static_cast<std::size_t>(j - origin_)];
    }

    void ensure_slot(std::int64_t j) {
        if (j - origin_ >= static_cast<std::int64_t>(counts_.size())) {
            counts_.resize(static_cast<std::size_t>(j - origin_ + 1), 0);
        }
        // Trim dead space below the band occasionally so storage stays O(band).
        if (jmin_ - origin_ > 512) {
            counts_.erase(counts_.begin(), counts_.begin() + static_cast<std::ptrdiff_t>(jmin_ - origin_));
            origin_ = jmin_;
        }
    }

    void advance_jmin() {
        while (jmin_ < jmax_ && slot(jmin_) == 0) ++jmin_;
    }
    void retreat_jmax() {
        while (jmax_ > jmin_ && slot(jmax_) == 0) --jmax_;
    }

    std::vector<std::int64_t> counts_; // counts_[k] = X_{origin_ + k}
    std::int64_t origin_ = 0;
    std::int64_t jmin_ = 0, jmax_ = 0;
    std::int64_t n_ = 0;
    std::int64_t mutation_sum_ = 0;
    double time_ = 0.0;
};

// ---------------------------------------------------------------------------
// Fitness weights and per-type event rates.
// ---------------------------------------------------------------------------

// w_j = max{0, 1 + s*(j - M)}.  Exactly 1 when j == M.
inline double raw_weight(const ModelParams& p, const PopulationState& st, std::int64_t j) {
    const double w = 1.0 + p.s * st.type_offset(j);
    return w > 0.0 ? w : 0.0;
}

// W = sum_i X_i * w_i.  Equals N exactly whenever no occupied type is
// clamped; recomputed over the band otherwise.
inline double weight_sum(const ModelParams& p, const PopulationState& st) {
    if (!st.min_type_clamped(p.s)) return static_cast<double>(st.population_size());
    double w = raw_weight(p, st, st.jmin());
    double total = 0.0;
    const std::int64_t* c = st.band();
    for (std::int64_t k = 0; k < st.band_width(); ++k, w += p.s)
        if (w > 0.0) total += static_cast<double>(c[k]) * w;
    return total;
}

// F_j = w_j / W: probability that a particular type j individual is the
// parent when a death occurs.
inline double selection_prob(const ModelParams& p, const PopulationState& st, std::int64_t j) {
    const double w = weight_sum(p, st);
    if (w <= 0.0) throw DegeneratePopulation("selection_prob: all occupied types have zero fitness");
    return raw_weight(p, st, j) / w;
}

struct TypeRates {
    double birth;  // B_j = (N - X_j) F_j
    double death;  // D_j = mu + 1 - X_j F_j
    double growth; // G_j = s*(j - M) - mu
};

inline TypeRates per_type_rates(const ModelParams& p, const PopulationState& st, std::int64_t j) {
    const double fj = selection_prob(p, st, j);
    const double xj = static_cast<double>(st.count(j));
    const double n = static_cast<double>(st.population_size());
    return TypeRates{
        (n - xj) * fj,
        p.mu + 1.0 - xj * fj,
        p.s * st.type_offset(j) - p.mu,
    };
}

} // namespace fitwave
