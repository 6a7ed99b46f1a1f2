#pragma once

// Small numeric helpers shared across modules.

namespace fitwave::numeric {

// Compensated (Kahan) accumulator for long sums.
struct KahanSum {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

} // namespace fitwave::numeric
