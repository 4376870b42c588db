#pragma once

// Definition of average dwell time checked over every window whose ends sit
// at switch instants: switches a..b (inclusive) lie in (t_a - 0, t_b + 0],
// so the window length tends to t_b - t_a.

#include <vector>

namespace oracle {

inline bool adt_holds(const std::vector<double>& times, double tau_a, double N0) {
    const std::size_t M = times.size();
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = a; b < M; ++b) {
            const double count = static_cast<double>(b - a + 1);
            if (count > N0 + (times[b] - times[a]) / tau_a + 1e-12)
                return false;
        }
    return true;
}

} // namespace oracle
