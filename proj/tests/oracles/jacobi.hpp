#pragma once

// Cyclic Jacobi rotations for symmetric eigenvalues. Slow, simple, and
// unrelated to the Eigen solvers the library uses.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a[p][q] * a[p][q];
        if (off < 1e-30)
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300)
                    continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t k = 0; k < n; ++k)
        ev[k] = a[k][k];
    std::sort(ev.begin(), ev.end());
    return ev;
}

template <typename M>
std::vector<double> jacobi_eigenvalues_of(const M& m) {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(m.rows()), std::vector<double>(m.cols()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            a[r][c] = 0.5 * (m(r, c) + m(c, r));
    return jacobi_eigenvalues(std::move(a));
}

template <typename M>
double jacobi_max(const M& m) {
    return jacobi_eigenvalues_of(m).back();
}

} // namespace oracle
