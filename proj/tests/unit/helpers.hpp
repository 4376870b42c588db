#pragma once

#include "switchsynth/io.hpp"
#include "switchsynth/model.hpp"

#include <Eigen/Dense>
#include <random>

namespace testing_helpers {

using switchsynth::Matrix;
using switchsynth::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            m(i, j) = n(rng);
    return m;
}

inline Matrix random_spd(std::mt19937_64& rng, int n) {
    const Matrix a = random_matrix(rng, n, n);
    return a * a.transpose() + Matrix::Identity(n, n);
}

inline switchsynth::SwitchedPlant random_plant(std::mt19937_64& rng, int n_x, int n_u, int n_w, int modes = 2) {
    std::vector<switchsynth::PlantMode> ms;
    for (int i = 0; i < modes; ++i)
        ms.push_back({random_matrix(rng, n_x, n_x), random_matrix(rng, n_x, n_u), random_matrix(rng, n_u, n_x),
                      random_matrix(rng, n_x, n_w), random_matrix(rng, n_u, n_w)});
    return switchsynth::SwitchedPlant(std::move(ms));
}

// Hurwitz plant modes with small couplings; the stability LMIs are feasible for these.
inline switchsynth::SwitchedPlant random_stable_plant(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<switchsynth::PlantMode> ms;
    for (int i = 0; i < 2; ++i) {
        Matrix A(2, 2);
        A << -1.0 - std::abs(u(rng)), u(rng), u(rng), -1.5 - std::abs(u(rng));
        Matrix B(2, 1), C(1, 2), D(2, 1), E(1, 1);
        B << 0.5 + u(rng), u(rng);
        C << 0.5 + u(rng), u(rng);
        D << 0.1 * u(rng), 0.1 * u(rng);
        E << 0.1 * u(rng);
        ms.push_back({A, B, C, D, E});
    }
    return switchsynth::SwitchedPlant(std::move(ms));
}

inline switchsynth::ProblemConfig demo_config() {
    return switchsynth::parse_config(switchsynth::read_text_file(SWITCHSYNTH_TEST_DATA "/demo.json"));
}

} // namespace testing_helpers
