#pragma once

#include "../oracles/scalar_toy.hpp"

#include "switchsynth/lmi.hpp"

#include <cmath>
#include <random>

namespace testing_helpers {

inline switchsynth::Matrix scalar(double x) { return switchsynth::Matrix::Constant(1, 1, x); }

inline switchsynth::TildeMatrices toy_tilde(const oracle::Toy& z) {
    switchsynth::TildeMatrices t;
    t.A = scalar(z.a);
    t.B = scalar(z.b);
    t.C = scalar(z.c);
    t.I = scalar(z.i);
    t.D = scalar(z.d);
    t.E = scalar(z.e);
    t.K_f = scalar(z.k);
    t.C_out = scalar(z.ca);
    t.E_out = scalar(z.eo);
    return t;
}

inline oracle::Toy random_toy(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    oracle::Toy z{};
    z.a = u(rng);
    z.b = u(rng);
    z.c = u(rng);
    z.i = u(rng);
    z.d = u(rng);
    z.e = u(rng);
    z.k = u(rng);
    z.ca = u(rng);
    z.eo = u(rng);
    z.p = u(rng);
    z.pt = u(rng);
    z.r = u(rng);
    z.s = u(rng);
    z.coef = u(rng);
    z.eps = 0.1 + std::abs(u(rng));
    z.rho = 0.1 + std::abs(u(rng));
    z.gamma = 0.1 + std::abs(u(rng));
    return z;
}

} // namespace testing_helpers
