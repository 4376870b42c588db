#pragma once

#include "switchsynth/linalg.hpp"

#include <cstdint>

namespace switchsynth {

// Which theorem's LMI family and scalar condition drive a synthesis.
enum class Theorem { Stability = 1, Bounded = 2, HInf = 3 };

struct SolverOptions {
    int max_iterations = 20000;
    std::uint64_t seed = 0;
    double init_noise = 1e-3;
    int stall_window = 50;
};

struct SynthesisConfig {
    double alpha = 0.4;
    double beta = 0.1;
    double mu = 1.1;
    double eps = 1.0;
    double rho = 1.0;
    double gamma = 1.0;
    double c1 = 1.0;
    double c2 = 1.1;
    double T = 10.0;
    double d = 0.0;
    double tau_d = 0.1;
    double N0 = 1.0;
    double delta = 1e-6;
    Matrix Q;  // plant-level weight; empty means identity
    Theorem theorem = Theorem::Stability;
    bool bisect_gamma = false;
    SolverOptions solver;

    // Throws Error(Config) on out-of-range scalars.
    void validate() const;
};

// L = ln(mu) + (alpha + beta) tau_d, the per-switch growth exponent.
[[nodiscard]] double switching_cost(const SynthesisConfig& cfg);

} // namespace switchsynth
