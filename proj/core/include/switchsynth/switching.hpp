#pragma once

#include "switchsynth/config.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace switchsynth {

// Piecewise-constant mode signal on [0, horizon]. modes[k] is active on
// [times[k-1], times[k]) with times[-1] = 0.
struct SwitchingSignal {
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<int> modes;

    [[nodiscard]] int mode_at(double t) const;
    [[nodiscard]] std::size_t switch_count() const noexcept { return times.size(); }
    // Throws Error(InvalidArgument) on broken invariants.
    void validate(int mode_count) const;
};

struct AdtParams {
    double tau_a = 1.0;
    double N0 = 1.0;
};

enum class DelayMode { Constant, Random };

struct Interval {
    double begin = 0.0;
    double end = 0.0;
    int plant_mode = 0;
    int controller_mode = 0;
    [[nodiscard]] bool mismatched() const noexcept { return plant_mode != controller_mode; }
};

struct DelayedSignal {
    SwitchingSignal base;
    std::vector<double> lags;
    double tau_d = 0.0;

    [[nodiscard]] int plant_mode_at(double t) const { return base.mode_at(t); }
    [[nodiscard]] int controller_mode_at(double t) const;
    [[nodiscard]] std::vector<double> controller_switch_times() const;
    // Partition of [0, horizon] into maximal intervals of constant
    // (plant, controller) pair; zero-length pieces are dropped.
    [[nodiscard]] std::vector<Interval> intervals() const;
};

// Dwell-time thresholds; each throws Error(InvalidArgument) when its
// denominator is non-positive or its side condition fails.
[[nodiscard]] double adt_bound_stability(const SynthesisConfig& cfg, double lambda1, double lambda2);
[[nodiscard]] double adt_bound_bounded(const SynthesisConfig& cfg, double lambda1, double lambda2);
[[nodiscard]] double adt_bound_hinf(const SynthesisConfig& cfg, double lambda1);

[[nodiscard]] double gamma_s(const SynthesisConfig& cfg);

struct GeneratorOptions {
    double min_gap = 0.0;     // lower bound on any inter-switch gap
    double jitter = 0.5;      // extra wait, uniform on [0, jitter * tau_a)
    int initial_mode = -1;    // -1 draws it from the seed
};

[[nodiscard]] SwitchingSignal generate_adt_signal(double tau_a, double N0, double T, int mode_count,
                                                  std::uint64_t seed, const GeneratorOptions& opts = {});

struct AdtValidation {
    bool ok = true;
    // Worst window, as switch indices [first, last] and its count/allowance.
    std::size_t first = 0;
    std::size_t last = 0;
    int count = 0;
    double allowed = 0.0;
    double excess = 0.0;  // count - allowed at the worst window (<= 0 when ok)
};

[[nodiscard]] AdtValidation validate_adt(const SwitchingSignal& signal, double tau_a, double N0);

[[nodiscard]] DelayedSignal delay_signal(const SwitchingSignal& signal, double tau_d, DelayMode mode,
                                         std::uint64_t seed = 0);

} // namespace switchsynth
