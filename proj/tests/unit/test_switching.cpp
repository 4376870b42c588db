#include "../oracles/adt_bruteforce.hpp"
#include "../oracles/scalars.hpp"

#include "switchsynth/error.hpp"
#include "switchsynth/switching.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace switchsynth;

namespace {

SynthesisConfig scalars(const oracle::Scalars& s) {
    SynthesisConfig c;
    c.alpha = s.alpha;
    c.beta = s.beta;
    c.mu = s.mu;
    c.tau_d = s.tau_d;
    c.N0 = s.N0;
    c.c1 = s.c1;
    c.c2 = s.c2;
    c.T = s.T;
    c.d = s.d;
    c.gamma = s.gamma;
    return c;
}

const oracle::Scalars case1{0.4, 0.1, 1.1, 0.1, 1.0, 1.0, 1.1, 10.0, 0.0, 1.0};
const oracle::Scalars case2{0.5, 1.2, 1.1, 0.1, 1.0, 1.0, 1.1, 20.0, 0.3, 1.0};

SwitchingSignal make_signal(double T, std::vector<double> times, std::vector<int> modes) {
    SwitchingSignal s;
    s.horizon = T;
    s.times = std::move(times);
    s.modes = std::move(modes);
    return s;
}

} // namespace

TEST_CASE("stability dwell-time bound") {
    SynthesisConfig c = scalars(case1);
    c.mu = 1.0;
    c.tau_d = 0.0;
    c.N0 = 0.0;
    CHECK(adt_bound_stability(c, 1.0, 1.0) == 0.0);

    const SynthesisConfig c1 = scalars(case1);
    CHECK(adt_bound_stability(c1, 1.0, 1.0) == doctest::Approx(0.3679).epsilon(1e-3));
    CHECK(adt_bound_stability(c1, 1.0, 1.0) == doctest::Approx(oracle::tau_stability(case1, 1.0, 1.0)).epsilon(1e-14));
    CHECK(adt_bound_stability(c1, 0.7, 1.9) == doctest::Approx(oracle::tau_stability(case1, 0.7, 1.9)).epsilon(1e-14));
    // lambda2 / lambda1 large enough to kill the denominator
    CHECK_THROWS_AS((void)adt_bound_stability(c1, 1.0, 1e3), Error);
}

TEST_CASE("bounded dwell-time bound") {
    const SynthesisConfig c2 = scalars(case2);
    CHECK(adt_bound_bounded(c2, 1.0, 1.0) == doctest::Approx(oracle::tau_bounded(case2, 1.0, 1.0)).epsilon(1e-14));
    // continuity as d -> 0
    SynthesisConfig small = c2;
    small.d = 1e-12;
    SynthesisConfig zero = c2;
    zero.d = 0.0;
    CHECK(adt_bound_bounded(small, 1.0, 1.0) == doctest::Approx(adt_bound_bounded(zero, 1.0, 1.0)).epsilon(1e-9));
}

TEST_CASE("H-infinity dwell-time bound and gamma_s") {
    SynthesisConfig h = scalars(case2);
    h.c1 = 0.0;
    const double second = (1.7 * 0.1 + std::log(1.1)) / 0.5;
    CHECK(second == doctest::Approx(0.5306).epsilon(1e-3));
    CHECK(adt_bound_hinf(h, 1.0) == doctest::Approx(oracle::tau_hinf(case2, 1.0)).epsilon(1e-14));

    // small d: first branch dominates
    oracle::Scalars s = case2;
    s.d = 1e-3;
    s.T = 100.0;
    s.c1 = 0.0;
    SynthesisConfig hs = scalars(s);
    const double expect = oracle::tau_hinf(s, 1.0);
    CHECK(expect > (1.7 * 0.1 + std::log(1.1)) / 0.5);
    CHECK(adt_bound_hinf(hs, 1.0) == doctest::Approx(expect).epsilon(1e-14));

    SynthesisConfig g = scalars(case2);
    g.N0 = 0.0;
    g.alpha = 0.0;
    CHECK(gamma_s(g) == doctest::Approx(1.0).epsilon(1e-15));
    SynthesisConfig g2 = scalars(case2);
    CHECK(gamma_s(g2) == doctest::Approx(169.5).epsilon(1e-3));
    CHECK(gamma_s(g2) == doctest::Approx(oracle::gamma_s(case2)).epsilon(1e-14));
    g2.gamma = 2.0;
    CHECK(gamma_s(g2) == doctest::Approx(2.0 * oracle::gamma_s(case2)).epsilon(1e-14));
}

TEST_CASE("dwell-time bounds are monotone in mu and tau_d") {
    for (double mu = 1.0; mu < 1.5; mu += 0.05) {
        SynthesisConfig a = scalars(case1), b = scalars(case1);
        a.mu = mu;
        b.mu = mu + 0.05;
        CHECK(adt_bound_stability(a, 1.0, 1.0) <= adt_bound_stability(b, 1.0, 1.0));
    }
    for (double td = 0.0; td < 0.5; td += 0.05) {
        SynthesisConfig a = scalars(case1), b = scalars(case1);
        a.tau_d = td;
        b.tau_d = td + 0.05;
        CHECK(adt_bound_stability(a, 1.0, 1.0) <= adt_bound_stability(b, 1.0, 1.0));
    }
}

TEST_CASE("signal invariants") {
    CHECK_NOTHROW(make_signal(10, {1, 2}, {0, 1, 0}).validate(2));
    CHECK_THROWS_AS(make_signal(10, {2, 1}, {0, 1, 0}).validate(2), Error);
    CHECK_THROWS_AS(make_signal(10, {1, 2}, {0, 0, 1}).validate(2), Error);
    CHECK_THROWS_AS(make_signal(10, {1}, {0, 2}).validate(2), Error);
    CHECK_THROWS_AS(make_signal(10, {11}, {0, 1}).validate(2), Error);
    const SwitchingSignal s = make_signal(10, {1, 2}, {0, 1, 0});
    CHECK(s.mode_at(0.5) == 0);
    CHECK(s.mode_at(1.0) == 1);
    CHECK(s.mode_at(2.5) == 0);
}

TEST_CASE("ADT validation on constructed signals") {
    CHECK(validate_adt(make_signal(10, {}, {0}), 1.0, 0.0).ok);
    const SwitchingSignal three = make_signal(10, {2, 5, 8}, {0, 1, 0, 1});
    // three switches spanning 6 s: 3 <= 0 + 6/2 holds
    CHECK(validate_adt(three, 2.0, 1.0).ok);
    CHECK(oracle::adt_holds(three.times, 2.0, 1.0));
    // squeeze them into 4 s: the window allows 2 with N0 = 0
    const SwitchingSignal tight = make_signal(10, {2, 4, 6}, {0, 1, 0, 1});
    const AdtValidation v = validate_adt(tight, 2.0, 0.0);
    CHECK_FALSE(v.ok);
    CHECK_FALSE(oracle::adt_holds(tight.times, 2.0, 0.0));
    CHECK(v.excess > 0.0);
}

TEST_CASE("validate_adt agrees with brute force on random signals") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::uniform_int_distribution<int> count(0, 15);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> t(static_cast<std::size_t>(count(rng)));
        for (auto& x : t)
            x = u(rng);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        std::vector<int> modes(t.size() + 1);
        for (std::size_t i = 0; i < modes.size(); ++i)
            modes[i] = static_cast<int>(i % 2);
        const SwitchingSignal s = make_signal(10.0, t, modes);
        const double tau = 0.3 + u(rng) / 5.0;
        const double N0 = std::floor(u(rng) / 3.0);
        CHECK(validate_adt(s, tau, N0).ok == oracle::adt_holds(t, tau, N0));
    }
}

TEST_CASE("generated signals satisfy the ADT definition") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const SwitchingSignal s = generate_adt_signal(0.9, 1.0, 10.0, 3, seed);
        CHECK(validate_adt(s, 0.9, 1.0).ok);
        CHECK(oracle::adt_holds(s.times, 0.9, 1.0));
        CHECK_NOTHROW(s.validate(3));
    }
    const SwitchingSignal a = generate_adt_signal(0.9, 1.0, 10.0, 2, 42);
    const SwitchingSignal b = generate_adt_signal(0.9, 1.0, 10.0, 2, 42);
    CHECK(a.times == b.times);
    CHECK(a.modes == b.modes);
    CHECK(a.switch_count() > 3);
    // dwell time equal to the horizon with no chatter allowance: no switch fits
    const SwitchingSignal none = generate_adt_signal(10.0, 0.0, 10.0, 2, 1);
    CHECK(none.switch_count() == 0);
    // N0 = 1, tau_a = T: at most two switches on the full horizon
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        CHECK(generate_adt_signal(10.0, 1.0, 10.0, 2, seed).switch_count() <= 2);
}

TEST_CASE("minimum gap is respected") {
    GeneratorOptions o;
    o.min_gap = 0.5;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SwitchingSignal s = generate_adt_signal(0.3, 2.0, 10.0, 2, seed, o);
        for (std::size_t k = 1; k < s.times.size(); ++k)
            CHECK(s.times[k] - s.times[k - 1] >= 0.5 - 1e-12);
        CHECK((s.times.empty() || s.times.front() >= 0.5 - 1e-12));
    }
}

TEST_CASE("delay injection") {
    const SwitchingSignal one = make_signal(10.0, {5.0}, {0, 1});
    const DelayedSignal z = delay_signal(one, 0.0, DelayMode::Constant);
    for (const auto& iv : z.intervals())
        CHECK_FALSE(iv.mismatched());

    const DelayedSignal d = delay_signal(one, 0.1, DelayMode::Constant);
    CHECK(d.controller_mode_at(5.05) == 0);
    CHECK(d.controller_mode_at(5.1) == 1);
    const auto ivs = d.intervals();
    REQUIRE(ivs.size() == 3);
    CHECK(ivs[1].mismatched());
    CHECK(ivs[1].begin == 5.0);
    CHECK(ivs[1].end == doctest::Approx(5.1).epsilon(1e-15));

    const SwitchingSignal close = make_signal(10.0, {5.0, 5.05}, {0, 1, 0});
    CHECK_THROWS_AS((void)delay_signal(close, 0.1, DelayMode::Constant), Error);
}

TEST_CASE("delay intervals partition the horizon") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GeneratorOptions o;
        o.min_gap = 0.2;
        const SwitchingSignal s = generate_adt_signal(0.8, 1.0, 10.0, 3, seed, o);
        const DelayedSignal d = delay_signal(s, 0.15, DelayMode::Random, seed);
        const auto ivs = d.intervals();
        double covered = 0.0, mismatched = 0.0, lag_sum = 0.0;
        double prev_end = 0.0;
        for (const auto& iv : ivs) {
            CHECK(iv.begin == doctest::Approx(prev_end).epsilon(1e-15));
            prev_end = iv.end;
            covered += iv.end - iv.begin;
            if (iv.mismatched())
                mismatched += iv.end - iv.begin;
        }
        for (std::size_t k = 0; k < d.lags.size(); ++k) {
            CHECK(d.lags[k] > 0.0);
            CHECK(d.lags[k] <= 0.15);
            lag_sum += std::min(d.lags[k], 10.0 - s.times[k]);
        }
        CHECK(covered == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(mismatched == doctest::Approx(lag_sum).epsilon(1e-9));
    }
}

TEST_CASE("random lags average half the bound") {
    std::vector<double> times;
    std::vector<int> modes{0};
    for (int k = 1; k <= 10000; ++k) {
        times.push_back(k * 1.0);
        modes.push_back(k % 2);
    }
    const SwitchingSignal s = make_signal(10001.0, times, modes);
    const DelayedSignal d = delay_signal(s, 0.2, DelayMode::Random, 5);
    double mean = 0.0;
    for (double l : d.lags)
        mean += l;
    mean /= static_cast<double>(d.lags.size());
    CHECK(std::abs(mean - 0.1) <= 0.05 * 0.1);
}
