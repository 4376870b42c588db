#include "helpers.hpp"

#include "../oracles/closed_form.hpp"
#include "../oracles/simpson.hpp"

#include "switchsynth/error.hpp"
#include "switchsynth/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace switchsynth;
using namespace testing_helpers;

namespace {

DelayedSignal no_switching(double T) {
    SwitchingSignal s;
    s.horizon = T;
    s.modes = {0};
    return delay_signal(s, 0.0, DelayMode::Constant);
}

Matrix s1(double x) { return Matrix::Constant(1, 1, x); }

// x' = -x, controller state held at 1 with C_c = 1, so u_raw = 1 and the
// filter sees a unit step.
struct DecayFixture {
    SwitchedPlant plant{{{s1(-1), s1(0), s1(0), s1(0), s1(0)}, {s1(-1), s1(0), s1(0), s1(0), s1(0)}}};
    ControllerGains gains{{(Matrix(2, 2) << 0, 0, 1, 0).finished(), (Matrix(2, 2) << 0, 0, 1, 0).finished()}, 1, 1, 1};
    FilterSpec filter = FilterSpec::scalar(1.0, 1);

    Trajectory run(double h, double T = 5.0) const {
        SimulationInput in;
        in.x0 = Vector::Ones(1);
        in.xc0 = Vector::Ones(1);
        in.xf0 = Vector::Zero(1);
        in.h = h;
        return simulate(plant, gains, filter, no_switching(T), Disturbance::zero(1), in);
    }
};

double decay_error(const Trajectory& tr) {
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        err = std::max(err, std::abs(tr.x[k](0) - oracle::decay(1.0, 1.0, tr.t[k])));
    return err;
}

double filter_error(const Trajectory& tr) {
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        err = std::max(err, std::abs(tr.x_f[k](0) - oracle::first_order(0.0, 1.0, 1.0, tr.t[k])));
    return err;
}

} // namespace

TEST_CASE("closed-form exponential and filter step") {
    const DecayFixture f;
    const Trajectory tr = f.run(1e-3);
    CHECK(tr.size() == 5001);
    CHECK(decay_error(tr) <= 1e-8);
    CHECK(filter_error(tr) <= 1e-8);
    for (std::size_t k = 0; k < tr.size(); ++k)
        CHECK(tr.u_raw[k](0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fourth-order convergence") {
    const DecayFixture f;
    const double e1 = decay_error(f.run(0.2)), e2 = decay_error(f.run(0.1)), e3 = decay_error(f.run(0.05));
    CHECK(e1 / e2 >= 12.0);
    CHECK(e1 / e2 <= 20.0);
    CHECK(e2 / e3 >= 12.0);
    CHECK(e2 / e3 <= 20.0);
}

TEST_CASE("forced response and energy integrals") {
    Matrix D = s1(1.0);
    const SwitchedPlant plant({{s1(-2), s1(0), s1(0), D, s1(0)}, {s1(-2), s1(0), s1(0), D, s1(0)}});
    const ControllerGains gains({Matrix::Zero(1, 1), Matrix::Zero(1, 1)}, 0, 1, 1);
    SimulationInput in;
    in.x0 = Vector::Constant(1, 0.5);
    in.h = 1e-3;
    const Trajectory tr = simulate(plant, gains, FilterSpec::scalar(1.0, 1), no_switching(20.0),
                                   Disturbance::expression({"3*cos(2*t)"}), in);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        err = std::max(err, std::abs(tr.x[k](0) - oracle::forced_decay(0.5, 2.0, 3.0, 2.0, tr.t[k])));
    CHECK(err <= 1e-8);
    const double wtw = oracle::adaptive_simpson([](double t) { return 9.0 * std::cos(2 * t) * std::cos(2 * t); }, 0, 20);
    CHECK(tr.int_wtw.back() == doctest::Approx(wtw).epsilon(1e-6));
}

TEST_CASE("disturbance energy of cos(t)/(t^2+1) on [0, 20]") {
    const ProblemConfig cfg = demo_config();
    SimulationInput in;
    in.x0 = Vector::Zero(2);
    in.h = 1e-3;
    const ControllerGains gains({Matrix::Zero(3, 3), Matrix::Zero(3, 3)}, 2, 1, 1);
    const Trajectory tr = simulate(cfg.plant, gains, cfg.filter, no_switching(20.0),
                                   Disturbance::cos_over_quadratic(Vector::Ones(1)), in);
    const double ref = oracle::adaptive_simpson(
        [](double t) {
            const double w = std::cos(t) / (t * t + 1.0);
            return w * w;
        },
        0.0, 20.0, 1e-13);
    CHECK(std::abs(tr.int_wtw.back() - ref) <= 1e-6);
    // the printed bound d = 0.3 does not cover this energy
    CHECK(ref > 0.3);
}

TEST_CASE("switched run: continuity, x_a consistency, event alignment") {
    std::mt19937_64 rng(31);
    const SwitchedPlant plant = random_stable_plant(rng);
    const ControllerGains gains({random_matrix(rng, 3, 3, 0.3), random_matrix(rng, 3, 3, 0.3)}, 2, 1, 1);
    const FilterSpec filter = FilterSpec::scalar(5.0, 1);
    GeneratorOptions o;
    o.min_gap = 0.3;
    const SwitchingSignal sig = generate_adt_signal(0.8, 1.0, 8.0, 2, 3, o);
    REQUIRE(sig.switch_count() >= 2);
    const DelayedSignal ds = delay_signal(sig, 0.1, DelayMode::Random, 3);
    SimulationInput in;
    in.x0 = (Vector(2) << 0.6, -0.2).finished();
    const Trajectory tr = simulate(plant, gains, filter, ds, Disturbance::cos_over_quadratic(Vector::Ones(1)), in);
    CHECK(tr.h == doctest::Approx(1e-3));

    for (std::size_t k = 0; k < tr.size(); ++k) {
        const ControllerBlocks c = gains.blocks(static_cast<std::size_t>(tr.controller_mode[k]));
        const Matrix& C = plant.mode(static_cast<std::size_t>(tr.plant_mode[k])).C;
        const Vector expect = augmented_state(tr.x[k], tr.x_c[k], tr.x_f[k], C, c);
        CHECK((tr.x_a[k] - expect).norm() <= 1e-9);
    }
    for (std::size_t k = 1; k < tr.size(); ++k)
        CHECK(tr.t[k] > tr.t[k - 1]);

    std::vector<double> expected_events = sig.times;
    for (double t : ds.controller_switch_times())
        expected_events.push_back(t);
    CHECK(tr.events.size() == expected_events.size());
    for (double te : expected_events) {
        bool on_grid = false;
        for (double t : tr.t)
            on_grid |= (t == te);
        CHECK(on_grid);
    }
    for (const auto& e : tr.events) {
        CHECK((e.state_before - e.state_after).norm() <= 1e-9);
        CHECK(tr.t[e.sample] == e.t);
    }
}

TEST_CASE("original and augmented coordinates agree") {
    std::mt19937_64 rng(32);
    const SwitchedPlant plant = random_stable_plant(rng);
    const ControllerGains gains({random_matrix(rng, 3, 3, 0.3), random_matrix(rng, 3, 3, 0.3)}, 2, 1, 1);
    const FilterSpec filter = FilterSpec::scalar(5.0, 1);
    const AugmentedSystem sys = build_augmented(plant, gains, filter);
    GeneratorOptions o;
    o.min_gap = 0.3;
    const SwitchingSignal sig = generate_adt_signal(1.0, 1.0, 6.0, 2, 8, o);
    const DelayedSignal ds = delay_signal(sig, 0.1, DelayMode::Constant);
    const Disturbance w = Disturbance::cos_over_quadratic(Vector::Ones(1));
    SimulationInput in;
    in.x0 = (Vector(2) << 0.3, 0.4).finished();
    in.h = 1e-3;
    const Trajectory tr = simulate(plant, gains, filter, ds, w, in);

    // RK4 directly on x_a' = A_a x_a + G_a w, with the jump of the last
    // coordinate applied at each controller or plant switch.
    Vector xa = tr.x_a[0];
    double max_err = 0.0;
    std::size_t ev = 0;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
        const double t0 = tr.t[k], t1 = tr.t[k + 1], hh = t1 - t0;
        const auto i = static_cast<std::size_t>(tr.plant_mode[k]);
        const auto j = static_cast<std::size_t>(tr.controller_mode[k]);
        const Matrix& A = sys.a(i, j);
        const Matrix& G = sys.g(i, j);
        auto f = [&](double t, const Vector& z) -> Vector { return A * z + G * w(t); };
        const Vector k1 = f(t0, xa), k2 = f(t0 + hh / 2, xa + hh / 2 * k1), k3 = f(t0 + hh / 2, xa + hh / 2 * k2),
                     k4 = f(t1, xa + hh * k3);
        xa += hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        while (ev < tr.events.size() && tr.events[ev].sample == k + 1) {
            max_err = std::max(max_err, (xa - tr.events[ev].xa_before).norm());
            xa = tr.events[ev].xa_after + (xa - tr.events[ev].xa_before);
            ++ev;
        }
        max_err = std::max(max_err, (xa - tr.x_a[k + 1]).norm());
    }
    CHECK(max_err <= 1e-7);
}

TEST_CASE("bumpless metric on a designed two-mode example") {
    const Matrix z2 = Matrix::Zero(2, 2);
    Matrix A = -Matrix::Identity(2, 2), B(2, 1), C(1, 2), D(2, 1), E(1, 1);
    B << 1, 0;
    C << 1, 1;
    D.setZero();
    E.setZero();
    const SwitchedPlant plant({{A, B, C, D, E}, {A, B, C, D, E}});
    Matrix k1 = Matrix::Zero(3, 3), k2 = Matrix::Zero(3, 3);
    k1(2, 2) = 0.5;   // D_c
    k2(2, 2) = -1.0;
    k2(2, 0) = 0.3;   // C_c
    const ControllerGains gains({k1, k2}, 2, 1, 1);
    SwitchingSignal s;
    s.horizon = 3.0;
    s.times = {1.0};
    s.modes = {0, 1};
    const DelayedSignal ds = delay_signal(s, 0.1, DelayMode::Constant);
    SimulationInput in;
    in.x0 = (Vector(2) << 1.0, 0.5).finished();
    in.xc0 = (Vector(2) << 0.7, 0.0).finished();
    const Trajectory tr = simulate(plant, gains, FilterSpec::scalar(10.0, 1), ds, Disturbance::zero(1), in);
    const auto report = bumpless_metric(tr);
    REQUIRE(report.size() == 1);
    CHECK(report[0].t == doctest::Approx(1.1).epsilon(1e-15));
    const EventRecord* ev = nullptr;
    for (const auto& e : tr.events)
        if (e.controller_switch)
            ev = &e;
    REQUIRE(ev != nullptr);
    const Vector x = ev->state_before.head(2), xc = ev->state_before.segment(2, 2);
    const double expect = std::abs(((0.5 - (-1.0)) * C * x + (Matrix(1, 2) << -0.3, 0).finished() * xc)(0));
    CHECK(report[0].u_raw_jump == doctest::Approx(expect).epsilon(1e-12));
    CHECK(report[0].u_applied_jump <= 1e-9);

    SwitchingSignal none;
    none.horizon = 1.0;
    none.modes = {0};
    const Trajectory quiet = simulate(plant, gains, FilterSpec::scalar(10.0, 1),
                                      delay_signal(none, 0.0, DelayMode::Constant), Disturbance::zero(1), in);
    CHECK(bumpless_metric(quiet).empty());
}

TEST_CASE("divergence guard and event spacing") {
    const SwitchedPlant plant({{s1(30), s1(0), s1(0), s1(0), s1(0)}, {s1(30), s1(0), s1(0), s1(0), s1(0)}});
    const ControllerGains gains({Matrix::Zero(1, 1), Matrix::Zero(1, 1)}, 0, 1, 1);
    SimulationInput in;
    in.x0 = Vector::Ones(1);
    try {
        (void)simulate(plant, gains, FilterSpec::scalar(1.0, 1), no_switching(2.0), Disturbance::zero(1), in);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Diverged);
    }

    SwitchingSignal s;
    s.horizon = 2.0;
    s.times = {1.0, 1.002};
    s.modes = {0, 1, 0};
    const DelayedSignal ds = delay_signal(s, 0.0, DelayMode::Constant);
    in.h = 1e-3;
    const SwitchedPlant calm({{s1(-1), s1(0), s1(0), s1(0), s1(0)}, {s1(-1), s1(0), s1(0), s1(0), s1(0)}});
    CHECK_THROWS_AS((void)simulate(calm, gains, FilterSpec::scalar(1.0, 1), ds, Disturbance::zero(1), in), Error);
}

TEST_CASE("Lyapunov series for a scalar decay") {
    const DecayFixture f;
    // V with P~ = e_1 e_1^T sees only x = e^{-t}: V = e^{-2t}, dV = -2V
    Matrix P = Matrix::Zero(3, 3);
    P(0, 0) = 1.0;
    const std::vector<Matrix> Pt{P, P};
    SimulationInput in;
    in.x0 = Vector::Ones(1);
    in.xc0 = Vector::Ones(1);
    in.xf0 = Vector::Zero(1);
    in.h = 1e-3;
    const Trajectory tr = simulate(f.plant, f.gains, f.filter, no_switching(3.0), Disturbance::zero(1), in, &Pt);
    const auto series = lyapunov_series(tr, Pt);
    REQUIRE(series.size() == tr.size());
    for (const auto& s : series) {
        CHECK(s.V == doctest::Approx(std::exp(-2 * s.t)).epsilon(1e-10));
        CHECK(std::abs(s.dV + 2 * s.V) <= 1e-4);
    }
    const std::vector<Matrix> zero{Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
    for (const auto& s : lyapunov_series(tr, zero))
        CHECK(s.V == 0.0);
}

TEST_CASE("trajectory CSV layout") {
    const DecayFixture f;
    const Trajectory tr = f.run(0.01, 0.1);
    std::ostringstream out;
    write_trajectory_csv(out, tr);
    const std::string csv = out.str();
    CHECK(csv.rfind("t,x1,xc1,xf1,u_raw1,u_app1,y1,mode_plant,mode_ctrl,V,int_wtw,int_yty\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
    std::ostringstream gp;
    write_plot_script(gp, "trajectory.csv", tr);
    CHECK(gp.str().find("trajectory.csv") != std::string::npos);
}
