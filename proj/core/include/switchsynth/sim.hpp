#pragma once

#include "switchsynth/disturbance.hpp"
#include "switchsynth/model.hpp"
#include "switchsynth/switching.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace switchsynth {

// State at a plant or controller switch. The raw state (x, x_c, x_f) is
// continuous; x_a, u_raw and V are given on both sides of the instant.
struct EventRecord {
    double t = 0.0;
    std::size_t sample = 0;  // index of the post-event sample
    bool plant_switch = false;
    bool controller_switch = false;
    int plant_before = 0;
    int plant_after = 0;
    int controller_before = 0;
    int controller_after = 0;
    Vector state_before;  // [x; x_c; x_f] at the end of the incoming step
    Vector state_after;   // state the outgoing step starts from
    Vector xa_before;
    Vector xa_after;
    Vector u_raw_before;
    Vector u_raw_after;
    double V_before = 0.0;
    double V_after = 0.0;
};

struct Trajectory {
    double h = 0.0;
    int n_x = 0;
    int n_c = 0;
    int n_u = 0;
    int n_y = 0;
    int n_w = 0;
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> x_c;
    std::vector<Vector> x_f;
    std::vector<Vector> x_a;
    std::vector<Vector> u_raw;
    std::vector<Vector> y;
    std::vector<Vector> w;
    std::vector<int> plant_mode;
    std::vector<int> controller_mode;
    std::vector<double> V;  // empty without a certificate
    std::vector<double> int_wtw;
    std::vector<double> int_yty;
    std::vector<EventRecord> events;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
    [[nodiscard]] const Vector& u_applied(std::size_t k) const { return x_f[k]; }
};

struct SimulationInput {
    Vector x0;
    std::optional<Vector> xc0;  // default zero
    std::optional<Vector> xf0;  // default u_raw(0), so the filter starts at rest
    double h = 0.0;             // 0 picks min(1e-3, tau_d / 10)
};

[[nodiscard]] double default_step(double tau_d);

// Fixed-step RK4 in (x, x_c, x_f) with events placed exactly on the grid.
// `P_tilde`, when given, adds V = x_a^T P~_{controller mode} x_a per sample.
[[nodiscard]] Trajectory simulate(const SwitchedPlant& plant, const ControllerGains& gains, const FilterSpec& filter,
                                  const DelayedSignal& signal, const Disturbance& disturbance,
                                  const SimulationInput& input, const std::vector<Matrix>* P_tilde = nullptr);

struct LyapunovSample {
    double t = 0.0;
    double V = 0.0;
    double dV = 0.0;
    int plant_mode = 0;
    int controller_mode = 0;
    double wtw = 0.0;
};

// V with the controller-mode weight and finite-difference dV/dt inside each
// constant-mode piece (one-sided at the ends, using event left limits).
[[nodiscard]] std::vector<LyapunovSample> lyapunov_series(const Trajectory& traj, const std::vector<Matrix>& P_tilde);

struct BumplessEntry {
    double t = 0.0;
    double u_raw_jump = 0.0;
    double u_applied_jump = 0.0;
};

[[nodiscard]] std::vector<BumplessEntry> bumpless_metric(const Trajectory& traj);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_signal_csv(std::ostream& out, const SwitchingSignal& signal);
void write_plot_script(std::ostream& out, const std::string& csv_name, const Trajectory& traj);

} // namespace switchsynth
