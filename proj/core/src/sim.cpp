#include "switchsynth/sim.hpp"

#include "switchsynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>
#include <string>

namespace switchsynth {

double default_step(double tau_d) {
    return tau_d > 0.0 ? std::min(1e-3, tau_d / 10.0) : 1e-3;
}

namespace {

constexpr double kOverflowGuard = 1e12;

// z' = M z + W w for plant mode i under controller mode j, z = [x; x_c; x_f].
struct LoopPiece {
    Matrix M;
    Matrix W;
};

LoopPiece loop_piece(const PlantMode& p, const ControllerBlocks& c, const Matrix& k_f) {
    const Eigen::Index n_x = p.A.rows();
    const Eigen::Index n_c = c.A_c.rows();
    const Eigen::Index n_u = p.B.cols();
    const Eigen::Index n = n_x + n_c + n_u;
    LoopPiece lp{Matrix::Zero(n, n), Matrix::Zero(n, p.D.cols())};
    lp.M.block(0, 0, n_x, n_x) = p.A;
    lp.M.block(0, n_x + n_c, n_x, n_u) = p.B;
    lp.W.topRows(n_x) = p.D;
    lp.M.block(n_x, 0, n_c, n_x) = c.B_c * p.C;
    lp.M.block(n_x, n_x, n_c, n_c) = c.A_c;
    lp.W.middleRows(n_x, n_c) = c.B_c * p.E;
    // x_f' = K_f (C_c x_c + D_c (C x + E w) - x_f)
    lp.M.block(n_x + n_c, 0, n_u, n_x) = k_f * c.D_c * p.C;
    lp.M.block(n_x + n_c, n_x, n_u, n_c) = k_f * c.C_c;
    lp.M.block(n_x + n_c, n_x + n_c, n_u, n_u) = -k_f;
    lp.W.bottomRows(n_u) = k_f * c.D_c * p.E;
    return lp;
}

struct Node {
    double t;
    bool plant_event;
    bool controller_event;
};

std::vector<Node> build_grid(double T, double h, const std::vector<double>& plant_events,
                             const std::vector<double>& controller_events) {
    std::vector<Node> events;
    for (double t : plant_events)
        if (t > 0.0 && t < T)
            events.push_back({t, true, false});
    for (double t : controller_events)
        if (t > 0.0 && t < T)
            events.push_back({t, false, true});
    std::sort(events.begin(), events.end(), [](const Node& a, const Node& b) { return a.t < b.t; });
    // Coincident plant/controller instants (zero lag) become one event.
    std::vector<Node> merged;
    for (const Node& e : events) {
        if (!merged.empty() && merged.back().t == e.t) {
            merged.back().plant_event |= e.plant_event;
            merged.back().controller_event |= e.controller_event;
        } else {
            merged.push_back(e);
        }
    }
    for (std::size_t k = 1; k < merged.size(); ++k) {
        if (merged[k].t - merged[k - 1].t < 4.0 * h) {
            throw Error(ErrorKind::InvalidArgument, "sim",
                        fmt::format("events at t={:.6g} and t={:.6g} are closer than 4h (h={:.3g}); use a smaller step",
                                    merged[k - 1].t, merged[k].t, h));
        }
    }

    std::vector<Node> grid;
    const double snap = 1e-9 * h;
    std::size_t e = 0;
    const auto steps = static_cast<long long>(std::ceil(T / h - 1e-9));
    for (long long k = 0; k <= steps; ++k) {
        const double tk = std::min(static_cast<double>(k) * h, T);
        while (e < merged.size() && merged[e].t <= tk + snap) {
            if (!grid.empty() && merged[e].t - grid.back().t <= snap) {
                grid.back().t = merged[e].t;
                grid.back().plant_event |= merged[e].plant_event;
                grid.back().controller_event |= merged[e].controller_event;
            } else {
                grid.push_back(merged[e]);
            }
            ++e;
        }
        if (grid.empty() || tk - grid.back().t > snap)
            grid.push_back({tk, false, false});
    }
    grid.back().t = T;
    return grid;
}

} // namespace

Trajectory simulate(const SwitchedPlant& plant, const ControllerGains& gains, const FilterSpec& filter,
                    const DelayedSignal& signal, const Disturbance& disturbance, const SimulationInput& input,
                    const std::vector<Matrix>* P_tilde) {
    const int n_x = plant.n_x();
    const int n_c = gains.n_c();
    const int n_u = plant.n_u();
    const int n_y = plant.n_y();
    const int n_w = plant.n_w();
    const std::size_t S = plant.mode_count();
    if (gains.mode_count() != S)
        throw Error(ErrorKind::Dimension, "sim", "one gain per plant mode is required");
    if (disturbance.n_w() != n_w)
        throw Error(ErrorKind::Dimension, "sim", "disturbance width does not match n_w");
    if (input.x0.size() != n_x || !input.x0.allFinite())
        throw Error(ErrorKind::InvalidArgument, "sim", "x0 must be finite with n_x entries");
    signal.base.validate(static_cast<int>(S));
    if (signal.lags.size() != signal.base.times.size())
        throw Error(ErrorKind::InvalidArgument, "sim", "one lag per switch is required");
    if (P_tilde && P_tilde->size() != S)
        throw Error(ErrorKind::Dimension, "sim", "one P~ per mode is required");
    const double T = signal.base.horizon;
    const double h = input.h > 0.0 ? input.h : default_step(signal.tau_d);
    if (!(T > 0.0) || !std::isfinite(h))
        throw Error(ErrorKind::InvalidArgument, "sim", "invalid horizon or step");

    std::vector<ControllerBlocks> ctrl;
    for (std::size_t j = 0; j < S; ++j)
        ctrl.push_back(gains.blocks(j));
    std::vector<std::vector<LoopPiece>> pieces(S);
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j)
            pieces[i].push_back(loop_piece(plant.mode(i), ctrl[j], filter.k_f()));

    const std::vector<Node> grid =
        build_grid(T, h, signal.base.times, signal.controller_switch_times());

    Trajectory traj;
    traj.h = h;
    traj.n_x = n_x;
    traj.n_c = n_c;
    traj.n_u = n_u;
    traj.n_y = n_y;
    traj.n_w = n_w;

    auto output = [&](const Vector& z, int i, const Vector& w) -> Vector {
        const PlantMode& p = plant.mode(static_cast<std::size_t>(i));
        return p.C * z.head(n_x) + p.E * w;
    };
    auto raw_control = [&](const Vector& z, int j, const Vector& y) -> Vector {
        const ControllerBlocks& c = ctrl[static_cast<std::size_t>(j)];
        return c.C_c * z.segment(n_x, n_c) + c.D_c * y;
    };
    auto aug = [&](const Vector& z, int i, int j) -> Vector {
        return augmented_state(z.head(n_x), z.segment(n_x, n_c), z.tail(n_u), plant.mode(static_cast<std::size_t>(i)).C,
                               ctrl[static_cast<std::size_t>(j)]);
    };
    auto lyap = [&](const Vector& xa, int j) -> double {
        return P_tilde ? xa.dot((*P_tilde)[static_cast<std::size_t>(j)] * xa) : 0.0;
    };

    int i_mode = signal.plant_mode_at(0.0);
    int j_mode = signal.controller_mode_at(0.0);

    Vector z(n_x + n_c + n_u);
    z.head(n_x) = input.x0;
    if (input.xc0) {
        if (input.xc0->size() != n_c)
            throw Error(ErrorKind::InvalidArgument, "sim", "xc0 must have n_c entries");
        z.segment(n_x, n_c) = *input.xc0;
    } else {
        z.segment(n_x, n_c).setZero();
    }
    if (input.xf0) {
        if (input.xf0->size() != n_u)
            throw Error(ErrorKind::InvalidArgument, "sim", "xf0 must have n_u entries");
        z.tail(n_u) = *input.xf0;
    } else {
        const Vector w0 = disturbance(0.0);
        z.tail(n_u) = raw_control(z, j_mode, output(z, i_mode, w0));
    }
    if (!z.allFinite())
        throw Error(ErrorKind::InvalidArgument, "sim", "initial state must be finite");

    auto record = [&](double t, const Vector& state, int i, int j, double wtw, double yty) {
        const Vector w = disturbance(t);
        const Vector y = output(state, i, w);
        const Vector xa = aug(state, i, j);
        traj.t.push_back(t);
        traj.x.push_back(state.head(n_x));
        traj.x_c.push_back(state.segment(n_x, n_c));
        traj.x_f.push_back(state.tail(n_u));
        traj.x_a.push_back(xa);
        traj.u_raw.push_back(raw_control(state, j, y));
        traj.y.push_back(y);
        traj.w.push_back(w);
        traj.plant_mode.push_back(i);
        traj.controller_mode.push_back(j);
        if (P_tilde)
            traj.V.push_back(lyap(xa, j));
        traj.int_wtw.push_back(wtw);
        traj.int_yty.push_back(yty);
    };

    double wtw = 0.0;
    double yty = 0.0;
    record(0.0, z, i_mode, j_mode, wtw, yty);

    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
        const double t0 = grid[n].t;
        const double t1 = grid[n + 1].t;
        const double dt = t1 - t0;
        const LoopPiece& lp = pieces[static_cast<std::size_t>(i_mode)][static_cast<std::size_t>(j_mode)];

        const Vector w0 = disturbance(t0);
        const Vector wm = disturbance(t0 + 0.5 * dt);
        const Vector w1 = disturbance(t1);
        const Vector k1 = lp.M * z + lp.W * w0;
        const Vector k2 = lp.M * (z + 0.5 * dt * k1) + lp.W * wm;
        const Vector k3 = lp.M * (z + 0.5 * dt * k2) + lp.W * wm;
        const Vector k4 = lp.M * (z + dt * k3) + lp.W * w1;
        const Vector z1 = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z1.allFinite() || z1.norm() > kOverflowGuard) {
            throw Error(ErrorKind::Diverged, "sim",
                        fmt::format("state norm exceeded {:.0e} at t={:.6g}", kOverflowGuard, t1));
        }

        const Vector y0 = output(z, i_mode, w0);
        const Vector y1 = output(z1, i_mode, w1);
        wtw += 0.5 * dt * (w0.squaredNorm() + w1.squaredNorm());
        yty += 0.5 * dt * (y0.squaredNorm() + y1.squaredNorm());
        z = z1;

        const Node& node = grid[n + 1];
        if (node.plant_event || node.controller_event) {
            EventRecord ev;
            ev.t = t1;
            ev.sample = traj.size();
            ev.plant_switch = node.plant_event;
            ev.controller_switch = node.controller_event;
            ev.plant_before = i_mode;
            ev.controller_before = j_mode;
            ev.state_before = z;
            ev.xa_before = aug(z, i_mode, j_mode);
            ev.u_raw_before = raw_control(z, j_mode, output(z, i_mode, w1));
            ev.V_before = lyap(ev.xa_before, j_mode);
            i_mode = signal.plant_mode_at(t1);
            j_mode = signal.controller_mode_at(t1);
            ev.plant_after = i_mode;
            ev.controller_after = j_mode;
            ev.state_after = z;
            ev.xa_after = aug(z, i_mode, j_mode);
            ev.u_raw_after = raw_control(z, j_mode, output(z, i_mode, w1));
            ev.V_after = lyap(ev.xa_after, j_mode);
            traj.events.push_back(std::move(ev));
        }
        record(t1, z, i_mode, j_mode, wtw, yty);
    }
    return traj;
}

namespace {

// Derivative at x of the parabola through (t0, v0), (t1, v1), (t2, v2).
double quadratic_slope(double t0, double t1, double t2, double v0, double v1, double v2, double x) {
    return v0 * ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2)) + v1 * ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2)) +
           v2 * ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
}

} // namespace

std::vector<LyapunovSample> lyapunov_series(const Trajectory& traj, const std::vector<Matrix>& P_tilde) {
    std::vector<LyapunovSample> out(traj.size());
    if (traj.size() == 0)
        return out;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto j = static_cast<std::size_t>(traj.controller_mode[k]);
        if (j >= P_tilde.size())
            throw Error(ErrorKind::Dimension, "sim", "no P~ for controller mode " + std::to_string(j));
        out[k].t = traj.t[k];
        out[k].V = traj.x_a[k].dot(P_tilde[j] * traj.x_a[k]);
        out[k].plant_mode = traj.plant_mode[k];
        out[k].controller_mode = traj.controller_mode[k];
        out[k].wtw = traj.w[k].squaredNorm();
    }

    // Piece boundaries are the post-event sample indices.
    std::vector<std::size_t> starts{0};
    for (const auto& ev : traj.events)
        starts.push_back(ev.sample);
    starts.push_back(traj.size());

    for (std::size_t p = 0; p + 1 < starts.size(); ++p) {
        const std::size_t a = starts[p];
        const std::size_t b = starts[p + 1];
        if (b <= a)
            continue;
        std::vector<double> ts;
        std::vector<double> vs;
        for (std::size_t k = a; k < b; ++k) {
            ts.push_back(out[k].t);
            vs.push_back(out[k].V);
        }
        if (p < traj.events.size()) {
            // left limit at the closing event, with this piece's weight
            const EventRecord& ev = traj.events[p];
            const Matrix& Pj = P_tilde[static_cast<std::size_t>(ev.controller_before)];
            ts.push_back(ev.t);
            vs.push_back(ev.xa_before.dot(Pj * ev.xa_before));
        }
        const std::size_t m = ts.size();
        for (std::size_t q = 0; q < b - a; ++q) {
            double d = 0.0;
            if (m == 2) {
                d = (vs[1] - vs[0]) / (ts[1] - ts[0]);
            } else if (m >= 3) {
                // quadratic through three neighbouring samples, one-sided at the ends
                const std::size_t c = std::clamp<std::size_t>(q, 1, m - 2);
                d = quadratic_slope(ts[c - 1], ts[c], ts[c + 1], vs[c - 1], vs[c], vs[c + 1], ts[q]);
            }
            out[a + q].dV = d;
        }
    }
    return out;
}

std::vector<BumplessEntry> bumpless_metric(const Trajectory& traj) {
    std::vector<BumplessEntry> out;
    for (const auto& ev : traj.events) {
        if (!ev.controller_switch)
            continue;
        const Eigen::Index n_u = traj.n_u;
        BumplessEntry e;
        e.t = ev.t;
        e.u_raw_jump = (ev.u_raw_after - ev.u_raw_before).cwiseAbs().maxCoeff();
        e.u_applied_jump = (ev.state_after.tail(n_u) - ev.state_before.tail(n_u)).cwiseAbs().maxCoeff();
        out.push_back(e);
    }
    return out;
}

namespace {

void header_group(std::string& line, const char* prefix, int count) {
    for (int k = 1; k <= count; ++k)
        line += fmt::format(",{}{}", prefix, k);
}

void value_group(std::string& line, const Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k)
        line += fmt::format(",{:.17g}", v(k));
}

} // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    std::string head = "t";
    header_group(head, "x", traj.n_x);
    header_group(head, "xc", traj.n_c);
    header_group(head, "xf", traj.n_u);
    header_group(head, "u_raw", traj.n_u);
    header_group(head, "u_app", traj.n_u);
    header_group(head, "y", traj.n_y);
    head += ",mode_plant,mode_ctrl,V,int_wtw,int_yty\n";
    out << head;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::string line = fmt::format("{:.17g}", traj.t[k]);
        value_group(line, traj.x[k]);
        value_group(line, traj.x_c[k]);
        value_group(line, traj.x_f[k]);
        value_group(line, traj.u_raw[k]);
        value_group(line, traj.u_applied(k));
        value_group(line, traj.y[k]);
        line += fmt::format(",{},{}", traj.plant_mode[k], traj.controller_mode[k]);
        line += traj.V.empty() ? std::string(",nan") : fmt::format(",{:.17g}", traj.V[k]);
        line += fmt::format(",{:.17g},{:.17g}\n", traj.int_wtw[k], traj.int_yty[k]);
        out << line;
    }
}

void write_signal_csv(std::ostream& out, const SwitchingSignal& signal) {
    out << "t_switch,mode_before,mode_after\n";
    for (std::size_t k = 0; k < signal.times.size(); ++k)
        out << fmt::format("{:.17g},{},{}\n", signal.times[k], signal.modes[k], signal.modes[k + 1]);
}

void write_plot_script(std::ostream& out, const std::string& csv_name, const Trajectory& traj) {
    // 1-based gnuplot columns following the CSV layout
    const int c_x = 2;
    const int c_xf = c_x + traj.n_x + traj.n_c;
    const int c_uraw = c_xf + traj.n_u;
    const int c_uapp = c_uraw + traj.n_u;
    const int c_mode = c_uapp + traj.n_u + traj.n_y;
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    out << "set terminal pngcairo size 1200,900\n";
    out << "set output 'trajectory.png'\n";
    out << "set multiplot layout 2,2\n";
    out << fmt::format("set title 'controller output'\nplot '{0}' using 1:{1} with lines title 'raw', "
                       "'' using 1:{2} with lines title 'filtered'\n",
                       csv_name, c_uraw, c_uapp);
    out << fmt::format("set title 'modes'\nplot '{0}' using 1:{1} with steps title 'plant', "
                       "'' using 1:{2} with steps title 'controller'\n",
                       csv_name, c_mode, c_mode + 1);
    if (traj.n_x >= 2) {
        out << fmt::format("set title 'phase portrait'\nplot '{0}' using {1}:{2} with lines notitle\n", csv_name,
                           c_x, c_x + 1);
    } else {
        out << fmt::format("set title 'state'\nplot '{0}' using 1:{1} with lines\n", csv_name, c_x);
    }
    out << "set title 'state'\nplot";
    for (int k = 0; k < traj.n_x; ++k)
        out << fmt::format("{} '{}' using 1:{} with lines", k ? "," : "", csv_name, c_x + k);
    out << "\nunset multiplot\n";
}

} // namespace switchsynth
