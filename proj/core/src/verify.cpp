#include "switchsynth/verify.hpp"

#include "switchsynth/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <random>
#include <thread>

namespace switchsynth {

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

namespace {

constexpr double kTimeSlack = 1e-12;

FiniteTimeReport finite_time_core(const Trajectory& traj, const Matrix& Q_aug, double c1, double c2, double T) {
    FiniteTimeReport rep;
    if (traj.size() == 0) {
        rep.verdict = Verdict::Pass;
        rep.margin = c2;
        rep.plant_margin = c2;
        return rep;
    }
    if (Q_aug.rows() != traj.x_a.front().size())
        throw Error(ErrorKind::Dimension, "verify", "Q_aug does not match the augmented state");
    const Matrix Q_plant = Q_aug.topLeftCorner(traj.n_x, traj.n_x);
    rep.initial_energy = traj.x_a.front().dot(Q_aug * traj.x_a.front());
    if (!(rep.initial_energy < c1)) {
        rep.verdict = Verdict::NotApplicable;
        rep.reason = fmt::format("initial energy {:.6g} is not below c1 = {:.6g}", rep.initial_energy, c1);
        return rep;
    }
    auto visit = [&](double t, const Vector& xa) {
        const double e = xa.dot(Q_aug * xa);
        const Vector x = xa.head(traj.n_x);
        rep.plant_max_energy = std::max(rep.plant_max_energy, x.dot(Q_plant * x));
        if (e > rep.max_energy)
            rep.max_energy = e;
        if (!(e < c2) && rep.first_violation_time < 0.0)
            rep.first_violation_time = t;
    };
    for (std::size_t k = 0; k < traj.size(); ++k)
        if (traj.t[k] <= T + kTimeSlack)
            visit(traj.t[k], traj.x_a[k]);
    for (const auto& ev : traj.events)
        if (ev.t <= T + kTimeSlack)
            visit(ev.t, ev.xa_before);
    rep.margin = c2 - rep.max_energy;
    rep.plant_margin = c2 - rep.plant_max_energy;
    rep.verdict = rep.first_violation_time < 0.0 ? Verdict::Pass : Verdict::Fail;
    return rep;
}

double energy_at(const std::vector<double>& t, const std::vector<double>& integral, double T) {
    double value = 0.0;
    for (std::size_t k = 0; k < t.size() && t[k] <= T + kTimeSlack; ++k)
        value = integral[k];
    return value;
}

} // namespace

FiniteTimeReport check_finite_time_stable(const Trajectory& traj, const Matrix& Q_aug, double c1, double c2, double T) {
    return finite_time_core(traj, Q_aug, c1, c2, T);
}

FiniteTimeReport check_finite_time_bounded(const Trajectory& traj, const Matrix& Q_aug, double c1, double c2, double T,
                                           double d) {
    const double wtw = traj.size() ? energy_at(traj.t, traj.int_wtw, T) : 0.0;
    if (!(wtw <= d)) {
        FiniteTimeReport rep;
        rep.verdict = Verdict::NotApplicable;
        rep.disturbance_energy = wtw;
        rep.reason = fmt::format("disturbance energy {:.6g} exceeds d = {:.6g}", wtw, d);
        return rep;
    }
    FiniteTimeReport rep = finite_time_core(traj, Q_aug, c1, c2, T);
    rep.disturbance_energy = wtw;
    return rep;
}

HinfReport check_hinf(const Trajectory& traj, double gamma_s) {
    HinfReport rep;
    rep.gamma_s = gamma_s;
    if (traj.size() == 0)
        throw Error(ErrorKind::InvalidArgument, "verify", "empty trajectory");
    rep.disturbance_energy = traj.int_wtw.back();
    rep.output_energy = traj.int_yty.back();
    if (!(rep.disturbance_energy > 0.0))
        throw Error(ErrorKind::InvalidArgument, "verify", "disturbance energy is zero; the ratio is undefined");
    rep.ratio = std::sqrt(rep.output_energy / rep.disturbance_energy);
    if (traj.x_a.front().cwiseAbs().maxCoeff() != 0.0) {
        rep.verdict = Verdict::NotApplicable;
        rep.reason = "initial augmented state is not zero";
        return rep;
    }
    rep.verdict = rep.output_energy <= gamma_s * gamma_s * rep.disturbance_energy ? Verdict::Pass : Verdict::Fail;
    return rep;
}

RateReport check_rate_conditions(const Trajectory& traj, const std::vector<Matrix>& P_tilde, double alpha, double beta,
                                 double gamma, double tol) {
    const std::vector<LyapunovSample> series = lyapunov_series(traj, P_tilde);
    RateReport rep;
    double max_v = 0.0;
    for (const auto& s : series)
        max_v = std::max(max_v, s.V);
    rep.tolerance = tol >= 0.0 ? tol : 1e-3 * max_v;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        const bool mismatched = s.plant_mode != s.controller_mode;
        const double bound = (mismatched ? beta : -alpha) * s.V + gamma * gamma * s.wtw;
        const double excess = s.dV - bound;
        rep.worst_excess = std::max(rep.worst_excess, excess);
        ++rep.samples_checked;
        if (excess > rep.tolerance) {
            rep.pass = false;
            if (rep.violations.size() < 32)
                rep.violations.push_back({s.t, mismatched, excess});
        }
    }
    return rep;
}

JumpReport check_jump_condition(const Trajectory& traj, const std::vector<Matrix>& P_tilde, double mu) {
    JumpReport rep;
    for (const auto& ev : traj.events) {
        if (!ev.controller_switch)
            continue;
        const Matrix& p_old = P_tilde.at(static_cast<std::size_t>(ev.controller_before));
        const Matrix& p_new = P_tilde.at(static_cast<std::size_t>(ev.controller_after));
        const double v_old = ev.xa_before.dot(p_old * ev.xa_before);
        const double v_new = ev.xa_before.dot(p_new * ev.xa_before);
        JumpEvent je;
        je.t = ev.t;
        je.from = ev.controller_before;
        je.to = ev.controller_after;
        if (v_old > 0.0)
            je.ratio = v_new / v_old;
        else
            je.ratio = v_new > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        je.pass = je.ratio <= mu * (1.0 + 1e-9);
        rep.pass = rep.pass && je.pass;
        rep.worst_ratio = std::max(rep.worst_ratio, je.ratio);
        rep.events.push_back(je);
    }
    return rep;
}

Lemma1Report lemma1_equivalence_probe(const Matrix& W, const Matrix& X, const Matrix& Y, const Matrix& Z, double eps,
                                      int trials, std::uint64_t seed) {
    const Eigen::Index n = W.rows();
    const Eigen::Index k = Z.rows();
    if (W.cols() != n || X.rows() != k || X.cols() != n || Y.rows() != k || Y.cols() != n || Z.cols() != k)
        throw Error(ErrorKind::Dimension, "verify", "lemma probe: incompatible dimensions");
    if (relative_asymmetry(W) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "verify", "lemma probe: W must be symmetric");

    Lemma1Report rep;
    const Matrix sum = W + X.transpose() * Y + Y.transpose() * X;
    const bool w_neg = max_eigenvalue(W) < 0.0;
    const bool sum_neg = max_eigenvalue(0.5 * (sum + sum.transpose())) < 0.0;
    rep.second_condition_at_base = w_neg && sum_neg;

    auto probe = [&](const Matrix& z, double e) {
        Matrix block(n + k, n + k);
        const Matrix off = Y - e * z * X;
        block << W, off.transpose(), off, e * (z + z.transpose());
        ++rep.trials;
        if (max_eigenvalue(0.5 * (block + block.transpose())) < 0.0) {
            ++rep.first_condition_held;
            if (!(w_neg && sum_neg))
                ++rep.counterexamples;
        }
    };

    probe(Z, eps);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Matrix dz(k, k);
        for (Eigen::Index r = 0; r < k; ++r)
            for (Eigen::Index c = 0; c < k; ++c)
                dz(r, c) = gauss(rng);
        probe(Z + dz, eps * std::exp(gauss(rng)));
    }
    return rep;
}

Matrix sigma_matrix(const Matrix& A_cl, const Matrix& P_tilde) {
    return A_cl.transpose() * P_tilde + P_tilde * A_cl;
}

Matrix xi_matrix(const Matrix& A_cl, const Matrix& G_cl, const TildeMatrices& t, const Matrix& P_tilde, double coef,
                 double gamma) {
    const Eigen::Index N = A_cl.rows();
    const Eigen::Index n_w = G_cl.cols();
    const Matrix& Ca = t.C_out;
    Matrix xi(N + n_w, N + n_w);
    const Matrix top_right = P_tilde * G_cl + Ca.transpose() * t.E_out;
    xi << sigma_matrix(A_cl, P_tilde) + coef * P_tilde + Ca.transpose() * Ca, top_right, top_right.transpose(),
        t.E_out.transpose() * t.E_out - gamma * gamma * Matrix::Identity(n_w, n_w);
    return xi;
}

ImplicationReport implication_check(const AugmentedSystem& sys, const Certificate& cert, double alpha, double beta,
                                    double gamma, bool with_disturbance) {
    ImplicationReport rep;
    rep.worst_sync = -std::numeric_limits<double>::infinity();
    rep.worst_async = -std::numeric_limits<double>::infinity();
    const std::size_t s = sys.A_sync.size();
    if (cert.P_tilde.size() != s)
        throw Error(ErrorKind::Dimension, "verify", "certificate and system disagree on the mode count");
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
            const Matrix& Pt = cert.P_tilde[j];
            const double coef = i == j ? alpha : -beta;
            Matrix m = with_disturbance ? xi_matrix(sys.a(i, j), sys.g(i, j), sys.tilde[i], Pt, coef, gamma)
                                        : Matrix(sigma_matrix(sys.a(i, j), Pt) + coef * Pt);
            const double lam = max_eigenvalue(0.5 * (m + m.transpose()));
            if (i == j)
                rep.worst_sync = std::max(rep.worst_sync, lam);
            else
                rep.worst_async = std::max(rep.worst_async, lam);
        }
    }
    return rep;
}

namespace {

// Re-derives the stored inequalities from the matrices alone, without trusting the solver's margin.
CheckEntry recheck_matrices(const SwitchedPlant& plant, const ControllerGains& gains, const FilterSpec& filter,
                            const Certificate& cert) {
    CheckEntry e{"matrix-recheck", true, 0.0, {}};
    const AugmentedSystem sys = build_augmented(plant, gains, filter);
    if (cert.P_tilde.size() != sys.A_sync.size() || cert.P_tilde.front().rows() != sys.A_sync.front().rows()) {
        e.pass = false;
        e.margin = -std::numeric_limits<double>::infinity();
        e.details.push_back("certificate matrices do not match the closed loop");
        return e;
    }
    double scale = 1.0;
    for (const auto& P : cert.P_tilde)
        scale = std::max(scale, P.norm());
    const double tol = 1e-8 * scale;

    double worst = -std::numeric_limits<double>::infinity();
    auto note = [&](double lam, const std::string& what) {
        worst = std::max(worst, lam);
        if (lam > tol)
            e.details.push_back(fmt::format("{}: max eigenvalue {:.6g}", what, lam));
    };
    for (std::size_t i = 0; i < cert.P_tilde.size(); ++i) {
        note(-min_eigenvalue(cert.P_tilde[i]), fmt::format("-P[{}]", i));
        for (std::size_t j = 0; j < cert.P_tilde.size(); ++j)
            if (i != j)
                note(max_eigenvalue(cert.P_tilde[i] - cert.mu * cert.P_tilde[j]), fmt::format("P[{}] - mu P[{}]", i, j));
    }
    const bool with_w = cert.theorem != Theorem::Stability;
    const ImplicationReport ir = implication_check(sys, cert, cert.alpha, cert.beta, with_w ? cert.gamma : 0.0, with_w);
    note(ir.worst_sync, "synchronous rate");
    note(ir.worst_async, "asynchronous rate");
    e.margin = -worst;
    e.pass = worst <= tol;
    return e;
}

constexpr double inf = std::numeric_limits<double>::infinity();

struct SeedChecks {
    CheckEntry adt{"", true, inf, {}};
    CheckEntry ft{"", true, inf, {}};
    CheckEntry jump{"", true, inf, {}};
    CheckEntry rate{"", true, inf, {}};
    CheckEntry bump{"", true, inf, {}};
};

void merge_into(CheckEntry& total, const CheckEntry& part) {
    total.pass = total.pass && part.pass;
    total.margin = std::min(total.margin, part.margin);
    total.details.insert(total.details.end(), part.details.begin(), part.details.end());
}

} // namespace

bool PipelineReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckEntry& c) { return c.pass; });
}

PipelineReport verify_certificate(const SwitchedPlant& plant, const ControllerGains& gains, const FilterSpec& filter,
                                  const Certificate& cert, const SimulationPlan& plan) {
    PipelineReport rep;
    rep.checks.push_back({"lmi-feasibility", cert.status == FeasibilityStatus::Feasible && cert.margin >= cert.delta,
                          cert.margin, {fmt::format("status {}", to_string(cert.status))}});
    rep.checks.push_back({"scalar-condition", cert.scalar.holds, cert.scalar.slack, {}});
    const bool have_bound = std::isfinite(cert.tau_a_star) && cert.tau_a_star >= 0.0;
    rep.checks.push_back({"dwell-time-bound", have_bound, cert.tau_a_star,
                          have_bound ? std::vector<std::string>{} : std::vector<std::string>{cert.tau_a_note}});
    rep.checks.push_back(recheck_matrices(plant, gains, filter, cert));
    if (plan.seeds <= 0)
        return rep;
    if (!have_bound) {
        rep.checks.push_back({"simulation", false, 0.0, {"no dwell-time bound; simulations skipped"}});
        return rep;
    }

    const int S = static_cast<int>(plant.mode_count());
    const double h = plan.h > 0.0 ? plan.h : default_step(cert.tau_d);
    // Ensures positive tau_a and the N0 = 0 corner still switches never.
    const double tau_a = std::max(plan.tau_a_factor * cert.tau_a_star, 1e-9);
    GeneratorOptions gen;
    gen.min_gap = cert.tau_d + 5.0 * h;

    const double rate_gamma = cert.theorem == Theorem::Stability ? 0.0 : cert.gamma;
    const std::string ft_stage = cert.theorem == Theorem::HInf ? "hinf" : "finite-time";

    // One slot per seed; workers fill disjoint slots and the merge below runs in seed order.
    std::vector<SeedChecks> slots(static_cast<std::size_t>(plan.seeds));
    auto run_seed = [&](std::size_t k) {
        SeedChecks& out = slots[k];
        const std::uint64_t seed = plan.seed_base + k;
        const SwitchingSignal sig = generate_adt_signal(tau_a, cert.N0, cert.T, S, seed, gen);
        const AdtValidation av = validate_adt(sig, tau_a, cert.N0);
        out.adt.margin = 0.0 - av.excess;
        if (!av.ok) {
            out.adt.pass = false;
            out.adt.details.push_back(
                fmt::format("seed {}: window [{}, {}] exceeds its allowance", seed, av.first, av.last));
        }
        const DelayedSignal ds = delay_signal(sig, cert.tau_d, plan.delay_mode, seed);
        SimulationInput in;
        in.h = h;
        if (plan.zero_initial) {
            in.x0 = Vector::Zero(plant.n_x());
            in.xf0 = Vector::Zero(plant.n_u());
        } else {
            in.x0 = plan.x0;
        }
        Trajectory traj;
        try {
            traj = simulate(plant, gains, filter, ds, plan.disturbance, in, &cert.P_tilde);
        } catch (const Error& e) {
            out.ft.pass = false;
            out.ft.details.push_back(fmt::format("seed {}: {}", seed, e.what()));
            return;
        }

        if (cert.theorem == Theorem::HInf) {
            const HinfReport hr = check_hinf(traj, cert.gamma_s);
            out.ft.margin = cert.gamma_s - hr.ratio;
            if (hr.verdict != Verdict::Pass) {
                out.ft.pass = false;
                out.ft.details.push_back(fmt::format("seed {}: ratio {:.6g} vs gamma_s {:.6g} ({})", seed, hr.ratio,
                                                     cert.gamma_s, to_string(hr.verdict)));
            }
        } else {
            const FiniteTimeReport fr =
                cert.theorem == Theorem::Stability
                    ? check_finite_time_stable(traj, cert.Q_aug, cert.c1, cert.c2, cert.T)
                    : check_finite_time_bounded(traj, cert.Q_aug, cert.c1, cert.c2, cert.T, cert.d);
            out.ft.margin = fr.margin;
            if (fr.verdict != Verdict::Pass) {
                out.ft.pass = false;
                out.ft.details.push_back(fmt::format("seed {}: {} max energy {:.6g} {}", seed, to_string(fr.verdict),
                                                     fr.max_energy, fr.reason));
            }
        }

        const JumpReport jr = check_jump_condition(traj, cert.P_tilde, cert.mu);
        out.jump.margin = cert.mu - jr.worst_ratio;
        if (!jr.pass) {
            out.jump.pass = false;
            out.jump.details.push_back(
                fmt::format("seed {}: worst ratio {:.6g} > mu {:.6g}", seed, jr.worst_ratio, cert.mu));
        }

        const RateReport rr = check_rate_conditions(traj, cert.P_tilde, cert.alpha, cert.beta, rate_gamma);
        out.rate.margin = rr.tolerance - rr.worst_excess;
        if (!rr.pass) {
            out.rate.pass = false;
            out.rate.details.push_back(fmt::format("seed {}: worst excess {:.6g} over tolerance {:.6g}", seed,
                                                   rr.worst_excess, rr.tolerance));
        }

        for (const auto& b : bumpless_metric(traj)) {
            out.bump.margin = std::min(out.bump.margin, 1e-9 - b.u_applied_jump);
            if (b.u_applied_jump > 1e-9) {
                out.bump.pass = false;
                out.bump.details.push_back(fmt::format("seed {}: applied control jumps {:.3g} at t={:.6g}", seed,
                                                       b.u_applied_jump, b.t));
            }
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(slots.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = next++; k < slots.size(); k = next++)
                        run_seed(k);
                } catch (...) {
                    failures[w] = std::current_exception();
                    next = slots.size();
                }
            });
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    CheckEntry ft{ft_stage, true, inf, {}};
    CheckEntry jump{"jump-condition", true, inf, {}};
    CheckEntry rate{"rate-condition", true, inf, {}};
    CheckEntry bump{"bumpless", true, inf, {}};
    CheckEntry adt{"adt-signal", true, inf, {}};
    for (const SeedChecks& sc : slots) {
        merge_into(adt, sc.adt);
        merge_into(ft, sc.ft);
        merge_into(jump, sc.jump);
        merge_into(rate, sc.rate);
        merge_into(bump, sc.bump);
    }
    for (CheckEntry* c : {&adt, &ft, &jump, &rate, &bump}) {
        if (!std::isfinite(c->margin))
            c->margin = 0.0;
        rep.checks.push_back(std::move(*c));
    }
    return rep;
}

PipelineResult certify_pipeline(const SwitchedPlant& plant, const FilterSpec& filter, int n_c,
                                const SynthesisConfig& cfg, const SimulationPlan& plan) {
    PipelineResult out;
    out.synthesis = synthesize(plant, filter, n_c, cfg);
    if (!out.synthesis.gains) {
        const Certificate& cert = out.synthesis.certificate;
        out.report.checks.push_back({"lmi-feasibility", false, cert.margin, {to_string(cert.status)}});
        out.report.checks.push_back({"gain-recovery", false, 0.0, {out.synthesis.gain_error}});
        return out;
    }
    out.report = verify_certificate(plant, *out.synthesis.gains, filter, out.synthesis.certificate, plan);
    return out;
}

} // namespace switchsynth
