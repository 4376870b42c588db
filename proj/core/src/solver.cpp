#include "switchsynth/solver.hpp"

#include "switchsynth/error.hpp"
#include "switchsynth/switching.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <random>
#include <spdlog/spdlog.h>

namespace switchsynth {

const char* to_string(FeasibilityStatus status) noexcept {
    switch (status) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::Infeasible: return "infeasible";
    case FeasibilityStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

double max_violation(const LmiProblem& problem, const Vector& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : problem.constraints)
        worst = std::max(worst, max_eigenvalue(c.evaluate(v)));
    return worst;
}

Vector default_initial_point(const DecisionLayout& layout, const SolverOptions& opts) {
    Vector v = Vector::Zero(layout.dim());
    for (std::size_t i = 0; i < layout.modes(); ++i) {
        layout.set_P(v, i, Matrix::Identity(layout.N(), layout.N()));
        layout.set_R(v, i, Matrix::Identity(layout.m(), layout.m()));
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index k = 0; k < v.size(); ++k)
        v(k) += opts.init_noise * noise(rng);
    return v;
}

namespace {

struct Evaluation {
    double scaled = 0.0;    // max_k s_k lambda_max
    double unscaled = 0.0;  // max_k lambda_max
    Vector subgradient;
};

Evaluation evaluate(const LmiProblem& problem, const std::vector<double>& scale, const Vector& v) {
    Evaluation out;
    out.scaled = -std::numeric_limits<double>::infinity();
    out.unscaled = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    Vector top;
    // Fixed constraint order keeps the argmax, and hence the iterate, reproducible.
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
        const TopEigen e = max_eigen(problem.constraints[k].evaluate(v));
        out.unscaled = std::max(out.unscaled, e.value);
        const double s = scale[k] * e.value;
        if (s > out.scaled) {
            out.scaled = s;
            arg = k;
            top = e.vector;
        }
    }
    out.subgradient = Vector::Zero(v.size());
    for (const auto& [idx, f] : problem.constraints[arg].terms)
        out.subgradient(idx) = scale[arg] * top.dot(f * top);
    return out;
}

} // namespace

FeasibilityResult solve_feasibility(const LmiProblem& problem, double delta, const SolverOptions& opts,
                                    std::ostream* trace, const std::optional<Vector>& initial) {
    if (problem.constraints.empty())
        throw Error(ErrorKind::InvalidArgument, "solver", "problem has no constraints");
    if (!(delta > 0.0))
        throw Error(ErrorKind::InvalidArgument, "solver", "delta must be positive");

    const Eigen::Index n = problem.dim();
    std::vector<double> scale;
    for (const auto& c : problem.constraints)
        scale.push_back(1.0 / (1.0 + c.F0.norm()));

    Vector v;
    if (initial) {
        if (initial->size() != n)
            throw Error(ErrorKind::Dimension, "solver", "initial point has the wrong size");
        v = *initial;
    } else if (problem.layout.modes() > 0 && problem.layout.dim() == n) {
        v = default_initial_point(problem.layout, opts);
    } else {
        v = Vector::Zero(n);
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (Eigen::Index k = 0; k < n; ++k)
            v(k) += opts.init_noise * noise(rng);
    }

    if (trace)
        *trace << "iter,f,step_size\n";

    FeasibilityResult res;
    res.status = FeasibilityStatus::IterationLimit;
    double f_best = std::numeric_limits<double>::infinity();
    Vector v_best = v;
    double gap = 1.0;
    int stall = 0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Evaluation ev = evaluate(problem, scale, v);
        if (ev.unscaled <= -delta) {
            f_best = ev.scaled;
            v_best = v;
            res.status = FeasibilityStatus::Feasible;
            if (trace)
                *trace << it << ',' << ev.scaled << ",0\n";
            break;
        }
        if (ev.scaled < f_best) {
            f_best = ev.scaled;
            v_best = v;
            stall = 0;
        } else if (++stall >= opts.stall_window) {
            // Level too optimistic: tighten it and restart from the best point.
            gap *= 0.5;
            stall = 0;
            v = v_best;
            if (gap < 1e-10 * std::max(1.0, std::fabs(f_best))) {
                res.status = FeasibilityStatus::Infeasible;
                break;
            }
            continue;
        }
        const double g2 = ev.subgradient.squaredNorm();
        if (g2 == 0.0) {
            // Constant objective at the active constraint: nothing can lower it.
            res.status = FeasibilityStatus::Infeasible;
            break;
        }
        const double target = f_best - gap;
        const double step = (ev.scaled - target) / g2;
        if (trace)
            *trace << it << ',' << ev.scaled << ',' << step << '\n';
        v -= step * ev.subgradient;
        if (!v.allFinite())
            throw Error(ErrorKind::Numerical, "solver", "iterate became non-finite");
    }

    res.v = v_best;
    res.iterations = it;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : problem.constraints) {
        const double lam = max_eigenvalue(c.evaluate(res.v));
        res.constraint_max_eig.push_back(lam);
        worst = std::max(worst, lam);
    }
    res.margin = -worst;
    if (res.status == FeasibilityStatus::Feasible && !(res.margin >= delta))
        res.status = FeasibilityStatus::IterationLimit;
    spdlog::debug("solver: status={} iterations={} margin={:.6g}", to_string(res.status), res.iterations, res.margin);
    return res;
}

Matrix psd_project(const Matrix& symmetric) {
    if (relative_asymmetry(symmetric) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "solver", "psd_project needs a symmetric matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, "solver", "eigensolver did not converge");
    const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

RecoveredGains recover_gains(const Vector& v, const DecisionLayout& layout, int n_c, int n_u, int n_y) {
    if (layout.m() != n_c + n_u || layout.s_cols() != n_c + n_y)
        throw Error(ErrorKind::Dimension, "solver", "layout does not match the controller dimensions");
    std::vector<Matrix> packed;
    std::vector<double> cond;
    std::vector<double> residual;
    for (std::size_t i = 0; i < layout.modes(); ++i) {
        const Matrix R = layout.R(v, i);
        const Matrix S = layout.S(v, i);
        const double c = condition_number(R);
        if (!(c <= 1e12)) {
            throw Error(ErrorKind::Numerical, "solver",
                        "R_" + std::to_string(i) + " has condition number " + std::to_string(c) +
                            "; try a larger delta");
        }
        Matrix K = R.partialPivLu().solve(S);
        residual.push_back((R * K - S).norm() / std::max(1.0, S.norm()));
        cond.push_back(c);
        packed.push_back(std::move(K));
    }
    return {ControllerGains(std::move(packed), n_c, n_u, n_y), std::move(cond), std::move(residual)};
}

Certificate extract_certificate(const FeasibilityResult& result, const LmiProblem& problem,
                                const SynthesisConfig& cfg, const std::vector<double>& gain_condition) {
    const DecisionLayout& layout = problem.layout;
    Certificate cert;
    cert.theorem = cfg.theorem;
    cert.delta = cfg.delta;
    cert.margin = result.margin;
    cert.status = result.status;
    cert.gamma = cfg.gamma;
    cert.gain_condition = gain_condition;
    cert.alpha = cfg.alpha;
    cert.beta = cfg.beta;
    cert.mu = cfg.mu;
    cert.tau_d = cfg.tau_d;
    cert.N0 = cfg.N0;
    cert.c1 = cfg.c1;
    cert.c2 = cfg.c2;
    cert.T = cfg.T;
    cert.d = cfg.d;
    cert.constraint_max_eig = result.constraint_max_eig;
    for (const auto& c : problem.constraints)
        cert.labels.push_back(c.label);

    const Matrix id = Matrix::Identity(layout.N(), layout.N());
    cert.Q_aug = problem.weight.Q.size() ? problem.weight.Q : id;
    cert.Q_sqrt = problem.weight.sqrt.size() ? problem.weight.sqrt : id;
    cert.as_printed_weight = (cert.Q_aug - id).cwiseAbs().maxCoeff() != 0.0;

    cert.lambda1 = std::numeric_limits<double>::infinity();
    cert.lambda2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < layout.modes(); ++i) {
        Matrix P = layout.P(result.v, i);
        cert.P_tilde.push_back(cert.Q_sqrt * P * cert.Q_sqrt);
        cert.R.push_back(layout.R(result.v, i));
        cert.S.push_back(layout.S(result.v, i));
        const double lo = min_eigenvalue(P);
        const double hi = max_eigenvalue(P);
        cert.lambda_min.push_back(lo);
        cert.lambda_max.push_back(hi);
        cert.lambda1 = std::min(cert.lambda1, lo);
        cert.lambda2 = std::max(cert.lambda2, hi);
        cert.P.push_back(std::move(P));
    }

    cert.gamma_s = cfg.theorem == Theorem::Stability ? std::numeric_limits<double>::quiet_NaN() : gamma_s(cfg);
    cert.tau_a_star = std::numeric_limits<double>::quiet_NaN();
    if (!(cert.lambda1 > 0.0)) {
        cert.scalar = {false, -std::numeric_limits<double>::infinity()};
        cert.tau_a_note = "P is not positive definite";
        return cert;
    }
    cert.scalar = check_scalar_condition(scalar_kind_for(cfg.theorem), cert.lambda1, cert.lambda2, cfg);
    try {
        switch (cfg.theorem) {
        case Theorem::Stability: cert.tau_a_star = adt_bound_stability(cfg, cert.lambda1, cert.lambda2); break;
        case Theorem::Bounded: cert.tau_a_star = adt_bound_bounded(cfg, cert.lambda1, cert.lambda2); break;
        case Theorem::HInf: cert.tau_a_star = adt_bound_hinf(cfg, cert.lambda1); break;
        }
    } catch (const Error& e) {
        cert.tau_a_note = e.what();
    }
    return cert;
}

namespace {

struct Attempt {
    LmiProblem problem;
    FeasibilityResult result;
};

Attempt attempt(const SwitchedPlant& plant, const FilterSpec& filter, int n_c, const SynthesisConfig& cfg,
                const EigenBox* box, std::ostream* trace) {
    Attempt a{build_problem(plant, filter, n_c, cfg, box), {}};
    a.result = solve_feasibility(a.problem, cfg.delta, cfg.solver, trace);
    return a;
}

} // namespace

SynthesisOutcome synthesize(const SwitchedPlant& plant, const FilterSpec& filter, int n_c, const SynthesisConfig& cfg,
                            std::ostream* trace) {
    cfg.validate();
    SynthesisConfig work = cfg;
    SynthesisOutcome out;

    Attempt best = attempt(plant, filter, n_c, work, nullptr, trace);
    out.solves = 1;

    if (cfg.bisect_gamma && cfg.theorem != Theorem::Stability) {
        // Grow gamma until feasible, then bisect down; assumes monotone feasibility.
        double hi = work.gamma;
        int grow = 0;
        while (best.result.status != FeasibilityStatus::Feasible && grow < 10) {
            hi *= 2.0;
            work.gamma = hi;
            best = attempt(plant, filter, n_c, work, nullptr, nullptr);
            ++out.solves;
            ++grow;
        }
        if (best.result.status == FeasibilityStatus::Feasible) {
            double lo = 0.0;
            for (int k = 0; k < 12; ++k) {
                const double mid = 0.5 * (lo + hi);
                SynthesisConfig probe = work;
                probe.gamma = mid;
                Attempt a = attempt(plant, filter, n_c, probe, nullptr, nullptr);
                ++out.solves;
                if (a.result.status == FeasibilityStatus::Feasible) {
                    hi = mid;
                    best = std::move(a);
                } else {
                    lo = mid;
                }
            }
            work.gamma = hi;
        } else {
            work.gamma = cfg.gamma;
        }
    }

    Certificate cert = extract_certificate(best.result, best.problem, work);
    if (best.result.status == FeasibilityStatus::Feasible && !cert.scalar.holds) {
        // Only the scalar condition failed: squeeze the spectrum of P.
        bool done = false;
        for (double lo : {1.0, 10.0, 100.0}) {
            for (double ratio : {100.0, 10.0, 3.0, 1.5, 1.1}) {
                const EigenBox box{lo, lo * ratio};
                Attempt a = attempt(plant, filter, n_c, work, &box, nullptr);
                ++out.solves;
                if (a.result.status != FeasibilityStatus::Feasible)
                    continue;
                Certificate c = extract_certificate(a.result, a.problem, work);
                if (c.scalar.holds) {
                    best = std::move(a);
                    cert = std::move(c);
                    done = true;
                    break;
                }
            }
            if (done)
                break;
        }
    }

    try {
        RecoveredGains rg = recover_gains(best.result.v, best.problem.layout, n_c, plant.n_u(), plant.n_y());
        cert.gain_condition = rg.r_condition;
        out.gains = std::move(rg.gains);
    } catch (const Error& e) {
        out.gain_error = e.what();
    }
    out.result = std::move(best.result);
    out.certificate = std::move(cert);
    out.gamma = work.gamma;
    return out;
}

} // namespace switchsynth
