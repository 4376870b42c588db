#pragma once

#include "switchsynth/disturbance.hpp"
#include "switchsynth/sim.hpp"
#include "switchsynth/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace switchsynth {

enum class Verdict { Pass, Fail, NotApplicable };

[[nodiscard]] const char* to_string(Verdict v) noexcept;

struct FiniteTimeReport {
    Verdict verdict = Verdict::NotApplicable;
    std::string reason;
    double initial_energy = 0.0;
    double max_energy = 0.0;          // x_a^T Q_aug x_a, samples and event left limits
    double margin = 0.0;              // c2 - max_energy
    double first_violation_time = -1.0;
    double plant_max_energy = 0.0;    // x^T Q x on the plant block alone
    double plant_margin = 0.0;
    double disturbance_energy = 0.0;
};

[[nodiscard]] FiniteTimeReport check_finite_time_stable(const Trajectory& traj, const Matrix& Q_aug, double c1,
                                                        double c2, double T);
[[nodiscard]] FiniteTimeReport check_finite_time_bounded(const Trajectory& traj, const Matrix& Q_aug, double c1,
                                                         double c2, double T, double d);

struct HinfReport {
    Verdict verdict = Verdict::NotApplicable;
    std::string reason;
    double ratio = 0.0;  // sqrt(int y'y / int w'w)
    double gamma_s = 0.0;
    double output_energy = 0.0;
    double disturbance_energy = 0.0;
};

// Throws Error(InvalidArgument) when the disturbance energy is zero.
[[nodiscard]] HinfReport check_hinf(const Trajectory& traj, double gamma_s);

struct RateViolation {
    double t = 0.0;
    bool mismatched = false;
    double excess = 0.0;
};

struct RateReport {
    bool pass = true;
    double tolerance = 0.0;
    double worst_excess = 0.0;  // max over samples of dV - bound (<= tol passes)
    std::size_t samples_checked = 0;
    std::vector<RateViolation> violations;
};

// tol < 0 selects 1e-3 * max V.
[[nodiscard]] RateReport check_rate_conditions(const Trajectory& traj, const std::vector<Matrix>& P_tilde,
                                               double alpha, double beta, double gamma, double tol = -1.0);

struct JumpEvent {
    double t = 0.0;
    int from = 0;
    int to = 0;
    double ratio = 0.0;
    bool pass = true;
};

struct JumpReport {
    bool pass = true;
    double worst_ratio = 0.0;
    std::vector<JumpEvent> events;
};

// At each controller switch: x_a^T P~_new x_a / x_a^T P~_old x_a at the
// pre-switch augmented state; passes iff <= mu (1 + 1e-9).
[[nodiscard]] JumpReport check_jump_condition(const Trajectory& traj, const std::vector<Matrix>& P_tilde, double mu);

struct Lemma1Report {
    int trials = 0;
    int first_condition_held = 0;
    int counterexamples = 0;
    bool second_condition_at_base = false;
};

// Evaluates the block condition at (eps, Z) and at `trials` seeded
// perturbations of it; every time it holds, W < 0 and W + X'Y + Y'X < 0
// are checked. Any failure counts as a counterexample.
[[nodiscard]] Lemma1Report lemma1_equivalence_probe(const Matrix& W, const Matrix& X, const Matrix& Y, const Matrix& Z,
                                                    double eps, int trials, std::uint64_t seed = 0);

// Coupled Lyapunov matrices for recovered gains (plant i, controller j).
[[nodiscard]] Matrix sigma_matrix(const Matrix& A_cl, const Matrix& P_tilde);
[[nodiscard]] Matrix xi_matrix(const Matrix& A_cl, const Matrix& G_cl, const TildeMatrices& t, const Matrix& P_tilde,
                               double coef, double gamma);

struct ImplicationReport {
    double worst_sync = 0.0;   // max_i lambda_max of the synchronous form
    double worst_async = 0.0;  // max_{i != j} lambda_max of the asynchronous form
};

// Closed-loop rate inequalities: Sigma_i + alpha P~_i and Sigma_ij - beta P~_j.
// With `with_disturbance` the Xi forms are used instead.
[[nodiscard]] ImplicationReport implication_check(const AugmentedSystem& sys, const Certificate& cert, double alpha,
                                                  double beta, double gamma, bool with_disturbance);

struct SimulationPlan {
    Vector x0;
    Disturbance disturbance = Disturbance::zero(1);
    double h = 0.0;
    double tau_a_factor = 1.05;
    double tau_a = 0.0;  // explicit dwell time for standalone simulation; 0 derives it from a certificate
    DelayMode delay_mode = DelayMode::Constant;
    int seeds = 0;
    std::uint64_t seed_base = 0;
    bool zero_initial = false;  // H-infinity run from rest
};

struct CheckEntry {
    std::string stage;
    bool pass = false;
    double margin = 0.0;
    std::vector<std::string> details;
};

struct PipelineReport {
    std::vector<CheckEntry> checks;
    [[nodiscard]] bool pass() const;
};

// Simulation/definition half of the pipeline for already synthesized gains.
[[nodiscard]] PipelineReport verify_certificate(const SwitchedPlant& plant, const ControllerGains& gains,
                                                const FilterSpec& filter, const Certificate& cert,
                                                const SimulationPlan& plan);

struct PipelineResult {
    SynthesisOutcome synthesis;
    PipelineReport report;
};

// Synthesis, certificate checks and seeded simulations in one call.
[[nodiscard]] PipelineResult certify_pipeline(const SwitchedPlant& plant, const FilterSpec& filter, int n_c,
                                              const SynthesisConfig& cfg, const SimulationPlan& plan);

} // namespace switchsynth
