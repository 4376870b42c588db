#pragma once

#include "switchsynth/config.hpp"
#include "switchsynth/lmi.hpp"
#include "switchsynth/model.hpp"

#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace switchsynth {

enum class FeasibilityStatus { Feasible, Infeasible, IterationLimit };

[[nodiscard]] const char* to_string(FeasibilityStatus status) noexcept;

struct FeasibilityResult {
    Vector v;
    std::vector<double> constraint_max_eig;  // unscaled, at v
    double margin = 0.0;                     // -max_k lambda_max
    int iterations = 0;
    FeasibilityStatus status = FeasibilityStatus::IterationLimit;
};

// max_k lambda_max(F_k(v)) without scaling.
[[nodiscard]] double max_violation(const LmiProblem& problem, const Vector& v);

// Starting point P_i = I, R_i = I, S_i = 0 plus seeded noise.
[[nodiscard]] Vector default_initial_point(const DecisionLayout& layout, const SolverOptions& opts);

// Minimizes max_k s_k lambda_max(F_k(v)) with s_k = 1/(1 + ||F0_k||_F) by
// subgradient steps toward an adaptive target level. Stops once every
// unscaled constraint has lambda_max <= -delta. Infeasible is reported when
// the target gap collapses without reaching -delta; the best point is kept.
[[nodiscard]] FeasibilityResult solve_feasibility(const LmiProblem& problem, double delta, const SolverOptions& opts,
                                                  std::ostream* trace = nullptr,
                                                  const std::optional<Vector>& initial = std::nullopt);

// Frobenius-nearest positive semidefinite matrix.
[[nodiscard]] Matrix psd_project(const Matrix& symmetric);

struct RecoveredGains {
    ControllerGains gains;
    std::vector<double> r_condition;
    std::vector<double> residual;  // ||R K - S||_F / max(1, ||S||_F)
};

// K_i = R_i^{-1} S_i via LU; throws Error(Numerical) if cond(R_i) > 1e12.
[[nodiscard]] RecoveredGains recover_gains(const Vector& v, const DecisionLayout& layout, int n_c, int n_u, int n_y);

struct Certificate {
    Theorem theorem = Theorem::Stability;
    std::vector<Matrix> P;
    std::vector<Matrix> P_tilde;
    std::vector<Matrix> R;
    std::vector<Matrix> S;
    Matrix Q_aug;
    Matrix Q_sqrt;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> lambda_min;
    std::vector<double> lambda_max;
    double tau_a_star = 0.0;  // NaN when the bound is undefined
    std::string tau_a_note;
    double gamma = 0.0;
    double gamma_s = 0.0;     // NaN for the stability theorem
    double delta = 0.0;
    double margin = 0.0;
    FeasibilityStatus status = FeasibilityStatus::IterationLimit;
    std::vector<std::string> labels;
    std::vector<double> constraint_max_eig;
    std::vector<double> gain_condition;
    ScalarCheck scalar;
    bool as_printed_weight = false;  // Q != I
    // scalars the downstream checks need
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 1.0;
    double tau_d = 0.0;
    double N0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double T = 0.0;
    double d = 0.0;

    [[nodiscard]] bool certified() const noexcept {
        return status == FeasibilityStatus::Feasible && scalar.holds && std::isfinite(tau_a_star);
    }
};

[[nodiscard]] Certificate extract_certificate(const FeasibilityResult& result, const LmiProblem& problem,
                                              const SynthesisConfig& cfg, const std::vector<double>& gain_condition = {});

struct SynthesisOutcome {
    FeasibilityResult result;
    Certificate certificate;
    std::optional<ControllerGains> gains;  // present when R is well conditioned
    std::string gain_error;
    int solves = 0;
    double gamma = 0.0;  // gamma used for the final solve
};

// Assemble, solve, recover gains, post-check the scalar condition and, if
// only that fails, retry with eigenvalue boxes on P. With bisect_gamma the
// smallest feasible gamma found by bisection is used.
[[nodiscard]] SynthesisOutcome synthesize(const SwitchedPlant& plant, const FilterSpec& filter, int n_c,
                                          const SynthesisConfig& cfg, std::ostream* trace = nullptr);

} // namespace switchsynth
