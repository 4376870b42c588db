#pragma once

#include "switchsynth/config.hpp"
#include "switchsynth/linalg.hpp"
#include "switchsynth/model.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace switchsynth {

// Flat coordinates for (P_i, R_i, S_i) of every mode. P_i is stored by its
// upper triangle (row-major), R_i and S_i row-major.
class DecisionLayout {
public:
    DecisionLayout() = default;
    DecisionLayout(std::size_t modes, int N, int m, int s_cols);

    [[nodiscard]] std::size_t modes() const noexcept { return modes_; }
    [[nodiscard]] int N() const noexcept { return N_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] int s_cols() const noexcept { return s_cols_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return per_mode() * static_cast<Eigen::Index>(modes_); }
    [[nodiscard]] Eigen::Index per_mode() const noexcept { return p_size() + r_size() + s_size(); }
    [[nodiscard]] Eigen::Index p_size() const noexcept { return Eigen::Index(N_) * (N_ + 1) / 2; }
    [[nodiscard]] Eigen::Index r_size() const noexcept { return Eigen::Index(m_) * m_; }
    [[nodiscard]] Eigen::Index s_size() const noexcept { return Eigen::Index(m_) * s_cols_; }
    [[nodiscard]] Eigen::Index mode_offset(std::size_t i) const;

    // Coordinate of P_i(r, c); (r, c) and (c, r) share it.
    [[nodiscard]] Eigen::Index p_index(std::size_t i, int r, int c) const;
    [[nodiscard]] Eigen::Index r_index(std::size_t i, int r, int c) const;
    [[nodiscard]] Eigen::Index s_index(std::size_t i, int r, int c) const;

    [[nodiscard]] Matrix P(const Vector& v, std::size_t i) const;
    [[nodiscard]] Matrix R(const Vector& v, std::size_t i) const;
    [[nodiscard]] Matrix S(const Vector& v, std::size_t i) const;

    void set_P(Vector& v, std::size_t i, const Matrix& p) const;
    void set_R(Vector& v, std::size_t i, const Matrix& r) const;
    void set_S(Vector& v, std::size_t i, const Matrix& s) const;

private:
    std::size_t modes_ = 0;
    int N_ = 0;
    int m_ = 0;
    int s_cols_ = 0;
};

// F0 + sum_k v_k F_k <= 0, with all matrices symmetric.
struct AffineConstraint {
    std::string label;
    Matrix F0;
    std::vector<std::pair<Eigen::Index, Matrix>> terms;

    [[nodiscard]] Eigen::Index size() const noexcept { return F0.rows(); }
    [[nodiscard]] Matrix evaluate(const Vector& v) const;
};

struct LmiProblem {
    DecisionLayout layout;
    std::vector<AffineConstraint> constraints;
    LiftedWeight weight;  // empty for hand-built problems

    // Number of decision coordinates referenced by the layout or any term.
    [[nodiscard]] Eigen::Index dim() const;
};

// Builds an affine constraint from a map that is affine in v by probing it
// at zero and at each coordinate listed in `coords`.
[[nodiscard]] AffineConstraint affine_from_map(std::string label, const DecisionLayout& layout,
                                               const std::vector<Eigen::Index>& coords,
                                               const std::function<Matrix(const Vector&)>& map);

// Block matrices evaluated at concrete variables. `P` appears where the
// printed entries use the untransformed variable, `P_tilde` elsewhere.
// `coef` is -beta for the asynchronous form and +alpha for the synchronous one.
[[nodiscard]] Matrix phi_matrix(const TildeMatrices& t, const Matrix& P, const Matrix& P_tilde, const Matrix& R,
                                const Matrix& S, double coef, double eps, double rho);
[[nodiscard]] Matrix psi_matrix(const TildeMatrices& t, const Matrix& P, const Matrix& P_tilde, const Matrix& R,
                                const Matrix& S, double coef, double eps, double rho, double gamma);

[[nodiscard]] AffineConstraint assemble_phi_async(std::size_t i, std::size_t j, const TildeMatrices& tilde_i,
                                                  const SynthesisConfig& cfg, const DecisionLayout& layout,
                                                  const Matrix& q_sqrt);
[[nodiscard]] AffineConstraint assemble_phi_sync(std::size_t i, const TildeMatrices& tilde_i,
                                                 const SynthesisConfig& cfg, const DecisionLayout& layout,
                                                 const Matrix& q_sqrt);
[[nodiscard]] AffineConstraint assemble_psi_async(std::size_t i, std::size_t j, const TildeMatrices& tilde_i,
                                                  const SynthesisConfig& cfg, const DecisionLayout& layout,
                                                  const Matrix& q_sqrt);
[[nodiscard]] AffineConstraint assemble_psi_sync(std::size_t i, const TildeMatrices& tilde_i,
                                                 const SynthesisConfig& cfg, const DecisionLayout& layout,
                                                 const Matrix& q_sqrt);

// P_i - mu P_j + margin I <= 0. margin > 0 gives the strict variant.
[[nodiscard]] AffineConstraint assemble_mode_jump(std::size_t i, std::size_t j, double mu,
                                                  const DecisionLayout& layout, double margin = 0.0);
// -P_i + delta I <= 0.
[[nodiscard]] AffineConstraint assemble_positivity(std::size_t i, double delta, const DecisionLayout& layout);
// lo I <= P_i <= hi I as two constraints.
[[nodiscard]] std::vector<AffineConstraint> assemble_eigen_box(std::size_t i, double lo, double hi,
                                                               const DecisionLayout& layout);

struct EigenBox {
    double lo = 0.0;
    double hi = 0.0;
};

// Full constraint set for the configured theorem.
[[nodiscard]] LmiProblem build_problem(const SwitchedPlant& plant, const FilterSpec& filter, int n_c,
                                       const SynthesisConfig& cfg, const EigenBox* box = nullptr);

enum class ScalarKind { FiniteTimeStable, FiniteTimeBounded, HInf };

struct ScalarCheck {
    bool holds = false;
    double slack = 0.0;  // RHS - LHS
};

[[nodiscard]] ScalarCheck check_scalar_condition(ScalarKind kind, double lambda1, double lambda2,
                                                 const SynthesisConfig& cfg);

[[nodiscard]] ScalarKind scalar_kind_for(Theorem theorem) noexcept;

} // namespace switchsynth
