#include "switchsynth/lmi.hpp"

#include "switchsynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

namespace switchsynth {

DecisionLayout::DecisionLayout(std::size_t modes, int N, int m, int s_cols)
    : modes_(modes), N_(N), m_(m), s_cols_(s_cols) {
    if (modes == 0 || N <= 0 || m <= 0 || s_cols <= 0)
        throw Error(ErrorKind::Dimension, "lmi", "decision layout needs positive sizes");
}

Eigen::Index DecisionLayout::mode_offset(std::size_t i) const {
    if (i >= modes_)
        throw Error(ErrorKind::InvalidArgument, "lmi", "mode " + std::to_string(i) + " out of range");
    return per_mode() * static_cast<Eigen::Index>(i);
}

Eigen::Index DecisionLayout::p_index(std::size_t i, int r, int c) const {
    if (r > c)
        std::swap(r, c);
    // row r of the upper triangle starts after r rows of decreasing length
    const Eigen::Index row_start = Eigen::Index(r) * N_ - Eigen::Index(r) * (r - 1) / 2;
    return mode_offset(i) + row_start + (c - r);
}

Eigen::Index DecisionLayout::r_index(std::size_t i, int r, int c) const {
    return mode_offset(i) + p_size() + Eigen::Index(r) * m_ + c;
}

Eigen::Index DecisionLayout::s_index(std::size_t i, int r, int c) const {
    return mode_offset(i) + p_size() + r_size() + Eigen::Index(r) * s_cols_ + c;
}

Matrix DecisionLayout::P(const Vector& v, std::size_t i) const {
    Matrix p(N_, N_);
    for (int r = 0; r < N_; ++r)
        for (int c = r; c < N_; ++c)
            p(r, c) = p(c, r) = v(p_index(i, r, c));
    return p;
}

Matrix DecisionLayout::R(const Vector& v, std::size_t i) const {
    Matrix out(m_, m_);
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < m_; ++c)
            out(r, c) = v(r_index(i, r, c));
    return out;
}

Matrix DecisionLayout::S(const Vector& v, std::size_t i) const {
    Matrix out(m_, s_cols_);
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < s_cols_; ++c)
            out(r, c) = v(s_index(i, r, c));
    return out;
}

void DecisionLayout::set_P(Vector& v, std::size_t i, const Matrix& p) const {
    for (int r = 0; r < N_; ++r)
        for (int c = r; c < N_; ++c)
            v(p_index(i, r, c)) = 0.5 * (p(r, c) + p(c, r));
}

void DecisionLayout::set_R(Vector& v, std::size_t i, const Matrix& rm) const {
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < m_; ++c)
            v(r_index(i, r, c)) = rm(r, c);
}

void DecisionLayout::set_S(Vector& v, std::size_t i, const Matrix& s) const {
    for (int r = 0; r < m_; ++r)
        for (int c = 0; c < s_cols_; ++c)
            v(s_index(i, r, c)) = s(r, c);
}

Matrix AffineConstraint::evaluate(const Vector& v) const {
    Matrix out = F0;
    for (const auto& [k, f] : terms)
        if (v(k) != 0.0)
            out.noalias() += v(k) * f;
    return out;
}

Eigen::Index LmiProblem::dim() const {
    Eigen::Index n = layout.dim();
    for (const auto& c : constraints)
        for (const auto& term : c.terms)
            n = std::max(n, term.first + 1);
    return n;
}

namespace {

constexpr double kSymmetryTolerance = 1e-9;

std::vector<Eigen::Index> mode_coords(const DecisionLayout& layout, std::size_t i) {
    std::vector<Eigen::Index> out;
    const Eigen::Index base = layout.mode_offset(i);
    for (Eigen::Index k = 0; k < layout.per_mode(); ++k)
        out.push_back(base + k);
    return out;
}

std::vector<Eigen::Index> p_coords(const DecisionLayout& layout, std::size_t i) {
    std::vector<Eigen::Index> out;
    const Eigen::Index base = layout.mode_offset(i);
    for (Eigen::Index k = 0; k < layout.p_size(); ++k)
        out.push_back(base + k);
    return out;
}

void require_square_loop(const TildeMatrices& t) {
    // Products such as I~ C~ need the controller input and output widths to agree.
    if (t.m() != t.C.rows()) {
        throw Error(ErrorKind::Dimension, "lmi",
                    "the block entries need n_u == n_y (controller packing is " + std::to_string(t.m()) + "x" +
                        std::to_string(t.C.rows()) + ")");
    }
}

void require_weights(const SynthesisConfig& cfg) {
    if (!(cfg.eps > 0.0) || !(cfg.rho > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lmi", "eps and rho must be positive");
}

struct MatrixBlocks {
    std::vector<Eigen::Index> widths;
    Matrix out;

    explicit MatrixBlocks(std::vector<Eigen::Index> w) : widths(std::move(w)) {
        Eigen::Index total = 0;
        for (auto x : widths)
            total += x;
        out = Matrix::Zero(total, total);
    }

    Eigen::Index start(std::size_t b) const {
        Eigen::Index s = 0;
        for (std::size_t k = 0; k < b; ++k)
            s += widths[k];
        return s;
    }

    // 1-based block indices; mirrors the off-diagonal block.
    void set(std::size_t r, std::size_t c, const Matrix& m) {
        out.block(start(r - 1), start(c - 1), widths[r - 1], widths[c - 1]) = m;
        if (r != c)
            out.block(start(c - 1), start(r - 1), widths[c - 1], widths[r - 1]) = m.transpose();
    }
};

Matrix phi_11(const TildeMatrices& t, const Matrix& Pt, const Matrix& S, double coef) {
    const Matrix& A = t.A;
    const Matrix& B = t.B;
    const Matrix& C = t.C;
    const Matrix& I = t.I;
    return A.transpose() * Pt + Pt * A + C.transpose() * S.transpose() * B.transpose() + B * S * C +
           A.transpose() * C.transpose() * S.transpose() * I.transpose() + I * S * C * A +
           C.transpose() * S.transpose() * B.transpose() * C.transpose() * I.transpose() + I * C * B * S * C +
           coef * Pt;
}

Matrix p_tilde(const Matrix& q_sqrt, const Matrix& P) { return q_sqrt * P * q_sqrt; }

} // namespace

AffineConstraint affine_from_map(std::string label, const DecisionLayout& layout,
                                 const std::vector<Eigen::Index>& coords,
                                 const std::function<Matrix(const Vector&)>& map) {
    Vector v = Vector::Zero(layout.dim());
    AffineConstraint con;
    con.F0 = symmetrize_checked(map(v), kSymmetryTolerance, label);
    for (Eigen::Index k : coords) {
        v(k) = 1.0;
        Matrix f = symmetrize_checked(map(v), kSymmetryTolerance, label) - con.F0;
        v(k) = 0.0;
        if (f.cwiseAbs().maxCoeff() != 0.0)
            con.terms.emplace_back(k, std::move(f));
    }
    con.label = std::move(label);
    return con;
}

Matrix phi_matrix(const TildeMatrices& t, const Matrix& P, const Matrix& Pt, const Matrix& R, const Matrix& S,
                  double coef, double eps, double rho) {
    require_square_loop(t);
    const Matrix& A = t.A;
    const Matrix& B = t.B;
    const Matrix& C = t.C;
    const Matrix& I = t.I;
    const Eigen::Index N = A.rows();
    const Eigen::Index m = B.cols();
    const Matrix St = S.transpose();
    const Matrix CB = C * B;

    MatrixBlocks blk({N, m, m, m});
    blk.set(1, 1, phi_11(t, Pt, S, coef));
    blk.set(1, 2, P * I - I * R + eps * A.transpose() * C.transpose() * St +
                      eps * C.transpose() * St * B.transpose() * C.transpose());
    blk.set(1, 3, P * B - B * R + eps * C.transpose() * St);
    blk.set(1, 4, I * S * CB - I * CB * R + rho * C.transpose() * St);
    blk.set(2, 2, -eps * R - eps * R.transpose());
    blk.set(2, 4, eps * S * CB - eps * CB * R);
    blk.set(3, 3, -eps * R - eps * R.transpose());
    blk.set(4, 4, -rho * R - rho * R.transpose());
    return blk.out;
}

Matrix psi_matrix(const TildeMatrices& t, const Matrix& P, const Matrix& Pt, const Matrix& R, const Matrix& S,
                  double coef, double eps, double rho, double gamma) {
    require_square_loop(t);
    const Matrix& A = t.A;
    const Matrix& B = t.B;
    const Matrix& C = t.C;
    const Matrix& I = t.I;
    const Matrix& D = t.D;
    const Matrix& E = t.E;
    const Matrix& K = t.K_f;
    const Matrix& Ca = t.C_out;
    const Eigen::Index N = A.rows();
    const Eigen::Index m = B.cols();
    const Eigen::Index n_w = D.cols();
    const Matrix St = S.transpose();
    const Matrix CB = C * B;
    const Matrix CK = C * K;

    MatrixBlocks blk({N, n_w, m, m, m, m, m});
    blk.set(1, 1, phi_11(t, Pt, S, coef) + Ca.transpose() * Ca);
    blk.set(1, 2, Pt * D + K * S * E + I * S * C * D + I * C * K * S * E + Ca.transpose() * t.E_out);
    blk.set(1, 3, P * I - I * R + eps * A.transpose() * C.transpose() * St +
                      eps * C.transpose() * St * B.transpose() * C.transpose());
    blk.set(1, 4, P * B - B * R + eps * C.transpose() * St);
    blk.set(1, 5, P * K - K * R);
    blk.set(1, 6, I * S * CB - I * CB * R + rho * C.transpose() * St);
    blk.set(1, 7, I * S * CK - I * CK * R);
    blk.set(2, 2, t.E_out.transpose() * t.E_out - gamma * gamma * Matrix::Identity(n_w, n_w));
    blk.set(2, 3, eps * D.transpose() * C.transpose() * St + eps * E.transpose() * St * K.transpose() * C.transpose());
    blk.set(2, 5, eps * E.transpose() * St);
    blk.set(2, 7, rho * E.transpose() * St);
    const Matrix eps_diag = -eps * R - eps * R.transpose();
    blk.set(3, 3, eps_diag);
    blk.set(4, 4, eps_diag);
    blk.set(5, 5, eps_diag);
    blk.set(3, 6, eps * S * CB - eps * CB * R);
    blk.set(3, 7, eps * S * CK - eps * CK * R);
    const Matrix rho_diag = -rho * R - rho * R.transpose();
    blk.set(6, 6, rho_diag);
    blk.set(7, 7, rho_diag);
    return blk.out;
}

namespace {

AffineConstraint assemble_block(std::string label, std::size_t var_mode, const TildeMatrices& t, double coef,
                                const SynthesisConfig& cfg, const DecisionLayout& layout, const Matrix& q_sqrt,
                                bool with_disturbance) {
    require_weights(cfg);
    require_square_loop(t);
    if (q_sqrt.rows() != layout.N() || q_sqrt.cols() != layout.N())
        throw Error(ErrorKind::Dimension, "lmi", "weight square root must be N x N");
    auto map = [&](const Vector& v) -> Matrix {
        const Matrix P = layout.P(v, var_mode);
        const Matrix Pt = p_tilde(q_sqrt, P);
        const Matrix R = layout.R(v, var_mode);
        const Matrix S = layout.S(v, var_mode);
        if (with_disturbance)
            return psi_matrix(t, P, Pt, R, S, coef, cfg.eps, cfg.rho, cfg.gamma);
        return phi_matrix(t, P, Pt, R, S, coef, cfg.eps, cfg.rho);
    };
    return affine_from_map(std::move(label), layout, mode_coords(layout, var_mode), map);
}

std::string pair_label(const char* name, std::size_t i, std::size_t j) {
    return std::string(name) + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

std::string mode_label(const char* name, std::size_t i) {
    return std::string(name) + "[" + std::to_string(i) + "]";
}

} // namespace

AffineConstraint assemble_phi_async(std::size_t i, std::size_t j, const TildeMatrices& tilde_i,
                                    const SynthesisConfig& cfg, const DecisionLayout& layout, const Matrix& q_sqrt) {
    if (i == j)
        throw Error(ErrorKind::InvalidArgument, "lmi", "asynchronous constraint needs i != j");
    return assemble_block(pair_label("phi", i, j), j, tilde_i, -cfg.beta, cfg, layout, q_sqrt, false);
}

AffineConstraint assemble_phi_sync(std::size_t i, const TildeMatrices& tilde_i, const SynthesisConfig& cfg,
                                   const DecisionLayout& layout, const Matrix& q_sqrt) {
    return assemble_block(mode_label("phi", i), i, tilde_i, cfg.alpha, cfg, layout, q_sqrt, false);
}

AffineConstraint assemble_psi_async(std::size_t i, std::size_t j, const TildeMatrices& tilde_i,
                                    const SynthesisConfig& cfg, const DecisionLayout& layout, const Matrix& q_sqrt) {
    if (i == j)
        throw Error(ErrorKind::InvalidArgument, "lmi", "asynchronous constraint needs i != j");
    if (!(cfg.gamma > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lmi", "gamma must be positive");
    return assemble_block(pair_label("psi", i, j), j, tilde_i, -cfg.beta, cfg, layout, q_sqrt, true);
}

AffineConstraint assemble_psi_sync(std::size_t i, const TildeMatrices& tilde_i, const SynthesisConfig& cfg,
                                   const DecisionLayout& layout, const Matrix& q_sqrt) {
    if (!(cfg.gamma > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lmi", "gamma must be positive");
    return assemble_block(mode_label("psi", i), i, tilde_i, cfg.alpha, cfg, layout, q_sqrt, true);
}

AffineConstraint assemble_mode_jump(std::size_t i, std::size_t j, double mu, const DecisionLayout& layout,
                                    double margin) {
    if (!(mu >= 1.0))
        throw Error(ErrorKind::InvalidArgument, "lmi", "mu must be >= 1");
    if (i == j)
        throw Error(ErrorKind::InvalidArgument, "lmi", "mode jump needs i != j");
    auto map = [&](const Vector& v) -> Matrix {
        return layout.P(v, i) - mu * layout.P(v, j) + margin * Matrix::Identity(layout.N(), layout.N());
    };
    std::vector<Eigen::Index> coords = p_coords(layout, i);
    const auto other = p_coords(layout, j);
    coords.insert(coords.end(), other.begin(), other.end());
    return affine_from_map(pair_label("jump", i, j), layout, coords, map);
}

AffineConstraint assemble_positivity(std::size_t i, double delta, const DecisionLayout& layout) {
    auto map = [&](const Vector& v) -> Matrix {
        return -layout.P(v, i) + delta * Matrix::Identity(layout.N(), layout.N());
    };
    return affine_from_map(mode_label("pos", i), layout, p_coords(layout, i), map);
}

std::vector<AffineConstraint> assemble_eigen_box(std::size_t i, double lo, double hi, const DecisionLayout& layout) {
    if (!(lo > 0.0) || !(hi > lo))
        throw Error(ErrorKind::InvalidArgument, "lmi", "eigenvalue box needs 0 < lo < hi");
    const Matrix id = Matrix::Identity(layout.N(), layout.N());
    std::vector<AffineConstraint> out;
    out.push_back(affine_from_map(mode_label("box_lo", i), layout, p_coords(layout, i),
                                  [&](const Vector& v) -> Matrix { return lo * id - layout.P(v, i); }));
    out.push_back(affine_from_map(mode_label("box_hi", i), layout, p_coords(layout, i),
                                  [&](const Vector& v) -> Matrix { return layout.P(v, i) - hi * id; }));
    return out;
}

LmiProblem build_problem(const SwitchedPlant& plant, const FilterSpec& filter, int n_c, const SynthesisConfig& cfg,
                         const EigenBox* box) {
    cfg.validate();
    const std::size_t s = plant.mode_count();
    const int N = plant.n_x() + n_c + plant.n_u();
    const int m = n_c + plant.n_u();
    const Matrix q_plant = cfg.Q.size() == 0 ? Matrix::Identity(plant.n_x(), plant.n_x()) : cfg.Q;
    const LiftedWeight w = lift_weight(q_plant, n_c, plant.n_u());

    const bool with_disturbance = cfg.theorem != Theorem::Stability;
    const double jump_margin = cfg.theorem == Theorem::HInf ? cfg.delta : 0.0;
    if (cfg.mu == 1.0 && jump_margin > 0.0)
        spdlog::warn("mu = 1 combined with a strict jump constraint; feasibility requires P_i < P_j both ways");

    LmiProblem prob;
    prob.layout = DecisionLayout(s, N, m, n_c + plant.n_y());
    prob.weight = w;
    std::vector<TildeMatrices> tilde;
    for (std::size_t i = 0; i < s; ++i)
        tilde.push_back(build_tilde(plant.mode(i), filter, n_c));

    for (std::size_t i = 0; i < s; ++i) {
        prob.constraints.push_back(with_disturbance
                                       ? assemble_psi_sync(i, tilde[i], cfg, prob.layout, w.sqrt)
                                       : assemble_phi_sync(i, tilde[i], cfg, prob.layout, w.sqrt));
        for (std::size_t j = 0; j < s; ++j) {
            if (j == i)
                continue;
            prob.constraints.push_back(with_disturbance
                                           ? assemble_psi_async(i, j, tilde[i], cfg, prob.layout, w.sqrt)
                                           : assemble_phi_async(i, j, tilde[i], cfg, prob.layout, w.sqrt));
            prob.constraints.push_back(assemble_mode_jump(i, j, cfg.mu, prob.layout, jump_margin));
        }
        prob.constraints.push_back(assemble_positivity(i, cfg.delta, prob.layout));
        if (box) {
            for (auto& c : assemble_eigen_box(i, box->lo, box->hi, prob.layout))
                prob.constraints.push_back(std::move(c));
        }
    }
    return prob;
}

ScalarKind scalar_kind_for(Theorem theorem) noexcept {
    switch (theorem) {
    case Theorem::Stability: return ScalarKind::FiniteTimeStable;
    case Theorem::Bounded: return ScalarKind::FiniteTimeBounded;
    case Theorem::HInf: return ScalarKind::HInf;
    }
    return ScalarKind::FiniteTimeStable;
}

ScalarCheck check_scalar_condition(ScalarKind kind, double lambda1, double lambda2, const SynthesisConfig& cfg) {
    if (kind != ScalarKind::HInf && !(cfg.c2 > cfg.c1))
        throw Error(ErrorKind::InvalidArgument, "lmi", "scalar condition needs c2 > c1");
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lmi", "lambda1 and lambda2 must be positive");
    const double L = switching_cost(cfg);
    double lhs = 0.0;
    double rhs = 0.0;
    switch (kind) {
    case ScalarKind::FiniteTimeStable:
        lhs = lambda2 * cfg.c1 * std::exp(L * cfg.N0 - cfg.alpha * cfg.T);
        rhs = lambda1 * cfg.c2;
        break;
    case ScalarKind::FiniteTimeBounded:
        lhs = lambda2 * cfg.c1 * std::exp(-cfg.alpha * cfg.T) + cfg.gamma * cfg.gamma * cfg.d;
        rhs = cfg.c2 * lambda1 * std::exp(-L * cfg.N0);
        break;
    case ScalarKind::HInf:
        lhs = cfg.gamma * cfg.gamma * cfg.d;
        rhs = cfg.c2 * lambda1 * std::exp(L * cfg.N0);
        break;
    }
    return {lhs < rhs, rhs - lhs};
}

} // namespace switchsynth
