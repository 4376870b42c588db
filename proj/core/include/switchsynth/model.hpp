#pragma once

#include "switchsynth/linalg.hpp"

#include <cstddef>
#include <vector>

namespace switchsynth {

struct PlantMode {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    Matrix E;
};

class SwitchedPlant {
public:
    // Validates dimensions and finiteness; needs at least two modes.
    explicit SwitchedPlant(std::vector<PlantMode> modes);

    [[nodiscard]] std::size_t mode_count() const noexcept { return modes_.size(); }
    [[nodiscard]] const PlantMode& mode(std::size_t i) const;
    [[nodiscard]] const std::vector<PlantMode>& modes() const noexcept { return modes_; }

    [[nodiscard]] int n_x() const noexcept { return n_x_; }
    [[nodiscard]] int n_u() const noexcept { return n_u_; }
    [[nodiscard]] int n_y() const noexcept { return n_y_; }
    [[nodiscard]] int n_w() const noexcept { return n_w_; }

private:
    std::vector<PlantMode> modes_;
    int n_x_ = 0;
    int n_u_ = 0;
    int n_y_ = 0;
    int n_w_ = 0;
};

class FilterSpec {
public:
    // K_f must be symmetric positive definite.
    explicit FilterSpec(Matrix k_f);
    static FilterSpec scalar(double k, int n_u);

    [[nodiscard]] const Matrix& k_f() const noexcept { return k_f_; }
    [[nodiscard]] int n_u() const noexcept { return static_cast<int>(k_f_.rows()); }

private:
    Matrix k_f_;
};

struct ControllerBlocks {
    Matrix A_c;
    Matrix B_c;
    Matrix C_c;
    Matrix D_c;
};

[[nodiscard]] Matrix pack_controller(const ControllerBlocks& blocks);
[[nodiscard]] ControllerBlocks unpack_controller(const Matrix& k, int n_c, int n_u, int n_y);

class ControllerGains {
public:
    ControllerGains(std::vector<Matrix> packed, int n_c, int n_u, int n_y);

    [[nodiscard]] std::size_t mode_count() const noexcept { return packed_.size(); }
    [[nodiscard]] const Matrix& packed(std::size_t i) const;
    [[nodiscard]] ControllerBlocks blocks(std::size_t i) const;
    [[nodiscard]] int n_c() const noexcept { return n_c_; }
    [[nodiscard]] int n_u() const noexcept { return n_u_; }
    [[nodiscard]] int n_y() const noexcept { return n_y_; }

private:
    std::vector<Matrix> packed_;
    int n_c_;
    int n_u_;
    int n_y_;
};

// Decoupled block matrices for one plant mode. `C_out`/`E_out` carry the
// measured output in augmented coordinates, C_out = [C 0 0].
struct TildeMatrices {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix I;
    Matrix D;
    Matrix E;
    Matrix K_f;
    Matrix C_out;
    Matrix E_out;

    [[nodiscard]] int augmented_dim() const noexcept { return static_cast<int>(A.rows()); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(B.cols()); }
};

[[nodiscard]] TildeMatrices build_tilde(const PlantMode& mode, const FilterSpec& filter, int n_c);

// Closed loop of plant tilde matrices driven by gain `k`, evaluated through
// the factored product form.
[[nodiscard]] Matrix factored_closed_loop_a(const TildeMatrices& t, const Matrix& k);
[[nodiscard]] Matrix factored_closed_loop_g(const TildeMatrices& t, const Matrix& k);

// Explicit block form for plant mode `mode` under controller blocks `ctrl`.
[[nodiscard]] Matrix explicit_closed_loop_a(const PlantMode& mode, const ControllerBlocks& ctrl,
                                            const Matrix& k_f);
[[nodiscard]] Matrix explicit_closed_loop_g(const PlantMode& mode, const ControllerBlocks& ctrl,
                                            const Matrix& k_f);

struct AugmentedSystem {
    int N = 0;
    std::vector<TildeMatrices> tilde;
    std::vector<Matrix> A_sync;
    std::vector<Matrix> G_sync;
    // [plant i][controller j]; entries with i == j stay empty.
    std::vector<std::vector<Matrix>> A_async;
    std::vector<std::vector<Matrix>> G_async;

    // Closed loop with plant i and controller j (sync when i == j).
    [[nodiscard]] const Matrix& a(std::size_t i, std::size_t j) const;
    [[nodiscard]] const Matrix& g(std::size_t i, std::size_t j) const;
};

[[nodiscard]] AugmentedSystem build_augmented(const SwitchedPlant& plant, const ControllerGains& gains,
                                              const FilterSpec& filter);

struct LiftedWeight {
    Matrix Q;
    Matrix sqrt;
};

[[nodiscard]] LiftedWeight lift_weight(const Matrix& q_plant, int n_c, int n_u);

// Augmented state [x; x_c; x_f - D_c C x - C_c x_c] for controller blocks `ctrl`.
[[nodiscard]] Vector augmented_state(const Vector& x, const Vector& x_c, const Vector& x_f,
                                     const Matrix& C, const ControllerBlocks& ctrl);

} // namespace switchsynth
