#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace switchsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

[[nodiscard]] bool all_finite(const Matrix& m) noexcept;

// Largest asymmetry |M - M^T| entry, scaled by max(1, max|M|).
[[nodiscard]] double relative_asymmetry(const Matrix& m);

// (M + M^T)/2 after checking the asymmetry is below `tolerance`; throws
// Error(Numerical) naming `what` otherwise.
[[nodiscard]] Matrix symmetrize_checked(const Matrix& m, double tolerance, std::string_view what);

struct TopEigen {
    double value = 0.0;
    Vector vector;
};

// Largest eigenvalue and a unit eigenvector of a symmetric matrix.
[[nodiscard]] TopEigen max_eigen(const Matrix& symmetric);

[[nodiscard]] double max_eigenvalue(const Matrix& symmetric);
[[nodiscard]] double min_eigenvalue(const Matrix& symmetric);

// Principal square root of a symmetric positive semidefinite matrix.
[[nodiscard]] Matrix symmetric_sqrt(const Matrix& symmetric);

// 2-norm condition number via SVD; infinity for singular input.
[[nodiscard]] double condition_number(const Matrix& m);

// Block-diagonal stacking helper.
[[nodiscard]] Matrix block_diagonal(std::initializer_list<Matrix> blocks);

} // namespace switchsynth
