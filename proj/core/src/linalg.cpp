#include "switchsynth/linalg.hpp"

#include "switchsynth/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace switchsynth {

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

double relative_asymmetry(const Matrix& m) {
    if (m.rows() != m.cols())
        return std::numeric_limits<double>::infinity();
    if (m.size() == 0)
        return 0.0;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix symmetrize_checked(const Matrix& m, double tolerance, std::string_view what) {
    const double asym = relative_asymmetry(m);
    if (!(asym <= tolerance)) {
        throw Error(ErrorKind::Numerical, "linalg",
                    std::string(what) + ": asymmetry " + std::to_string(asym) + " exceeds " +
                        std::to_string(tolerance));
    }
    return 0.5 * (m + m.transpose());
}

TopEigen max_eigen(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, "linalg", "symmetric eigensolver did not converge");
    const Eigen::Index last = symmetric.rows() - 1;
    return {solver.eigenvalues()(last), solver.eigenvectors().col(last)};
}

double max_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, "linalg", "symmetric eigensolver did not converge");
    return solver.eigenvalues().maxCoeff();
}

double min_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, "linalg", "symmetric eigensolver did not converge");
    return solver.eigenvalues().minCoeff();
}

Matrix symmetric_sqrt(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, "linalg", "symmetric eigensolver did not converge");
    const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

double condition_number(const Matrix& m) {
    if (m.size() == 0)
        return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    if (smallest <= 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / smallest;
}

Matrix block_diagonal(std::initializer_list<Matrix> blocks) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

} // namespace switchsynth
