#pragma once

#include "switchsynth/linalg.hpp"

#include <memory>
#include <string>
#include <vector>

namespace switchsynth {

enum class DisturbanceKind { Zero, CosOverQuadratic, Table, Expression };

class Expression;

// Exogenous input w(t) with n_w components.
class Disturbance {
public:
    static Disturbance zero(int n_w);
    // w_k(t) = amplitude_k * cos(t) / (t^2 + 1)
    static Disturbance cos_over_quadratic(Vector amplitude);
    // Rows of `samples` are (t, w_1, ..., w_n); linear interpolation, held
    // constant outside the table.
    static Disturbance table(Matrix samples);
    // One expression per component in the variable t; supports + - * / ^,
    // unary minus, parentheses, pi, e and sin cos tan exp log sqrt abs.
    static Disturbance expression(std::vector<std::string> components);

    [[nodiscard]] Vector operator()(double t) const;
    [[nodiscard]] int n_w() const noexcept { return n_w_; }
    [[nodiscard]] DisturbanceKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Vector& amplitude() const noexcept { return amplitude_; }
    [[nodiscard]] const Matrix& samples() const noexcept { return samples_; }
    [[nodiscard]] const std::vector<std::string>& sources() const noexcept { return sources_; }

private:
    DisturbanceKind kind_ = DisturbanceKind::Zero;
    int n_w_ = 0;
    Vector amplitude_;
    Matrix samples_;
    std::vector<std::string> sources_;
    std::vector<std::shared_ptr<const Expression>> compiled_;
};

// Parses and evaluates a scalar expression in t; throws Error(Config) on
// syntax errors. Exposed for testing.
[[nodiscard]] double evaluate_expression(const std::string& source, double t);

} // namespace switchsynth
