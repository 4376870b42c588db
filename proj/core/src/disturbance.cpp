#include "switchsynth/disturbance.hpp"

#include "switchsynth/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>

namespace switchsynth {

// Tiny recursive-descent compiler producing a closure tree.
class Expression {
public:
    explicit Expression(std::function<double(double)> fn) : fn_(std::move(fn)) {}
    double operator()(double t) const { return fn_(t); }

private:
    std::function<double(double)> fn_;
};

namespace {

using Fn = std::function<double(double)>;

class Parser {
public:
    explicit Parser(const std::string& src) : s_(src) {}

    Fn parse() {
        Fn f = sum();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Config, "disturbance",
                    "expression '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Fn sum() {
        Fn lhs = product();
        for (;;) {
            if (eat('+')) {
                Fn rhs = product();
                lhs = [lhs, rhs](double t) { return lhs(t) + rhs(t); };
            } else if (eat('-')) {
                Fn rhs = product();
                lhs = [lhs, rhs](double t) { return lhs(t) - rhs(t); };
            } else {
                return lhs;
            }
        }
    }

    Fn product() {
        Fn lhs = unary();
        for (;;) {
            if (eat('*')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](double t) { return lhs(t) * rhs(t); };
            } else if (eat('/')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](double t) { return lhs(t) / rhs(t); };
            } else {
                return lhs;
            }
        }
    }

    Fn unary() {
        if (eat('-')) {
            Fn inner = unary();
            return [inner](double t) { return -inner(t); };
        }
        if (eat('+'))
            return unary();
        return power();
    }

    // right associative
    Fn power() {
        Fn base = atom();
        if (eat('^')) {
            Fn exponent = unary();
            return [base, exponent](double t) { return std::pow(base(t), exponent(t)); };
        }
        return base;
    }

    Fn atom() {
        skip();
        if (pos_ >= s_.size())
            fail("unexpected end");
        if (eat('(')) {
            Fn inner = sum();
            if (!eat(')'))
                fail("missing ')'");
            return inner;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            return [value](double) { return value; };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "t")
                return [](double t) { return t; };
            if (name == "pi")
                return [](double) { return std::numbers::pi; };
            if (name == "e")
                return [](double) { return std::numbers::e; };
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = [](double x) { return std::sin(x); };
            else if (name == "cos") fn = [](double x) { return std::cos(x); };
            else if (name == "tan") fn = [](double x) { return std::tan(x); };
            else if (name == "exp") fn = [](double x) { return std::exp(x); };
            else if (name == "log") fn = [](double x) { return std::log(x); };
            else if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
            else if (name == "abs") fn = [](double x) { return std::fabs(x); };
            else fail("unknown name '" + name + "'");
            if (!eat('('))
                fail("expected '(' after " + name);
            Fn arg = sum();
            if (!eat(')'))
                fail("missing ')'");
            return [fn, arg](double t) { return fn(arg(t)); };
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

} // namespace

double evaluate_expression(const std::string& source, double t) {
    return Parser(source).parse()(t);
}

Disturbance Disturbance::zero(int n_w) {
    if (n_w <= 0)
        throw Error(ErrorKind::Config, "disturbance", "n_w must be positive");
    Disturbance d;
    d.kind_ = DisturbanceKind::Zero;
    d.n_w_ = n_w;
    return d;
}

Disturbance Disturbance::cos_over_quadratic(Vector amplitude) {
    if (amplitude.size() == 0 || !amplitude.allFinite())
        throw Error(ErrorKind::Config, "disturbance", "amplitude must be a finite non-empty vector");
    Disturbance d;
    d.kind_ = DisturbanceKind::CosOverQuadratic;
    d.n_w_ = static_cast<int>(amplitude.size());
    d.amplitude_ = std::move(amplitude);
    return d;
}

Disturbance Disturbance::table(Matrix samples) {
    if (samples.rows() < 1 || samples.cols() < 2 || !samples.allFinite())
        throw Error(ErrorKind::Config, "disturbance", "table needs finite rows of (t, w...)");
    for (Eigen::Index r = 1; r < samples.rows(); ++r)
        if (!(samples(r, 0) > samples(r - 1, 0)))
            throw Error(ErrorKind::Config, "disturbance", "table times must be strictly increasing");
    Disturbance d;
    d.kind_ = DisturbanceKind::Table;
    d.n_w_ = static_cast<int>(samples.cols() - 1);
    d.samples_ = std::move(samples);
    return d;
}

Disturbance Disturbance::expression(std::vector<std::string> components) {
    if (components.empty())
        throw Error(ErrorKind::Config, "disturbance", "need at least one expression");
    Disturbance d;
    d.kind_ = DisturbanceKind::Expression;
    d.n_w_ = static_cast<int>(components.size());
    for (const auto& src : components)
        d.compiled_.push_back(std::make_shared<const Expression>(Parser(src).parse()));
    d.sources_ = std::move(components);
    return d;
}

Vector Disturbance::operator()(double t) const {
    switch (kind_) {
    case DisturbanceKind::Zero:
        return Vector::Zero(n_w_);
    case DisturbanceKind::CosOverQuadratic:
        return amplitude_ * (std::cos(t) / (t * t + 1.0));
    case DisturbanceKind::Table: {
        const Eigen::Index rows = samples_.rows();
        if (t <= samples_(0, 0))
            return samples_.row(0).tail(n_w_).transpose();
        if (t >= samples_(rows - 1, 0))
            return samples_.row(rows - 1).tail(n_w_).transpose();
        const auto col = samples_.col(0);
        const auto it = std::upper_bound(col.data(), col.data() + rows, t);
        const Eigen::Index hi = it - col.data();
        const Eigen::Index lo = hi - 1;
        const double s = (t - samples_(lo, 0)) / (samples_(hi, 0) - samples_(lo, 0));
        return ((1.0 - s) * samples_.row(lo).tail(n_w_) + s * samples_.row(hi).tail(n_w_)).transpose();
    }
    case DisturbanceKind::Expression: {
        Vector w(n_w_);
        for (int k = 0; k < n_w_; ++k)
            w(k) = (*compiled_[static_cast<std::size_t>(k)])(t);
        return w;
    }
    }
    return Vector::Zero(n_w_);
}

} // namespace switchsynth
