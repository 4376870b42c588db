#include "switchsynth/model.hpp"

#include "switchsynth/error.hpp"

#include <string>

namespace switchsynth {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorKind::Dimension, "model",
                    what + " is " + shape(m) + ", expected " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    if (!m.allFinite())
        throw Error(ErrorKind::NonFinite, "model", what + " has non-finite entries");
}

} // namespace

SwitchedPlant::SwitchedPlant(std::vector<PlantMode> modes) : modes_(std::move(modes)) {
    if (modes_.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "model", "a switched plant needs at least two modes");
    const PlantMode& first = modes_.front();
    n_x_ = static_cast<int>(first.A.rows());
    n_u_ = static_cast<int>(first.B.cols());
    n_y_ = static_cast<int>(first.C.rows());
    n_w_ = static_cast<int>(first.D.cols());
    if (n_x_ <= 0 || n_u_ <= 0 || n_y_ <= 0 || n_w_ <= 0)
        throw Error(ErrorKind::Dimension, "model", "plant dimensions must be positive");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const std::string tag = "mode " + std::to_string(i) + " ";
        const PlantMode& m = modes_[i];
        require_shape(m.A, n_x_, n_x_, tag + "A");
        require_shape(m.B, n_x_, n_u_, tag + "B");
        require_shape(m.C, n_y_, n_x_, tag + "C");
        require_shape(m.D, n_x_, n_w_, tag + "D");
        require_shape(m.E, n_y_, n_w_, tag + "E");
    }
}

const PlantMode& SwitchedPlant::mode(std::size_t i) const {
    if (i >= modes_.size())
        throw Error(ErrorKind::InvalidArgument, "model", "mode index " + std::to_string(i) + " out of range");
    return modes_[i];
}

FilterSpec::FilterSpec(Matrix k_f) : k_f_(std::move(k_f)) {
    if (k_f_.rows() == 0 || k_f_.rows() != k_f_.cols())
        throw Error(ErrorKind::Dimension, "model", "K_f must be square and non-empty, got " + shape(k_f_));
    if (!k_f_.allFinite())
        throw Error(ErrorKind::NonFinite, "model", "K_f has non-finite entries");
    if (relative_asymmetry(k_f_) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "model", "K_f must be symmetric");
    if (min_eigenvalue(k_f_) <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "model", "K_f must be positive definite");
}

FilterSpec FilterSpec::scalar(double k, int n_u) {
    return FilterSpec(k * Matrix::Identity(n_u, n_u));
}

Matrix pack_controller(const ControllerBlocks& b) {
    const Eigen::Index n_c = b.A_c.rows();
    const Eigen::Index n_u = b.C_c.rows();
    const Eigen::Index n_y = b.B_c.cols();
    require_shape(b.A_c, n_c, n_c, "A_c");
    require_shape(b.B_c, n_c, n_y, "B_c");
    require_shape(b.C_c, n_u, n_c, "C_c");
    require_shape(b.D_c, n_u, n_y, "D_c");
    Matrix k(n_c + n_u, n_c + n_y);
    k << b.A_c, b.B_c, b.C_c, b.D_c;
    return k;
}

ControllerBlocks unpack_controller(const Matrix& k, int n_c, int n_u, int n_y) {
    require_shape(k, n_c + n_u, n_c + n_y, "packed gain");
    return {k.topLeftCorner(n_c, n_c), k.topRightCorner(n_c, n_y), k.bottomLeftCorner(n_u, n_c),
            k.bottomRightCorner(n_u, n_y)};
}

ControllerGains::ControllerGains(std::vector<Matrix> packed, int n_c, int n_u, int n_y)
    : packed_(std::move(packed)), n_c_(n_c), n_u_(n_u), n_y_(n_y) {
    if (n_c < 0 || n_u <= 0 || n_y <= 0)
        throw Error(ErrorKind::Dimension, "model", "invalid controller dimensions");
    for (std::size_t i = 0; i < packed_.size(); ++i)
        require_shape(packed_[i], n_c + n_u, n_c + n_y, "gain " + std::to_string(i));
}

const Matrix& ControllerGains::packed(std::size_t i) const {
    if (i >= packed_.size())
        throw Error(ErrorKind::InvalidArgument, "model", "gain index " + std::to_string(i) + " out of range");
    return packed_[i];
}

ControllerBlocks ControllerGains::blocks(std::size_t i) const {
    return unpack_controller(packed(i), n_c_, n_u_, n_y_);
}

TildeMatrices build_tilde(const PlantMode& mode, const FilterSpec& filter, int n_c) {
    const int n_x = static_cast<int>(mode.A.rows());
    const int n_u = static_cast<int>(mode.B.cols());
    const int n_y = static_cast<int>(mode.C.rows());
    const int n_w = static_cast<int>(mode.D.cols());
    if (n_c < 0)
        throw Error(ErrorKind::Dimension, "model", "n_c must be non-negative");
    require_shape(mode.A, n_x, n_x, "A");
    require_shape(mode.B, n_x, n_u, "B");
    require_shape(mode.C, n_y, n_x, "C");
    require_shape(mode.D, n_x, n_w, "D");
    require_shape(mode.E, n_y, n_w, "E");
    require_shape(filter.k_f(), n_u, n_u, "K_f");

    const int N = n_x + n_c + n_u;
    const int m = n_c + n_u;
    const Matrix& k_f = filter.k_f();

    TildeMatrices t;
    t.A = Matrix::Zero(N, N);
    t.A.topLeftCorner(n_x, n_x) = mode.A;
    t.A.block(0, n_x + n_c, n_x, n_u) = mode.B;
    t.A.bottomRightCorner(n_u, n_u) = -k_f;

    t.B = Matrix::Zero(N, m);
    t.B.block(0, n_c, n_x, n_u) = mode.B;
    t.B.block(n_x, 0, n_c, n_c) = Matrix::Identity(n_c, n_c);

    t.C = Matrix::Zero(n_c + n_y, N);
    t.C.block(0, n_x, n_c, n_c) = Matrix::Identity(n_c, n_c);
    t.C.block(n_c, 0, n_y, n_x) = mode.C;

    t.I = Matrix::Zero(N, m);
    t.I.bottomRightCorner(n_u, n_u) = -Matrix::Identity(n_u, n_u);

    t.D = Matrix::Zero(N, n_w);
    t.D.topRows(n_x) = mode.D;

    t.E = Matrix::Zero(n_c + n_y, n_w);
    t.E.bottomRows(n_y) = mode.E;

    t.K_f = Matrix::Zero(N, m);
    t.K_f.block(n_x, 0, n_c, n_c) = Matrix::Identity(n_c, n_c);
    t.K_f.bottomRightCorner(n_u, n_u) = k_f;

    t.C_out = Matrix::Zero(n_y, N);
    t.C_out.leftCols(n_x) = mode.C;
    t.E_out = mode.E;
    return t;
}

Matrix factored_closed_loop_a(const TildeMatrices& t, const Matrix& k) {
    require_shape(k, t.m(), t.C.rows(), "gain");
    const Matrix inner = t.A + t.B * k * t.C;
    return inner + t.I * k * t.C * inner;
}

Matrix factored_closed_loop_g(const TildeMatrices& t, const Matrix& k) {
    require_shape(k, t.m(), t.C.rows(), "gain");
    const Matrix inner = t.D + t.K_f * k * t.E;
    return inner + t.I * k * t.C * inner;
}

Matrix explicit_closed_loop_a(const PlantMode& p, const ControllerBlocks& c, const Matrix& k_f) {
    const Eigen::Index n_x = p.A.rows();
    const Eigen::Index n_c = c.A_c.rows();
    const Eigen::Index n_u = p.B.cols();
    const Matrix top_left = p.A + p.B * c.D_c * p.C;
    Matrix a(n_x + n_c + n_u, n_x + n_c + n_u);
    a << top_left, p.B * c.C_c, p.B,
         c.B_c * p.C, c.A_c, Matrix::Zero(n_c, n_u),
         -c.D_c * p.C * top_left - c.C_c * c.B_c * p.C, -c.D_c * p.C * p.B * c.C_c - c.C_c * c.A_c,
         -k_f - c.D_c * p.C * p.B;
    return a;
}

Matrix explicit_closed_loop_g(const PlantMode& p, const ControllerBlocks& c, const Matrix& k_f) {
    const Eigen::Index n_x = p.A.rows();
    const Eigen::Index n_c = c.A_c.rows();
    const Eigen::Index n_u = p.B.cols();
    Matrix g(n_x + n_c + n_u, p.D.cols());
    g << p.D, c.B_c * p.E, k_f * c.D_c * p.E - c.D_c * p.C * p.D - c.C_c * c.B_c * p.E;
    return g;
}

const Matrix& AugmentedSystem::a(std::size_t i, std::size_t j) const {
    if (i >= A_sync.size() || j >= A_sync.size())
        throw Error(ErrorKind::InvalidArgument, "model", "closed-loop index out of range");
    return i == j ? A_sync[i] : A_async[i][j];
}

const Matrix& AugmentedSystem::g(std::size_t i, std::size_t j) const {
    if (i >= G_sync.size() || j >= G_sync.size())
        throw Error(ErrorKind::InvalidArgument, "model", "closed-loop index out of range");
    return i == j ? G_sync[i] : G_async[i][j];
}

AugmentedSystem build_augmented(const SwitchedPlant& plant, const ControllerGains& gains,
                                const FilterSpec& filter) {
    const std::size_t s = plant.mode_count();
    if (gains.mode_count() != s) {
        throw Error(ErrorKind::Dimension, "model",
                    "expected " + std::to_string(s) + " gains, got " + std::to_string(gains.mode_count()));
    }
    if (gains.n_u() != plant.n_u() || gains.n_y() != plant.n_y())
        throw Error(ErrorKind::Dimension, "model", "gain dimensions do not match the plant");

    AugmentedSystem sys;
    sys.N = plant.n_x() + gains.n_c() + plant.n_u();
    sys.A_async.assign(s, std::vector<Matrix>(s));
    sys.G_async.assign(s, std::vector<Matrix>(s));
    for (std::size_t i = 0; i < s; ++i) {
        sys.tilde.push_back(build_tilde(plant.mode(i), filter, gains.n_c()));
        for (std::size_t j = 0; j < s; ++j) {
            const ControllerBlocks c = gains.blocks(j);
            Matrix a = explicit_closed_loop_a(plant.mode(i), c, filter.k_f());
            Matrix g = explicit_closed_loop_g(plant.mode(i), c, filter.k_f());
            if (!a.allFinite() || !g.allFinite())
                throw Error(ErrorKind::NonFinite, "model", "closed loop has non-finite entries");
            if (i == j) {
                sys.A_sync.push_back(std::move(a));
                sys.G_sync.push_back(std::move(g));
            } else {
                sys.A_async[i][j] = std::move(a);
                sys.G_async[i][j] = std::move(g);
            }
        }
    }
    return sys;
}

LiftedWeight lift_weight(const Matrix& q_plant, int n_c, int n_u) {
    if (q_plant.rows() == 0 || q_plant.rows() != q_plant.cols())
        throw Error(ErrorKind::Dimension, "model", "Q must be square, got " + shape(q_plant));
    if (!q_plant.allFinite())
        throw Error(ErrorKind::NonFinite, "model", "Q has non-finite entries");
    if (relative_asymmetry(q_plant) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "model", "Q must be symmetric");
    if (min_eigenvalue(q_plant) <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "model", "Q must be positive definite");
    LiftedWeight w;
    w.Q = block_diagonal({q_plant, Matrix::Identity(n_c, n_c), Matrix::Identity(n_u, n_u)});
    w.sqrt = symmetric_sqrt(w.Q);
    return w;
}

Vector augmented_state(const Vector& x, const Vector& x_c, const Vector& x_f, const Matrix& C,
                       const ControllerBlocks& ctrl) {
    Vector xa(x.size() + x_c.size() + x_f.size());
    xa << x, x_c, x_f - ctrl.D_c * (C * x) - ctrl.C_c * x_c;
    return xa;
}

} // namespace switchsynth
