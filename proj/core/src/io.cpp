#include "switchsynth/io.hpp"

#include "switchsynth/error.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

namespace switchsynth {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, "io", what); }

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out.push_back(v(k));
    return out;
}

json double_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number(const json& j, const std::string& what) {
    if (j.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number())
        config_error(what + " must be a number");
    return j.get<double>();
}

// Accepts a nested row-major array or, for 1x1 blocks, a bare number.
Matrix matrix_from_json(const json& j, const std::string& what) {
    if (j.is_number()) {
        Matrix m(1, 1);
        m(0, 0) = j.get<double>();
        return m;
    }
    if (!j.is_array())
        config_error(what + " must be a nested array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0)
        return Matrix(0, 0);
    if (!j[0].is_array())
        config_error(what + " must be an array of rows");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            config_error(what + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = number(row[static_cast<std::size_t>(c)], what);
    }
    return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
    if (j.is_number()) {
        Vector v(1);
        v(0) = j.get<double>();
        return v;
    }
    if (!j.is_array())
        config_error(what + " must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = number(j[k], what);
    return v;
}

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        config_error(where + " is missing '" + key + "'");
    return j.at(key);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("field '") + key + "': " + e.what());
    }
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
}

json disturbance_to_json(const Disturbance& d) {
    switch (d.kind()) {
    case DisturbanceKind::Zero: return {{"kind", "zero"}, {"n_w", d.n_w()}};
    case DisturbanceKind::CosOverQuadratic:
        return {{"kind", "cos_over_quadratic"}, {"amplitude", vector_to_json(d.amplitude())}};
    case DisturbanceKind::Table: return {{"kind", "table"}, {"samples", matrix_to_json(d.samples())}};
    case DisturbanceKind::Expression: return {{"kind", "expression"}, {"components", d.sources()}};
    }
    return {};
}

Disturbance disturbance_from_json(const json& j, int n_w) {
    if (j.is_null())
        return Disturbance::zero(n_w);
    const std::string kind = get_or<std::string>(j, "kind", "zero");
    Disturbance d = Disturbance::zero(n_w);
    if (kind == "zero") {
        d = Disturbance::zero(get_or<int>(j, "n_w", n_w));
    } else if (kind == "cos_over_quadratic") {
        d = Disturbance::cos_over_quadratic(j.contains("amplitude") ? vector_from_json(j.at("amplitude"), "amplitude")
                                                                    : Vector::Ones(n_w));
    } else if (kind == "table") {
        d = Disturbance::table(matrix_from_json(require(j, "samples", "disturbance"), "samples"));
    } else if (kind == "expression") {
        d = Disturbance::expression(require(j, "components", "disturbance").get<std::vector<std::string>>());
    } else {
        config_error("unknown disturbance kind '" + kind + "'");
    }
    if (d.n_w() != n_w)
        config_error("disturbance has " + std::to_string(d.n_w()) + " components, plant expects " + std::to_string(n_w));
    return d;
}

const char* theorem_name(Theorem t) {
    switch (t) {
    case Theorem::Stability: return "stability";
    case Theorem::Bounded: return "bounded";
    case Theorem::HInf: return "hinf";
    }
    return "stability";
}

Theorem theorem_from_json(const json& j) {
    if (j.is_number_integer()) {
        const int k = j.get<int>();
        if (k < 1 || k > 3)
            config_error("theorem must be 1, 2 or 3");
        return static_cast<Theorem>(k);
    }
    const std::string s = j.get<std::string>();
    if (s == "stability")
        return Theorem::Stability;
    if (s == "bounded")
        return Theorem::Bounded;
    if (s == "hinf")
        return Theorem::HInf;
    config_error("unknown theorem '" + s + "'");
}

std::vector<Matrix> matrices_from_json(const json& j, const std::string& what) {
    std::vector<Matrix> out;
    if (!j.is_array())
        config_error(what + " must be an array of matrices");
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(matrix_from_json(j[k], what + "[" + std::to_string(k) + "]"));
    return out;
}

json matrices_to_json(const std::vector<Matrix>& ms) {
    json out = json::array();
    for (const auto& m : ms)
        out.push_back(matrix_to_json(m));
    return out;
}

json doubles_to_json(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs)
        out.push_back(double_or_null(x));
    return out;
}

} // namespace

ProblemConfig parse_config(const std::string& json_text) {
    const json root = parse_json(json_text);
    try {
        const json& pj = require(root, "plant", "config");
        const json& modes_j = require(pj, "modes", "plant");
        if (!modes_j.is_array())
            config_error("plant.modes must be an array");
        std::vector<PlantMode> modes;
        for (std::size_t k = 0; k < modes_j.size(); ++k) {
            const std::string where = "plant.modes[" + std::to_string(k) + "]";
            const json& mj = modes_j[k];
            modes.push_back({matrix_from_json(require(mj, "A", where), where + ".A"),
                             matrix_from_json(require(mj, "B", where), where + ".B"),
                             matrix_from_json(require(mj, "C", where), where + ".C"),
                             matrix_from_json(require(mj, "D", where), where + ".D"),
                             matrix_from_json(require(mj, "E", where), where + ".E")});
        }
        SwitchedPlant plant(std::move(modes));
        const int n_c = get_or<int>(pj, "n_c", plant.n_x());
        if (n_c < 0)
            config_error("plant.n_c must be non-negative");
        const json& kf = require(pj, "K_f", "plant");
        FilterSpec filter = kf.is_number() ? FilterSpec::scalar(kf.get<double>(), plant.n_u())
                                           : FilterSpec(matrix_from_json(kf, "plant.K_f"));
        if (filter.n_u() != plant.n_u())
            config_error("plant.K_f must be n_u x n_u");

        SynthesisConfig s;
        const json sj = root.contains("synthesis") ? root.at("synthesis") : json::object();
        if (sj.contains("theorem"))
            s.theorem = theorem_from_json(sj.at("theorem"));
        s.alpha = get_or(sj, "alpha", s.alpha);
        s.beta = get_or(sj, "beta", s.beta);
        s.mu = get_or(sj, "mu", s.mu);
        s.eps = get_or(sj, "eps", s.eps);
        s.rho = get_or(sj, "rho", s.rho);
        s.gamma = get_or(sj, "gamma", s.gamma);
        s.c1 = get_or(sj, "c1", s.c1);
        s.c2 = get_or(sj, "c2", s.c2);
        s.T = get_or(sj, "T", s.T);
        s.d = get_or(sj, "d", s.d);
        s.tau_d = get_or(sj, "tau_d", s.tau_d);
        s.N0 = get_or(sj, "N0", s.N0);
        s.delta = get_or(sj, "delta", s.delta);
        s.bisect_gamma = get_or(sj, "bisect_gamma", s.bisect_gamma);
        if (sj.contains("Q"))
            s.Q = matrix_from_json(sj.at("Q"), "synthesis.Q");
        if (s.Q.size() != 0 && s.Q.rows() != plant.n_x())
            config_error("synthesis.Q must be n_x x n_x");
        if (sj.contains("solver")) {
            const json& so = sj.at("solver");
            s.solver.max_iterations = get_or(so, "max_iterations", s.solver.max_iterations);
            s.solver.seed = get_or(so, "seed", s.solver.seed);
            s.solver.init_noise = get_or(so, "init_noise", s.solver.init_noise);
            s.solver.stall_window = get_or(so, "stall_window", s.solver.stall_window);
        }
        s.validate();

        SimulationPlan sim;
        const json mj = root.contains("simulation") ? root.at("simulation") : json::object();
        sim.x0 = mj.contains("x0") ? vector_from_json(mj.at("x0"), "simulation.x0") : Vector::Zero(plant.n_x());
        if (sim.x0.size() != plant.n_x())
            config_error("simulation.x0 must have n_x entries");
        sim.h = get_or(mj, "h", 0.0);
        sim.tau_a_factor = get_or(mj, "tau_a_factor", sim.tau_a_factor);
        if (!(sim.tau_a_factor >= 1.0))
            config_error("simulation.tau_a_factor must be >= 1");
        sim.tau_a = get_or(mj, "tau_a", 0.0);
        if (sim.tau_a < 0.0)
            config_error("simulation.tau_a must be non-negative");
        sim.seeds = get_or(mj, "seeds", 0);
        sim.seed_base = get_or<std::uint64_t>(mj, "seed_base", 0);
        sim.zero_initial = get_or(mj, "zero_initial", false);
        const std::string delay = get_or<std::string>(mj, "delay_mode", "constant");
        if (delay == "constant")
            sim.delay_mode = DelayMode::Constant;
        else if (delay == "random")
            sim.delay_mode = DelayMode::Random;
        else
            config_error("simulation.delay_mode must be 'constant' or 'random'");
        sim.disturbance = disturbance_from_json(mj.contains("disturbance") ? mj.at("disturbance") : json(nullptr),
                                                plant.n_w());
        return ProblemConfig{std::move(plant), n_c, std::move(filter), std::move(s), std::move(sim)};
    } catch (const json::exception& e) {
        config_error(std::string("invalid config: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config)
            throw;
        config_error(e.what());
    }
}

std::string dump_config(const ProblemConfig& cfg) {
    json modes = json::array();
    for (const auto& m : cfg.plant.modes())
        modes.push_back({{"A", matrix_to_json(m.A)},
                         {"B", matrix_to_json(m.B)},
                         {"C", matrix_to_json(m.C)},
                         {"D", matrix_to_json(m.D)},
                         {"E", matrix_to_json(m.E)}});
    const SynthesisConfig& s = cfg.synthesis;
    json synth = {{"theorem", theorem_name(s.theorem)},
                  {"alpha", s.alpha},
                  {"beta", s.beta},
                  {"mu", s.mu},
                  {"eps", s.eps},
                  {"rho", s.rho},
                  {"gamma", s.gamma},
                  {"c1", s.c1},
                  {"c2", s.c2},
                  {"T", s.T},
                  {"d", s.d},
                  {"tau_d", s.tau_d},
                  {"N0", s.N0},
                  {"delta", s.delta},
                  {"bisect_gamma", s.bisect_gamma},
                  {"solver",
                   {{"max_iterations", s.solver.max_iterations},
                    {"seed", s.solver.seed},
                    {"init_noise", s.solver.init_noise},
                    {"stall_window", s.solver.stall_window}}}};
    if (s.Q.size() != 0)
        synth["Q"] = matrix_to_json(s.Q);
    const SimulationPlan& p = cfg.simulation;
    json sim = {{"x0", vector_to_json(p.x0)},
                {"h", p.h},
                {"tau_a_factor", p.tau_a_factor},
                {"tau_a", p.tau_a},
                {"seeds", p.seeds},
                {"seed_base", p.seed_base},
                {"zero_initial", p.zero_initial},
                {"delay_mode", p.delay_mode == DelayMode::Constant ? "constant" : "random"},
                {"disturbance", disturbance_to_json(p.disturbance)}};
    json root = {{"plant", {{"modes", modes}, {"n_c", cfg.n_c}, {"K_f", matrix_to_json(cfg.filter.k_f())}}},
                 {"synthesis", synth},
                 {"simulation", sim}};
    return root.dump(2) + "\n";
}

ControllerGains parse_gains(const std::string& json_text) {
    const json root = parse_json(json_text);
    try {
        const int n_c = require(root, "n_c", "gains").get<int>();
        const int n_u = require(root, "n_u", "gains").get<int>();
        const int n_y = require(root, "n_y", "gains").get<int>();
        std::vector<Matrix> packed;
        const json& modes = require(root, "modes", "gains");
        for (std::size_t k = 0; k < modes.size(); ++k)
            packed.push_back(matrix_from_json(require(modes[k], "K", "gains.modes"), "gains.modes.K"));
        return ControllerGains(std::move(packed), n_c, n_u, n_y);
    } catch (const json::exception& e) {
        config_error(std::string("invalid gains: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config)
            throw;
        config_error(e.what());
    }
}

std::string dump_gains(const ControllerGains& gains, const FilterSpec& filter) {
    json modes = json::array();
    for (std::size_t i = 0; i < gains.mode_count(); ++i) {
        const ControllerBlocks b = gains.blocks(i);
        modes.push_back({{"K", matrix_to_json(gains.packed(i))},
                         {"A_c", matrix_to_json(b.A_c)},
                         {"B_c", matrix_to_json(b.B_c)},
                         {"C_c", matrix_to_json(b.C_c)},
                         {"D_c", matrix_to_json(b.D_c)}});
    }
    json root = {{"n_c", gains.n_c()},
                 {"n_u", gains.n_u()},
                 {"n_y", gains.n_y()},
                 {"K_f", matrix_to_json(filter.k_f())},
                 {"modes", modes}};
    return root.dump(2) + "\n";
}

std::string dump_certificate(const Certificate& c) {
    json constraints = json::array();
    for (std::size_t k = 0; k < c.labels.size(); ++k)
        constraints.push_back({{"label", c.labels[k]},
                               {"max_eig", k < c.constraint_max_eig.size() ? double_or_null(c.constraint_max_eig[k])
                                                                          : json(nullptr)}});
    json root = {{"theorem", theorem_name(c.theorem)},
                 {"status", to_string(c.status)},
                 {"certified", c.certified()},
                 {"margin", double_or_null(c.margin)},
                 {"delta", c.delta},
                 {"lambda1", double_or_null(c.lambda1)},
                 {"lambda2", double_or_null(c.lambda2)},
                 {"lambda_min", doubles_to_json(c.lambda_min)},
                 {"lambda_max", doubles_to_json(c.lambda_max)},
                 {"tau_a_star", double_or_null(c.tau_a_star)},
                 {"tau_a_note", c.tau_a_note},
                 {"gamma", c.gamma},
                 {"gamma_s", double_or_null(c.gamma_s)},
                 {"scalar_condition", {{"holds", c.scalar.holds}, {"slack", double_or_null(c.scalar.slack)}}},
                 {"as_printed_weight", c.as_printed_weight},
                 {"gain_condition", doubles_to_json(c.gain_condition)},
                 {"scalars",
                  {{"alpha", c.alpha},
                   {"beta", c.beta},
                   {"mu", c.mu},
                   {"tau_d", c.tau_d},
                   {"N0", c.N0},
                   {"c1", c.c1},
                   {"c2", c.c2},
                   {"T", c.T},
                   {"d", c.d}}},
                 {"Q_aug", matrix_to_json(c.Q_aug)},
                 {"P", matrices_to_json(c.P)},
                 {"R", matrices_to_json(c.R)},
                 {"S", matrices_to_json(c.S)},
                 {"constraints", constraints}};
    return root.dump(2) + "\n";
}

Certificate parse_certificate(const std::string& json_text) {
    const json root = parse_json(json_text);
    try {
        Certificate c;
        c.theorem = theorem_from_json(require(root, "theorem", "certificate"));
        const std::string status = get_or<std::string>(root, "status", "iteration-limit");
        c.status = status == "feasible"     ? FeasibilityStatus::Feasible
                   : status == "infeasible" ? FeasibilityStatus::Infeasible
                                            : FeasibilityStatus::IterationLimit;
        c.margin = number(root.value("margin", json(nullptr)), "margin");
        c.delta = get_or(root, "delta", 0.0);
        c.lambda1 = number(root.value("lambda1", json(nullptr)), "lambda1");
        c.lambda2 = number(root.value("lambda2", json(nullptr)), "lambda2");
        c.tau_a_star = number(root.value("tau_a_star", json(nullptr)), "tau_a_star");
        c.tau_a_note = get_or<std::string>(root, "tau_a_note", "");
        c.gamma = get_or(root, "gamma", 0.0);
        c.gamma_s = number(root.value("gamma_s", json(nullptr)), "gamma_s");
        if (root.contains("scalar_condition")) {
            c.scalar.holds = root.at("scalar_condition").value("holds", false);
            c.scalar.slack = number(root.at("scalar_condition").value("slack", json(nullptr)), "slack");
        }
        c.as_printed_weight = get_or(root, "as_printed_weight", false);
        if (root.contains("gain_condition"))
            for (const auto& g : root.at("gain_condition"))
                c.gain_condition.push_back(number(g, "gain_condition"));
        const json& sc = require(root, "scalars", "certificate");
        c.alpha = sc.at("alpha").get<double>();
        c.beta = sc.at("beta").get<double>();
        c.mu = sc.at("mu").get<double>();
        c.tau_d = sc.at("tau_d").get<double>();
        c.N0 = sc.at("N0").get<double>();
        c.c1 = sc.at("c1").get<double>();
        c.c2 = sc.at("c2").get<double>();
        c.T = sc.at("T").get<double>();
        c.d = sc.at("d").get<double>();
        c.Q_aug = matrix_from_json(require(root, "Q_aug", "certificate"), "Q_aug");
        c.Q_sqrt = symmetric_sqrt(c.Q_aug);
        c.P = matrices_from_json(require(root, "P", "certificate"), "P");
        if (root.contains("R"))
            c.R = matrices_from_json(root.at("R"), "R");
        if (root.contains("S"))
            c.S = matrices_from_json(root.at("S"), "S");
        for (const auto& P : c.P) {
            if (P.rows() != c.Q_aug.rows() || P.cols() != c.Q_aug.cols())
                config_error("certificate P and Q_aug sizes differ");
            c.P_tilde.push_back(c.Q_sqrt * P * c.Q_sqrt);
            c.lambda_min.push_back(min_eigenvalue(P));
            c.lambda_max.push_back(max_eigenvalue(P));
        }
        if (root.contains("constraints")) {
            for (const auto& e : root.at("constraints")) {
                c.labels.push_back(e.at("label").get<std::string>());
                c.constraint_max_eig.push_back(number(e.at("max_eig"), "max_eig"));
            }
        }
        return c;
    } catch (const json::exception& e) {
        config_error(std::string("invalid certificate: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config)
            throw;
        config_error(e.what());
    }
}

std::string dump_report(const PipelineReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"stage", c.stage}, {"pass", c.pass}, {"margin", double_or_null(c.margin)}, {"details", c.details}});
    json root = {{"pass", report.pass()}, {"checks", checks}};
    return root.dump(2) + "\n";
}

std::string dump_constraints(const LmiProblem& problem, bool verbose) {
    json out = json::array();
    for (const auto& c : problem.constraints) {
        json e = {{"label", c.label}, {"dim", c.size()}, {"F0", matrix_to_json(c.F0)}, {"coeff_count", c.terms.size()}};
        if (verbose) {
            json terms = json::array();
            for (const auto& [k, f] : c.terms)
                terms.push_back({{"index", k}, {"F", matrix_to_json(f)}});
            e["coefficients"] = terms;
        }
        out.push_back(std::move(e));
    }
    return out.dump(2) + "\n";
}

ProblemConfig example_config(const std::string& name) {
    if (name != "case1" && name != "case2")
        config_error("unknown example '" + name + "' (expected case1 or case2)");
    // Averaged boost converter, L = C = 1e-3, R = 1.
    Matrix A1(2, 2), A2(2, 2), B(2, 1), C1(1, 2), C2(1, 2), D1(2, 1), D2(2, 1), E1(1, 1), E2(1, 1);
    A1 << 0, -1000, 1000, -1000;
    A2 << 0, 0, 0, -1000;
    B << 1000, 0;
    C1 << -1.5, 1;
    C2 << -1.7, -0.1;
    D1 << 0.3, 0.1;
    D2 << 0.4, 0.2;
    E1 << 0.1;
    E2 << 0.2;
    SwitchedPlant plant({{A1, B, C1, D1, E1}, {A2, B, C2, D2, E2}});

    SynthesisConfig s;
    s.eps = 1.0;
    s.rho = 1.0;
    s.mu = 1.1;
    s.c1 = 1.0;
    s.c2 = 1.1;
    s.tau_d = 0.1;
    s.N0 = 1.0;
    s.Q = Matrix::Identity(2, 2);
    SimulationPlan sim;
    Vector x0(2);
    x0 << 0.8, 0.5;
    sim.x0 = x0;
    sim.seeds = 100;
    sim.tau_a_factor = 1.05;
    if (name == "case1") {
        s.theorem = Theorem::Stability;
        s.alpha = 0.4;
        s.beta = 0.1;
        s.T = 10.0;
        s.d = 0.0;
        sim.disturbance = Disturbance::zero(1);
    } else {
        s.theorem = Theorem::Bounded;
        s.alpha = 0.5;
        s.beta = 1.2;
        s.T = 20.0;
        s.d = 0.3;
        sim.disturbance = Disturbance::cos_over_quadratic(Vector::Ones(1));
    }
    return ProblemConfig{std::move(plant), 2, FilterSpec::scalar(10.0, 1), s, sim};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "io", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Io, "io", "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorKind::Io, "io", "write failed for " + path.string());
}

} // namespace switchsynth
