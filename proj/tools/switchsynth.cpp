#include "switchsynth/error.hpp"
#include "switchsynth/io.hpp"
#include "switchsynth/sim.hpp"
#include "switchsynth/solver.hpp"
#include "switchsynth/switching.hpp"
#include "switchsynth/verify.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace switchsynth;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_infeasible = 2;
constexpr int exit_config = 3;
constexpr int exit_diverged = 4;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::Dimension:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonFinite: return exit_config;
    case ErrorKind::Infeasible: return exit_infeasible;
    case ErrorKind::Diverged: return exit_diverged;
    case ErrorKind::Numerical: return exit_failure;
    }
    return exit_failure;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("switchsynth");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SWITCHSYNTH_LOG"))
        spdlog::cfg::helpers::load_levels(env);
}

void write_file(const fs::path& path, const std::string& text) {
    write_text_file(path, text);
    spdlog::info("wrote {}", path.string());
}

std::string fmt_or_undefined(double x) { return std::isfinite(x) ? fmt::format("{:.6g}", x) : "undefined"; }

int cmd_synth(const fs::path& config_path, const fs::path& out_dir, bool trace) {
    const ProblemConfig cfg = parse_config(read_text_file(config_path));
    std::ofstream trace_out;
    if (trace) {
        fs::create_directories(out_dir);
        trace_out.open(out_dir / "solver_trace.csv");
    }
    const SynthesisOutcome out =
        synthesize(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis, trace ? &trace_out : nullptr);
    const Certificate& cert = out.certificate;
    write_file(out_dir / "certificate.json", dump_certificate(cert));
    // uncertified gains are never written, so simulate/verify cannot pick them up by accident
    if (out.gains && cert.certified())
        write_file(out_dir / "gains.json", dump_gains(*out.gains, cfg.filter));

    std::cout << fmt::format("status      {}\n", to_string(cert.status));
    std::cout << fmt::format("margin      {:.6g} (required {:.3g})\n", cert.margin, cert.delta);
    std::cout << fmt::format("iterations  {}\n", out.result.iterations);
    std::cout << fmt::format("lambda1     {}\nlambda2     {}\n", fmt_or_undefined(cert.lambda1),
                             fmt_or_undefined(cert.lambda2));
    std::cout << fmt::format("scalar      {} (slack {})\n", cert.scalar.holds ? "holds" : "fails",
                             fmt_or_undefined(cert.scalar.slack));
    std::cout << fmt::format("tau_a*      {}{}\n", fmt_or_undefined(cert.tau_a_star),
                             cert.tau_a_note.empty() ? "" : "  (" + cert.tau_a_note + ")");
    if (cert.theorem != Theorem::Stability)
        std::cout << fmt::format("gamma       {:.6g}\ngamma_s     {}\n", cert.gamma, fmt_or_undefined(cert.gamma_s));
    if (!out.gains)
        std::cout << "gains       not recovered: " << out.gain_error << "\n";

    if (!cert.certified() || !out.gains) {
        std::cerr << "synth: LMIs not certified feasible\n";
        return exit_infeasible;
    }
    return exit_ok;
}

int cmd_simulate(const fs::path& config_path, const fs::path& gains_path, const std::string& cert_path,
                 std::uint64_t seed, const fs::path& out_dir) {
    const ProblemConfig cfg = parse_config(read_text_file(config_path));
    const ControllerGains gains = parse_gains(read_text_file(gains_path));
    std::optional<Certificate> cert;
    if (!cert_path.empty())
        cert = parse_certificate(read_text_file(cert_path));

    const SynthesisConfig& s = cfg.synthesis;
    double tau_a = cfg.simulation.tau_a;
    if (tau_a <= 0.0 && cert && std::isfinite(cert->tau_a_star))
        tau_a = cfg.simulation.tau_a_factor * cert->tau_a_star;
    if (!(tau_a > 0.0))
        throw Error(ErrorKind::Config, "simulate", "no dwell time: set simulation.tau_a or pass a certificate");

    const double h = cfg.simulation.h > 0.0 ? cfg.simulation.h : default_step(s.tau_d);
    GeneratorOptions gen;
    gen.min_gap = s.tau_d + 5.0 * h;
    const SwitchingSignal sig = generate_adt_signal(std::max(tau_a, 1e-9), s.N0, s.T,
                                                    static_cast<int>(cfg.plant.mode_count()), seed, gen);
    const DelayedSignal ds = delay_signal(sig, s.tau_d, cfg.simulation.delay_mode, seed);
    SimulationInput in;
    in.h = h;
    in.x0 = cfg.simulation.x0;
    if (cfg.simulation.zero_initial) {
        in.x0 = Vector::Zero(cfg.plant.n_x());
        in.xf0 = Vector::Zero(cfg.plant.n_u());
    }
    const Trajectory traj = simulate(cfg.plant, gains, cfg.filter, ds, cfg.simulation.disturbance, in,
                                     cert ? &cert->P_tilde : nullptr);

    std::ostringstream csv, sig_csv, gp;
    write_trajectory_csv(csv, traj);
    write_signal_csv(sig_csv, sig);
    write_plot_script(gp, "trajectory.csv", traj);
    write_file(out_dir / "trajectory.csv", csv.str());
    write_file(out_dir / "signal.csv", sig_csv.str());
    write_file(out_dir / "plots.gp", gp.str());

    double max_raw = 0.0, max_app = 0.0;
    for (const auto& b : bumpless_metric(traj)) {
        max_raw = std::max(max_raw, b.u_raw_jump);
        max_app = std::max(max_app, b.u_applied_jump);
    }
    std::cout << fmt::format("samples     {}\nswitches    {}\ntau_a       {:.6g}\n", traj.size(), sig.switch_count(),
                             tau_a);
    std::cout << fmt::format("int w'w     {:.9g}\nint y'y     {:.9g}\n", traj.int_wtw.back(), traj.int_yty.back());
    std::cout << fmt::format("jump u_raw  {:.6g}\njump u_app  {:.3g}\n", max_raw, max_app);
    return exit_ok;
}

int cmd_verify(const fs::path& config_path, const fs::path& gains_path, const fs::path& cert_path, int seeds,
               const std::string& report_path) {
    const ProblemConfig cfg = parse_config(read_text_file(config_path));
    const ControllerGains gains = parse_gains(read_text_file(gains_path));
    const Certificate cert = parse_certificate(read_text_file(cert_path));
    SimulationPlan plan = cfg.simulation;
    plan.seeds = seeds;
    const PipelineReport rep = verify_certificate(cfg.plant, gains, cfg.filter, cert, plan);
    const std::string json = dump_report(rep);
    if (report_path.empty())
        std::cout << json;
    else
        write_file(report_path, json);
    for (const auto& c : rep.checks)
        std::cerr << fmt::format("{:<16} {}  margin {:.6g}\n", c.stage, c.pass ? "pass" : "FAIL", c.margin);
    return rep.pass() ? exit_ok : exit_failure;
}

int cmd_example(const std::string& name, const fs::path& out_dir) {
    const ProblemConfig cfg = example_config(name);
    write_file(out_dir / (name + ".json"), dump_config(cfg));
    std::cout << (out_dir / (name + ".json")).string() << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Finite-time bumpless-transfer controller synthesis for asynchronously switched systems"};
    app.require_subcommand(1);

    std::string config, gains, cert, out_dir = ".", report, name;
    std::uint64_t seed = 0;
    int seeds = 0;
    bool trace = false;

    auto* synth = app.add_subcommand("synth", "solve the LMIs and write gains.json and certificate.json");
    synth->add_option("-c,--config", config, "problem config")->required();
    synth->add_option("-o,--out", out_dir, "output directory");
    synth->add_flag("--trace", trace, "write solver_trace.csv");

    auto* sim = app.add_subcommand("simulate", "simulate one seeded switching signal");
    sim->add_option("-c,--config", config, "problem config")->required();
    sim->add_option("-g,--gains", gains, "gains.json")->required();
    sim->add_option("--cert", cert, "certificate.json (adds V and the dwell time)");
    sim->add_option("--seed", seed, "signal seed");
    sim->add_option("-o,--out", out_dir, "output directory");

    auto* ver = app.add_subcommand("verify", "run the certificate and definition checks");
    ver->add_option("-c,--config", config, "problem config")->required();
    ver->add_option("-g,--gains", gains, "gains.json")->required();
    ver->add_option("--cert", cert, "certificate.json")->required();
    ver->add_option("--seeds", seeds, "number of seeded simulations")->check(CLI::NonNegativeNumber);
    ver->add_option("-r,--report", report, "write report.json here instead of stdout");

    auto* ex = app.add_subcommand("example", "write a bundled config (case1, case2)");
    ex->add_option("name", name, "example name")->required();
    ex->add_option("-o,--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try {
        if (*synth)
            return cmd_synth(config, out_dir, trace);
        if (*sim)
            return cmd_simulate(config, gains, cert, seed, out_dir);
        if (*ver)
            return cmd_verify(config, gains, cert, seeds, report);
        if (*ex)
            return cmd_example(name, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_failure;
}
