#include "helpers.hpp"

#include "switchsynth/disturbance.hpp"
#include "switchsynth/error.hpp"
#include "switchsynth/io.hpp"

#include <doctest.h>

#include <cmath>

using namespace switchsynth;
using namespace testing_helpers;

TEST_CASE("bundled examples round-trip") {
    for (const char* name : {"case1", "case2"}) {
        const ProblemConfig a = example_config(name);
        const std::string text = dump_config(a);
        const ProblemConfig b = parse_config(text);
        CHECK(dump_config(b) == text);
        CHECK(b.plant.mode_count() == 2);
        CHECK(b.n_c == 2);
        CHECK(b.filter.k_f()(0, 0) == 10.0);
    }
    const ProblemConfig c1 = example_config("case1");
    CHECK(c1.synthesis.theorem == Theorem::Stability);
    CHECK(c1.synthesis.alpha == 0.4);
    CHECK(c1.synthesis.beta == 0.1);
    CHECK(c1.synthesis.T == 10.0);
    CHECK(c1.simulation.disturbance.kind() == DisturbanceKind::Zero);
    CHECK(c1.plant.mode(0).A(1, 0) == 1000.0);
    const ProblemConfig c2 = example_config("case2");
    CHECK(c2.synthesis.theorem == Theorem::Bounded);
    CHECK(c2.synthesis.d == 0.3);
    CHECK(c2.synthesis.T == 20.0);
    CHECK(c2.simulation.disturbance.kind() == DisturbanceKind::CosOverQuadratic);
    CHECK_THROWS_AS((void)example_config("case9"), Error);
}

TEST_CASE("config errors are reported as config errors") {
    auto kind_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Numerical;
    };
    CHECK(kind_of("{not json") == ErrorKind::Config);
    CHECK(kind_of("{}") == ErrorKind::Config);
    CHECK(kind_of(R"({"plant":{"modes":[{"A":[[1]],"B":[[1]],"C":[[1]],"D":[[1]],"E":[[1]]}],"K_f":1}})") ==
          ErrorKind::Config);
    std::string text = dump_config(example_config("case1"));
    const auto pos = text.find("\"alpha\": 0.4");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"alpha\": -1");
    CHECK(kind_of(text) == ErrorKind::Config);
}

TEST_CASE("gains and certificate round-trip") {
    const ProblemConfig cfg = demo_config();
    const SynthesisOutcome out = synthesize(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis);
    REQUIRE(out.gains.has_value());
    const std::string g = dump_gains(*out.gains, cfg.filter);
    const ControllerGains back = parse_gains(g);
    for (std::size_t i = 0; i < back.mode_count(); ++i)
        CHECK((back.packed(i) - out.gains->packed(i)).norm() == 0.0);
    CHECK(dump_gains(back, cfg.filter) == g);

    const std::string c = dump_certificate(out.certificate);
    const Certificate cb = parse_certificate(c);
    CHECK(dump_certificate(cb) == c);
    CHECK(cb.certified() == out.certificate.certified());
    CHECK(cb.tau_a_star == out.certificate.tau_a_star);
    for (std::size_t i = 0; i < cb.P_tilde.size(); ++i)
        CHECK((cb.P_tilde[i] - out.certificate.P_tilde[i]).norm() <= 1e-12 * cb.P_tilde[i].norm());
}

TEST_CASE("constraint dump") {
    const ProblemConfig cfg = demo_config();
    const LmiProblem prob = build_problem(cfg.plant, cfg.filter, cfg.n_c, cfg.synthesis);
    const std::string brief = dump_constraints(prob, false);
    const std::string full = dump_constraints(prob, true);
    CHECK(brief.find("\"label\": \"phi[0]\"") != std::string::npos);
    CHECK(brief.find("coefficients") == std::string::npos);
    CHECK(full.find("coefficients") != std::string::npos);
}

TEST_CASE("disturbance expressions") {
    CHECK(evaluate_expression("cos(t)/(t^2+1)", 2.0) == doctest::Approx(std::cos(2.0) / 5.0).epsilon(1e-15));
    CHECK(evaluate_expression("-2^2", 0.0) == doctest::Approx(-4.0));
    CHECK(evaluate_expression("2*pi - e", 0.0) == doctest::Approx(2 * M_PI - M_E));
    CHECK(evaluate_expression("sqrt(abs(-9)) + exp(0) + log(1)", 0.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS((void)evaluate_expression("cos(t", 0.0), Error);
    CHECK_THROWS_AS((void)evaluate_expression("foo(t)", 0.0), Error);
    const Disturbance w = Disturbance::cos_over_quadratic(Vector::Ones(1));
    CHECK(w(0.0)(0) == 1.0);
    Matrix tab(3, 2);
    tab << 0, 0, 1, 2, 2, 0;
    const Disturbance tw = Disturbance::table(tab);
    CHECK(tw(0.5)(0) == doctest::Approx(1.0));
    tab(2, 0) = 0.5;
    CHECK_THROWS_AS((void)Disturbance::table(tab), Error);
}
