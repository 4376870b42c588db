#pragma once

#include "switchsynth/config.hpp"
#include "switchsynth/lmi.hpp"
#include "switchsynth/model.hpp"
#include "switchsynth/solver.hpp"
#include "switchsynth/verify.hpp"

#include <filesystem>
#include <string>

namespace switchsynth {

struct ProblemConfig {
    SwitchedPlant plant;
    int n_c;
    FilterSpec filter;
    SynthesisConfig synthesis;
    SimulationPlan simulation;
};

// All parsers throw Error(Config) on malformed or inconsistent documents.
[[nodiscard]] ProblemConfig parse_config(const std::string& json_text);
[[nodiscard]] std::string dump_config(const ProblemConfig& cfg);

[[nodiscard]] ControllerGains parse_gains(const std::string& json_text);
[[nodiscard]] std::string dump_gains(const ControllerGains& gains, const FilterSpec& filter);

[[nodiscard]] Certificate parse_certificate(const std::string& json_text);
[[nodiscard]] std::string dump_certificate(const Certificate& cert);

[[nodiscard]] std::string dump_report(const PipelineReport& report);

// Labels, sizes, F0 and coefficient counts; coefficient matrices too when verbose.
[[nodiscard]] std::string dump_constraints(const LmiProblem& problem, bool verbose = false);

// Bundled boost-converter configurations, "case1" or "case2".
[[nodiscard]] ProblemConfig example_config(const std::string& name);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace switchsynth
