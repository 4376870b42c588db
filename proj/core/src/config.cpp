#include "switchsynth/config.hpp"

#include "switchsynth/error.hpp"

#include <cmath>
#include <string>

namespace switchsynth {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok)
        throw Error(ErrorKind::Config, "config", message);
}

} // namespace

void SynthesisConfig::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(mu) && mu >= 1.0, "mu must be >= 1");
    require(std::isfinite(eps) && eps > 0.0, "eps must be positive");
    require(std::isfinite(rho) && rho > 0.0, "rho must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
    require(std::isfinite(c1) && c1 >= 0.0, "c1 must be non-negative");
    require(std::isfinite(c2) && c2 > c1, "c2 must exceed c1");
    require(std::isfinite(T) && T > 0.0, "T must be positive");
    require(std::isfinite(d) && d >= 0.0, "d must be non-negative");
    require(std::isfinite(tau_d) && tau_d >= 0.0, "tau_d must be non-negative");
    require(std::isfinite(N0) && N0 >= 0.0, "N0 must be non-negative");
    require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
    require(solver.max_iterations > 0, "solver.max_iterations must be positive");
    require(solver.stall_window > 0, "solver.stall_window must be positive");
    if (Q.size() != 0)
        require(Q.rows() == Q.cols() && Q.allFinite(), "Q must be a finite square matrix");
}

double switching_cost(const SynthesisConfig& cfg) {
    return std::log(cfg.mu) + (cfg.alpha + cfg.beta) * cfg.tau_d;
}

} // namespace switchsynth
