#include "switchsynth/switching.hpp"

#include "switchsynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace switchsynth {

int SwitchingSignal::mode_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return modes.at(static_cast<std::size_t>(it - times.begin()));
}

void SwitchingSignal::validate(int mode_count) const {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, "switching", m); };
    if (!(horizon > 0.0))
        fail("horizon must be positive");
    if (modes.size() != times.size() + 1)
        fail("need exactly one more mode than switch times");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0 && times[k] < horizon))
            fail("switch time " + std::to_string(times[k]) + " outside (0, T)");
        if (k > 0 && !(times[k] > times[k - 1]))
            fail("switch times must be strictly increasing");
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k] < 0 || modes[k] >= mode_count)
            fail("mode " + std::to_string(modes[k]) + " out of range");
        if (k > 0 && modes[k] == modes[k - 1])
            fail("consecutive modes must differ");
    }
}

int DelayedSignal::controller_mode_at(double t) const {
    // The controller picks up mode k+1 at times[k] + lags[k].
    int mode = base.modes.front();
    for (std::size_t k = 0; k < base.times.size(); ++k) {
        if (t >= base.times[k] + lags[k])
            mode = base.modes[k + 1];
        else
            break;
    }
    return mode;
}

std::vector<double> DelayedSignal::controller_switch_times() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < base.times.size(); ++k)
        out.push_back(base.times[k] + lags[k]);
    return out;
}

std::vector<Interval> DelayedSignal::intervals() const {
    std::vector<double> cuts{0.0};
    for (std::size_t k = 0; k < base.times.size(); ++k) {
        cuts.push_back(base.times[k]);
        cuts.push_back(std::min(base.times[k] + lags[k], base.horizon));
    }
    cuts.push_back(base.horizon);
    std::sort(cuts.begin(), cuts.end());
    std::vector<Interval> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (!(cuts[k + 1] > cuts[k]))
            continue;
        const double mid = cuts[k];
        out.push_back({cuts[k], cuts[k + 1], plant_mode_at(mid), controller_mode_at(mid)});
    }
    return out;
}

namespace {

void require_positive_lambdas(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "lambda1 and lambda2 must be positive");
}

double ratio_or_throw(double numerator, double denominator, const char* condition) {
    if (!(denominator > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "switching",
                    std::string("dwell-time denominator is non-positive (") + std::to_string(denominator) +
                        "); condition " + condition + " is violated");
    }
    if (std::isinf(denominator))
        return 0.0;
    return numerator / denominator;
}

} // namespace

double adt_bound_stability(const SynthesisConfig& cfg, double lambda1, double lambda2) {
    require_positive_lambdas(lambda1, lambda2);
    if (!(cfg.c2 > cfg.c1) || !(cfg.c1 > 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "need c2 > c1 > 0");
    const double L = switching_cost(cfg);
    const double den = std::log(lambda1 * cfg.c2) - std::log(lambda2 * cfg.c1) + cfg.alpha * cfg.T - L * cfg.N0;
    return ratio_or_throw(cfg.T * L, den, "lambda2 c1 e^(L N0 - alpha T) < lambda1 c2");
}

double adt_bound_bounded(const SynthesisConfig& cfg, double lambda1, double lambda2) {
    require_positive_lambdas(lambda1, lambda2);
    if (!(cfg.c2 > cfg.c1) || !(cfg.c1 >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "need c2 > c1 >= 0");
    const double L = switching_cost(cfg);
    const double inner = lambda2 * cfg.c1 * std::exp(-cfg.alpha * cfg.T) + cfg.gamma * cfg.gamma * cfg.d;
    const double den = std::log(lambda1 * cfg.c2) - std::log(inner) - L * cfg.N0;
    return ratio_or_throw(cfg.T * L, den, "lambda2 c1 e^(-alpha T) + gamma^2 d < c2 lambda1 e^(-L N0)");
}

double adt_bound_hinf(const SynthesisConfig& cfg, double lambda1) {
    require_positive_lambdas(lambda1, 1.0);
    const double L = switching_cost(cfg);
    const double g2d = cfg.gamma * cfg.gamma * cfg.d;
    if (!(g2d < cfg.c2 * lambda1 * std::exp(L * cfg.N0))) {
        throw Error(ErrorKind::InvalidArgument, "switching",
                    "condition gamma^2 d < c2 lambda1 e^(L N0) is violated");
    }
    const double den = std::log(lambda1 * cfg.c2) - std::log(g2d) - L * cfg.N0;
    const double first = ratio_or_throw(cfg.T * L, den, "gamma^2 d < c2 lambda1 e^(-L N0)");
    const double second = ((cfg.alpha + cfg.beta) * cfg.tau_d + std::log(cfg.mu)) / cfg.alpha;
    return std::max(first, second);
}

double gamma_s(const SynthesisConfig& cfg) {
    return std::exp(cfg.N0 * switching_cost(cfg) / 2.0 + cfg.alpha * cfg.T / 2.0) * cfg.gamma;
}

SwitchingSignal generate_adt_signal(double tau_a, double N0, double T, int mode_count, std::uint64_t seed,
                                    const GeneratorOptions& opts) {
    if (!(tau_a > 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "tau_a must be positive");
    if (!(T > 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "T must be positive");
    if (mode_count < 2)
        throw Error(ErrorKind::InvalidArgument, "switching", "need at least two modes");
    if (opts.initial_mode >= mode_count)
        throw Error(ErrorKind::InvalidArgument, "switching", "initial mode out of range");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick_any(0, mode_count - 1);
    std::uniform_int_distribution<int> pick_other(0, mode_count - 2);

    SwitchingSignal sig;
    sig.horizon = T;
    sig.modes.push_back(opts.initial_mode >= 0 ? opts.initial_mode : pick_any(rng));

    // A single switch already needs N0 >= 1; below that no switch fits.
    if (N0 < 1.0)
        return sig;

    // With g_k = k - t_k / tau_a every window [a, b] needs g_b - g_a <= N0 - 1,
    // so the earliest admissible t_b is tau_a (b + 1 - N0 - min_{a<b} g_a).
    double min_g = std::numeric_limits<double>::infinity();
    double prev = 0.0;
    for (std::size_t b = 0;; ++b) {
        double earliest = prev + opts.min_gap;
        if (b > 0)
            earliest = std::max(earliest, tau_a * (static_cast<double>(b) + 1.0 - N0 - min_g));
        const double t = earliest + opts.jitter * tau_a * unit(rng);
        if (!(t < T) || (b == 0 && !(t > 0.0)))
            break;
        if (b > 0 && !(t > prev))
            break;
        int next = pick_other(rng);
        if (next >= sig.modes.back())
            ++next;
        sig.times.push_back(t);
        sig.modes.push_back(next);
        min_g = std::min(min_g, static_cast<double>(b) - t / tau_a);
        prev = t;
    }

    const AdtValidation check = validate_adt(sig, tau_a, N0);
    if (!check.ok)
        throw Error(ErrorKind::Numerical, "switching", "generated signal failed its own dwell-time check");
    return sig;
}

AdtValidation validate_adt(const SwitchingSignal& signal, double tau_a, double N0) {
    AdtValidation out;
    if (signal.times.empty())
        return out;
    // max over a <= b of (g_b - g_a) via a running minimum of g_a.
    double best = -std::numeric_limits<double>::infinity();
    double min_g = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t b = 0; b < signal.times.size(); ++b) {
        const double g = static_cast<double>(b) - signal.times[b] / tau_a;
        if (g < min_g) {
            min_g = g;
            argmin = b;
        }
        const double excess = g - min_g - (N0 - 1.0);
        if (excess > best) {
            best = excess;
            out.first = argmin;
            out.last = b;
        }
    }
    out.count = static_cast<int>(out.last - out.first + 1);
    out.allowed = N0 + (signal.times[out.last] - signal.times[out.first]) / tau_a;
    out.excess = out.count - out.allowed;
    out.ok = out.excess <= 1e-12 * std::max(1.0, out.allowed);
    return out;
}

DelayedSignal delay_signal(const SwitchingSignal& signal, double tau_d, DelayMode mode, std::uint64_t seed) {
    if (!(tau_d >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "switching", "tau_d must be non-negative");
    for (std::size_t k = 1; k < signal.times.size(); ++k) {
        if (!(tau_d < signal.times[k] - signal.times[k - 1])) {
            throw Error(ErrorKind::InvalidArgument, "switching",
                        "tau_d " + std::to_string(tau_d) + " is not below the inter-switch gap at t=" +
                            std::to_string(signal.times[k - 1]));
        }
    }
    DelayedSignal out;
    out.base = signal;
    out.tau_d = tau_d;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < signal.times.size(); ++k) {
        // 1 - U[0,1) lies in (0, 1], so random lags stay in (0, tau_d].
        out.lags.push_back(mode == DelayMode::Constant ? tau_d : tau_d * (1.0 - unit(rng)));
    }
    return out;
}

} // namespace switchsynth
