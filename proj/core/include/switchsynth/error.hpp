#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchsynth {

enum class ErrorKind {
    Dimension,
    InvalidArgument,
    NonFinite,
    Numerical,
    Infeasible,
    Diverged,
    Config,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

// Every failure in the library surfaces as this type. `stage` names the
// pipeline stage (e.g. "model", "lmi", "solver") so callers can route it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string stage, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    ErrorKind kind_;
    std::string stage_;
};

} // namespace switchsynth
