#pragma once

#include <stdexcept>

namespace pmlbie {

/// Bad input or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed its own diagnostics (maps to CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double magnitude = 0.0)
        : std::runtime_error(what), magnitude_(magnitude) {}
    double magnitude() const { return magnitude_; }

private:
    double magnitude_;
};

}  // namespace pmlbie
