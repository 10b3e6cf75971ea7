#pragma once

#include <stdexcept>
#include <string>

namespace atomlaser {

/// Physical input outside the model's domain.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integration or quadrature failure. Carries the simulation time at which it happened.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    explicit NumericalError(const std::string& what)
        : std::runtime_error(what), time_(0.0) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Malformed or unknown configuration entry.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace atomlaser
