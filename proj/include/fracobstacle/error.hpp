#pragma once

#include <stdexcept>
#include <string>

namespace fracobstacle {

/// Invalid parameters, malformed configuration, or violated modelling
/// assumptions. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a computation (non-finite data, solver
/// non-convergence, blow-up). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracobstacle
