#pragma once

#include <stdexcept>
#include <string>

namespace fdia {

// Malformed files, invalid arguments, violated preconditions. CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: singular or rank-deficient systems, divergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Proven infeasible optimisation problem. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fdia
