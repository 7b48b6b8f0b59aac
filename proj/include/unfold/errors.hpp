#pragma once

#include <stdexcept>
#include <string>

namespace unfold {

// Bad inputs: configs, precondition violations. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: Newton divergence, missing intersection, orbit escape.
// CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A structural property that must hold by construction failed. CLI exit code 4.
class PropertyError : public std::runtime_error {
public:
    explicit PropertyError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace unfold
