#pragma once

#include <stdexcept>
#include <string>

namespace qbatt {

// Numerical failure taxonomy. Everything derives from std::runtime_error so a
// driver can catch one type and map it to an exit code.

struct DegenerateRoots : std::runtime_error {
    explicit DegenerateRoots(const std::string& what) : std::runtime_error(what) {}
};

struct ResidueError : std::runtime_error {
    explicit ResidueError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct HeisenbergViolation : std::runtime_error {
    explicit HeisenbergViolation(const std::string& what) : std::runtime_error(what) {}
};

struct DigammaDomain : std::runtime_error {
    explicit DigammaDomain(const std::string& what) : std::runtime_error(what) {}
};

struct PropagatorFailure : std::runtime_error {
    explicit PropagatorFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qbatt
