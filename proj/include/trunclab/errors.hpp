#pragma once
#include <stdexcept>
#include <string>

namespace trunclab {

// Input or file rejected before any work was done.
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A configured resource limit (memory, nodes, candidates) was exhausted.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint failed its load-time invariant or kind/version check.
struct CheckpointError : ValidationError {
    explicit CheckpointError(const std::string& msg) : ValidationError(msg) {}
};

// Requested precision cannot be met with the configured grid.
struct PrecisionError : std::runtime_error {
    explicit PrecisionError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace trunclab
