#pragma once

#include <stdexcept>
#include <string>

namespace dtrl {

// Bad user-supplied values: unnormalized probabilities, labels out of range,
// malformed files.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Shape or axis mismatch between tensors, joints or layer specs.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Unusable configuration (non-positive budget, lr <= 0, missing lexicon, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a documented precondition.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Attack ran out of victim queries mid-operation.
struct QueryBudgetExhausted : std::runtime_error {
    int queries_used;
    explicit QueryBudgetExhausted(int used)
        : std::runtime_error("query budget exhausted after " + std::to_string(used) + " queries"),
          queries_used(used) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtrl
