#pragma once

#include "fcvi/core.hpp"

namespace fcvi::verify {

struct SuiteResult {
    std::string name;
    std::size_t trials = 0;
    bool passed = false;
    std::string detail;
};

/// Randomized checks of the transformation's guarantees: distance preservation
/// for equal filters, the squared-distance expansion identity, cluster
/// separation at twice the threshold alpha, the retrieval-size formula rules,
/// and the optimal-alpha formula. `trials` scales the randomized suites.
/// Setting FCVI_VERIFY_FAULT=1 in the environment injects a failure (test hook
/// for the failure path).
std::vector<SuiteResult> run_all(std::uint64_t seed, std::size_t trials);

}  // namespace fcvi::verify
