// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace eepn {

struct CriterionResult {
    std::string id;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<int> only;       ///< criterion numbers to run (6 covers 6a and 6b); empty runs all
    std::size_t n_seeds = 10;    ///< seeds for the statistical criteria 7 to 10
    std::uint64_t first_seed = 1;
    /// Called as each criterion finishes.
    std::function<void(const CriterionResult&)> on_result;
    /// Progress messages for the long runs.
    std::function<void(const std::string&)> on_progress;
};

/// Runs the acceptance criteria at their stated tolerances.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS [3] name: detail (1.2 s)".
[[nodiscard]] std::string format_result(const CriterionResult& r);

} // namespace eepn
