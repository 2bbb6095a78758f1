#pragma once

// The acceptance matrix: thirteen end-to-end checks shared by the
// `validate` command and the acceptance test binary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace levyruin {

struct CriterionResult {
    int id = 0;
    std::string criterion;
    std::string target;  // human-readable target
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationOptions {
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    // Scales the Vigon ladder density by 1.01 so criterion 11 must fail.
    bool inject_fault = false;
};

inline constexpr int kCriterionCount = 13;

CriterionResult run_criterion(int id, const ValidationOptions& opts);
// Runs `ids` (all when empty) in order; `progress` sees each result as it lands.
std::vector<CriterionResult> run_validation(const ValidationOptions& opts, const std::vector<int>& ids = {},
                                            const std::function<void(const CriterionResult&)>& progress = {});

// One line: "[PASS] 3 saturation: observed=... tolerance=... (target ...)".
std::string format_result(const CriterionResult& r);
// JSON object with criterion,target,observed,tolerance,pass (+ id, detail, seconds).
std::string to_json(const CriterionResult& r);

}  // namespace levyruin
