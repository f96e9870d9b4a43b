#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qlab {

struct CriterionInfo {
    int id = 0;
    std::string title;
    std::string tolerance;  // human-readable summary of the pinned tolerances
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::string measured;
    std::string tolerance;
    bool pass = false;
};

struct AcceptanceOptions {
    // Caustic threshold on |det dq/dq0| for every QA run in the suite.
    double caustic_threshold = 1e-3;
    // Restrict to these ids; empty runs everything.
    std::vector<int> only;
};

const std::vector<CriterionInfo>& acceptance_criteria();

// Runs the suite in id order. Exceptions inside a criterion become a failed result whose
// measured text carries the message. on_result fires as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result_line(const CriterionResult& r);

}  // namespace qlab
