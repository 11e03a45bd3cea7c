#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kac {

/// One acceptance criterion outcome.  `margin` is the relative headroom to
/// the criterion's tolerance (positive = pass with room to spare).
struct CriterionResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::string details;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

/// Runs the acceptance suite.  "full" runs every criterion at its stated
/// parameters; "fast" substitutes a reduced Monte Carlo load for the two
/// expensive experiments so the whole suite finishes in well under two
/// minutes.  One line per criterion goes to `log`.
std::vector<CriterionResult> run_acceptance(const std::string& suite, std::ostream& log,
                                            int threads);

std::string acceptance_to_json(const std::vector<CriterionResult>& results,
                               const std::string& suite);

} // namespace kac
