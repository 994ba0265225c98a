#pragma once

// The eight end-to-end acceptance checks, shared by the test binary and the
// `verify-all` subcommand.

#include <map>
#include <string>
#include <vector>

namespace heunband {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::map<std::string, double> metrics;  // worst observed values
  std::vector<std::string> failures;      // named residuals that missed tolerance
  std::vector<std::string> notes;         // informational findings
};

CriterionResult check_discrete_pipeline();    // 1
CriterionResult check_kernel_forms();         // 2
CriterionResult check_duality();              // 3
CriterionResult check_antispin_algebra();     // 4
CriterionResult check_bilinear_failure();     // 5
CriterionResult check_pentadiagonal();        // 6
CriterionResult check_continuous_discrete();  // 7
CriterionResult check_symbolic();             // 8

std::vector<CriterionResult> run_acceptance();

/// "criterion N: PASS|FAIL  title"
std::string summary_line(const CriterionResult& r);

}  // namespace heunband
