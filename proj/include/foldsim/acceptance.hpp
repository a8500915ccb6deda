#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace foldsim {

enum class Tier { Fast, Full };

Tier tier_from_string(const std::string& s);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values against the thresholds
  double seconds = 0.0;
};

struct AcceptanceOptions {
  Tier tier = Tier::Fast;
  std::vector<int> only;  // criterion ids to run; empty: all
  int threads = 1;
  /// Progress lines (fold runs started and finished).
  std::function<void(const std::string&)> log;
};

/// Runs acceptance criteria 1 to 8. Fold runs shared between criteria are
/// computed once. A criterion that throws is reported as failed with the
/// exception message.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS|FAIL criterion <id> <name>: <detail>"
std::string format_result(const CriterionResult& r);

/// JSON array of {id, name, pass, detail, seconds}.
void write_acceptance_json(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace foldsim
