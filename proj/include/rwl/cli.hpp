#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rwl::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalError = 3,
  kStatisticalError = 4,
};

/// Header line of every CSV file written by the tool.
inline constexpr const char* kCsvVersionLine = "# rough-weak-lab v1";

/// Runs one subcommand (lemma1, gn, cov, weak-error, oracle, rate). args excludes the
/// program name. Results go to --out or `out`; diagnostics to `err` as "ERROR:<code>:...".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rwl::cli
