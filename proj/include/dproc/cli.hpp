#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dproc::cli {

// Dispatches one command line (program name excluded), writing the JSON
// report to `out` and diagnostics to `err`.  Returns the process exit code:
// 0 when the command ran to completion (verdicts live in the report, never
// in the code), 2 on bad input (usage, parse, or validation errors), 1 on
// internal failures such as exhausted search budgets.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dproc::cli
