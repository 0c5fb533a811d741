#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace quadforge::cli {

// Process exit codes (sysexits-style where one applies).
enum ExitCode : int {
  kOk = 0,
  kInexact = 1,
  kBudgetExhausted = 2,
  kInfeasible = 3,
  kUsage = 64,
  kDataError = 65,
  kNoInput = 66,
  kSoftware = 70,
};

/// Rules directory: $QUADFORGE_RULES_DIR, else the bundled directory.
std::filesystem::path rules_dir();

/// An existing path is returned as is; otherwise a bundled rule name such as
/// "2d_p5" resolves to <rules_dir>/2d_p5.json.
std::filesystem::path resolve_rule_path(const std::string& name_or_path);

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quadforge::cli
