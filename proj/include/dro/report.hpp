#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dro/io.hpp"

namespace dro {

/// Machine-readable result of one CLI invocation: the command, a content
/// digest of the parsed inputs, named values rounded to 12 significant
/// digits, optional certificates (multipliers, couplings, divergence
/// witnesses), and per-phase timings. Two runs of the same command on the
/// same file produce identical reports except for the timing block.
struct Report {
  std::string command;
  std::string inputs_digest;
  Json values = Json::object();
  Json certificates = Json::object();
  Json timings = Json::object();

  Json to_json() const;
};

/// Exit codes: 0 success, 2 validation or usage error, 3 a result diverged
/// to infinity.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergent = 3;

/// Dispatches one command line (without the program name): writes the
/// report JSON to `out`, diagnostics to `err` (gated by DRO_LOG), and
/// returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a digest of a canonical serialization; hex string.
std::string content_digest(const Json& j);

/// Rounds to 12 significant digits for report output.
double round_sig(double v);

}  // namespace dro
