#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace ptlab::cli {

inline constexpr int kSchemaVersion = 1;

/// Exit codes of run().
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,        // bad flags, unknown config keys, --verify mismatch, I/O failure
  kDomain = 2,       // DomainError
  kConvergence = 3,  // ConvergenceError
};

/// Parameters of one invocation, flattened to flag-name -> value text.
/// The canonical form (sorted keys, output paths excluded) is what the
/// provenance hash covers.
struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> params;
  std::string format;  // csv | json | svg
  std::string out;     // file or directory; "-" is stdout

  nlohmann::json canonical() const;
};

/// Provenance block embedded in every artifact.
nlohmann::json provenance(const RunConfig& cfg);

/// FNV-1a over the canonical config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// key = value lines, '#' comments. Keys are flag names without dashes.
std::map<std::string, std::string> parse_config_file(const std::string& text);

/// Full command line, argv[0] excluded.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ptlab::cli
