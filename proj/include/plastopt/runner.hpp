#pragma once

#include <iosfwd>
#include <string>

#include "plastopt/config.hpp"
#include "plastopt/io.hpp"

namespace plastopt {

struct RunOutcome {
  int exit_code = 0;
  std::string manifest_path;
  Manifest manifest;
};

// Executes one batch mode (forward | optimize | lab) against a parsed config,
// writing all artifacts plus the manifest under out_dir. Never throws for
// solver failures; those surface as exit_code 2 with the error recorded in
// the manifest.
RunOutcome run(const RunConfig& cfg, const std::string& mode, const std::string& out_dir,
               const std::string& config_path);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Property suite on a built-in tiny fixture: local-map laws, return-map
// equivalence, energy bound, incremental stability, adjoint duality, finite
// differences. Every check is seconds-fast.
std::vector<CheckResult> self_check(unsigned long long seed);

// Runs self_check, logs one line per check, writes a report and manifest.
RunOutcome run_check(unsigned long long seed, const std::string& out_dir, std::ostream& log);

}  // namespace plastopt
