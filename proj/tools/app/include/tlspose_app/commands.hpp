#ifndef TLSPOSE_APP_COMMANDS_HPP
#define TLSPOSE_APP_COMMANDS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlspose_app/checks.hpp"
#include "tlspose_app/io.hpp"

namespace tlspose::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitDegenerate = 3,
  kExitValidation = 4,
  kExitIo = 5,
};

/// Provenance written next to every output set.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  SolverConfig config;
  double wall_clock_seconds = 0.0;
};

Json manifest_to_json(const RunManifest& manifest);

/// Writes one noisy measurement set to out_path and a manifest to
/// out_path + ".manifest.json".
void cmd_simulate(const std::string& scenario, const std::string& out_path, std::uint64_t seed);

/// Solves a measurement file (or re-solves a solution report) and writes the
/// solution report. Returns the estimate for callers that inspect it.
PoseEstimate cmd_estimate(const std::string& measurement_path, const std::string& out_path,
                          const SolverConfig& config = {});

/// Names of the files cmd_montecarlo writes into its output directory.
std::vector<std::string> montecarlo_outputs(std::size_t pairs);

/// Runs the Monte-Carlo experiment and writes trials.csv, summary.json, the
/// plot-data CSVs and manifest.json into out_dir (created if missing).
MonteCarloReport cmd_montecarlo(const std::string& scenario, std::size_t trials, std::uint64_t seed,
                                const std::string& out_dir, const SolverConfig& config = {});

/// Runs the invariant suites for `sweep` consecutive seeds starting at seed,
/// printing one line per check. Returns true when every check passes.
bool cmd_validate(std::uint64_t seed, std::size_t sweep, std::ostream& out,
                  const CheckHooks& hooks = {});

/// Runs body and maps library and I/O errors to exit codes, printing the
/// message to err.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Parses and runs a command line; the testable core of the executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tlspose::app

#endif  // TLSPOSE_APP_COMMANDS_HPP
