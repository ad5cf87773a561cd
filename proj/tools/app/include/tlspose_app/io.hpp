#ifndef TLSPOSE_APP_IO_HPP
#define TLSPOSE_APP_IO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlspose/covariance.hpp"
#include "tlspose/simulate.hpp"
#include "tlspose/solver.hpp"

namespace tlspose::app {

using Json = nlohmann::ordered_json;

/// Malformed input: a syntax error (with a 1-based line) or a schema
/// violation (with the JSON pointer of the offending field).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::optional<std::size_t> line, std::string field,
             const std::string& message);

  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::optional<std::size_t> line_;
  std::string field_;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

inline constexpr const char* kScenarioFormat = "tlspose-scenario";
inline constexpr const char* kMeasurementFormat = "tlspose-measurements";
inline constexpr const char* kSolutionFormat = "tlspose-solution";
inline constexpr int kFormatVersion = 1;

/// Name that selects the built-in three-landmark scenario.
inline constexpr const char* kBuiltinScenario = "paper";

struct MeasurementSet {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::vector<ObservationPair> observations;
};

std::string read_file(const std::string& path);
/// Writes atomically enough for tests: truncates and writes the whole string.
void write_file(const std::string& path, const std::string& content);

/// Serialized text of a document: two-space indent, trailing newline.
std::string dump(const Json& doc);

Json parse_json(const std::string& text, const std::string& source);

Scenario scenario_from_json(const Json& doc, const std::string& source);
Json scenario_to_json(const Scenario& scenario);
/// kBuiltinScenario or a path to a scenario file.
Scenario load_scenario(const std::string& path_or_name);

/// Accepts a measurement file or a solution report (which embeds its input).
MeasurementSet measurements_from_json(const Json& doc, const std::string& source);
Json measurements_to_json(const MeasurementSet& set);
MeasurementSet load_measurements(const std::string& path);

SolverConfig solver_config_from_json(const Json& doc, const std::string& source);
Json solver_config_to_json(const SolverConfig& config);
SolverConfig load_solver_config(const std::string& path);

Json pose_to_json(const Pose& pose);
Json diagnostics_to_json(const SolverDiagnostics& diagnostics);
Json covariance_report_to_json(const CovarianceReport& report);
Json solution_to_json(const MeasurementSet& input, const PoseEstimate& estimate,
                      const CovarianceReport& covariance);

Json matrix_to_json(const Eigen::MatrixXd& m);  // row-major flat array

}  // namespace tlspose::app

#endif  // TLSPOSE_APP_IO_HPP
