#include "tlspose_app/commands.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tlspose/errors.hpp"
#include "tlspose_app/format.hpp"

namespace tlspose::app {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  write_file(path, dump(manifest_to_json(manifest)));
}

// CSV assembly with shortest round-trip numbers and '\n' line endings.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) text_ += ',';
      text_ += header[i];
    }
    text_ += '\n';
  }

  CsvWriter& row_start(std::size_t trial) {
    text_ += std::to_string(trial);
    return *this;
  }
  CsvWriter& add(double v) {
    text_ += ',';
    text_ += format_double(v);
    return *this;
  }
  CsvWriter& add(const Vec3& v) { return add(v(0)).add(v(1)).add(v(2)); }
  void row_end() { text_ += '\n'; }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::vector<std::string> xyz(const std::string& prefix, const std::string& unit) {
  return {prefix + "_x_" + unit, prefix + "_y_" + unit, prefix + "_z_" + unit};
}

void append(std::vector<std::string>& to, const std::vector<std::string>& more) {
  to.insert(to.end(), more.begin(), more.end());
}

std::string trials_csv(const MonteCarloReport& report, std::size_t pairs) {
  std::vector<std::string> header{"trial",  "droll_deg", "dpitch_deg", "dyaw_deg",
                                  "dpx_m", "dpy_m",     "dpz_m"};
  for (std::size_t i = 1; i <= pairs; ++i) {
    const std::string k = std::to_string(i);
    append(header, xyz("b" + k + "_est_err", "m"));
    append(header, xyz("r" + k + "_est_err", "m"));
    append(header, xyz("b" + k + "_res", "m"));
    append(header, xyz("r" + k + "_res", "m"));
  }
  append(header, xyz("dalpha", "rad"));

  CsvWriter csv(header);
  for (const TrialRecord& r : report.records) {
    csv.row_start(r.trial).add(r.rpy_error_deg).add(r.delta_p);
    for (const PairErrors& e : r.pairs) {
      csv.add(e.b_estimate).add(e.r_estimate).add(e.b_residual).add(e.r_residual);
    }
    csv.add(r.delta_alpha).row_end();
  }
  return csv.text();
}

// Error trace of one quantity with constant +-3 sigma columns.
std::string plot_csv(const MonteCarloReport& report, const std::vector<std::string>& value_columns,
                     const Vec3& three_sigma,
                     const std::function<Vec3(const TrialRecord&)>& value) {
  std::vector<std::string> header{"trial"};
  append(header, value_columns);
  for (const std::string& c : value_columns) header.push_back(c + "_plus_3sigma");
  for (const std::string& c : value_columns) header.push_back(c + "_minus_3sigma");
  CsvWriter csv(header);
  for (const TrialRecord& r : report.records) {
    csv.row_start(r.trial).add(value(r)).add(three_sigma).add(Vec3(-three_sigma)).row_end();
  }
  return csv.text();
}

Vec3 three_sigma(const Mat3& cov) { return 3.0 * cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }

struct PlotFile {
  std::string name;
  std::string content;
};

std::vector<PlotFile> plot_files(const MonteCarloReport& report, std::size_t pairs) {
  std::vector<PlotFile> out;
  const Mat3& p_att = report.quantity(quantity_name_attitude()).analytic_truth;
  out.push_back({"plot_attitude_rpy.csv",
                 plot_csv(report, {"droll_deg", "dpitch_deg", "dyaw_deg"}, three_sigma(p_att) * kRadToDeg,
                          [](const TrialRecord& r) { return r.rpy_error_deg; })});
  out.push_back({"plot_translation.csv",
                 plot_csv(report, {"dpx_m", "dpy_m", "dpz_m"},
                          three_sigma(report.quantity(quantity_name_translation()).analytic_truth),
                          [](const TrialRecord& r) { return r.delta_p; })});
  struct Kind {
    const char* quantity;
    const char* file;
    Vec3 PairErrors::*member;
  };
  const Kind kinds[] = {{"b_est", "estimate", &PairErrors::b_estimate},
                        {"b_res", "residual", &PairErrors::b_residual},
                        {"r_est", "estimate", &PairErrors::r_estimate},
                        {"r_res", "residual", &PairErrors::r_residual}};
  for (std::size_t i = 0; i < pairs; ++i) {
    for (const Kind& k : kinds) {
      const std::string side(1, k.quantity[0]);
      const std::string stem = side + std::to_string(i + 1) + "_" + k.file;
      const Mat3& cov = report.quantity(quantity_name_pair(k.quantity, i)).analytic_truth;
      out.push_back({"plot_" + stem + ".csv",
                     plot_csv(report, {"x_m", "y_m", "z_m"}, three_sigma(cov),
                              [i, m = k.member](const TrialRecord& r) { return r.pairs[i].*m; })});
    }
  }
  return out;
}

Json vec_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

Json summary_json(const MonteCarloReport& report) {
  Json quantities = Json::array();
  for (const QuantityStatistics& q : report.quantities) {
    const Vec3 rel = q.empirical.diagonal().cwiseQuotient(q.analytic_truth.diagonal()) - Vec3::Ones();
    quantities.push_back({{"name", q.name},
                          {"mean", vec_json(q.mean)},
                          {"empirical", matrix_to_json(q.empirical)},
                          {"analytic_truth", matrix_to_json(q.analytic_truth)},
                          {"analytic_estimate", matrix_to_json(q.analytic_estimate)},
                          {"diagonal_relative_error", vec_json(rel)},
                          {"containment_3sigma", vec_json(q.containment)}});
  }
  Json cross = Json::array();
  for (std::size_t i = 0; i < report.cross_covariance.size(); ++i) {
    const CrossCovarianceCheck& c = report.cross_covariance[i];
    const double z = (c.empirical - c.analytic).cwiseAbs().cwiseQuotient(c.standard_error).maxCoeff();
    cross.push_back({{"pair", i + 1},
                     {"empirical", matrix_to_json(c.empirical)},
                     {"standard_error", matrix_to_json(c.standard_error)},
                     {"analytic", matrix_to_json(c.analytic)},
                     {"max_abs_z", z}});
  }
  Json doc{{"scenario", report.scenario},
           {"trials", report.trials},
           {"seed", report.seed},
           {"converged_trials", report.records.size()},
           {"divergence_count", report.diverged.size()},
           {"diverged_trials", report.diverged},
           {"quantities", quantities},
           {"attitude_noise_cross_covariance", cross}};
  if (!report.records.empty()) {
    doc["analytic_truth"] = covariance_report_to_json(report.analytic_truth);
    doc["analytic_estimate"] = covariance_report_to_json(report.analytic_estimate);
  }
  return doc;
}

std::string check_line(const CheckResult& c) {
  std::ostringstream line;
  line << (c.passed() ? "PASS " : "FAIL ") << c.name << " worst=" << format_double(c.worst)
       << " tol=" << format_double(c.tolerance) << " margin=" << std::setprecision(3)
       << c.margin() << " cases=" << c.cases;
  if (!c.passed()) line << " (" << c.detail << ")";
  return line.str();
}

}  // namespace

Json manifest_to_json(const RunManifest& m) {
  return Json{{"command", m.command},
              {"inputs", m.inputs},
              {"seed", m.seed},
              {"trials", m.trials},
              {"config", solver_config_to_json(m.config)},
              {"version", kVersion},
              {"wall_clock_seconds", m.wall_clock_seconds}};
}

void cmd_simulate(const std::string& scenario_path, const std::string& out_path, std::uint64_t seed) {
  const auto start = Clock::now();
  const Scenario scenario = load_scenario(scenario_path);
  scenario.validate();
  Rng rng(substream_seed(seed, 0));
  const MeasurementSet set{scenario.name, seed, draw_observations(scenario, rng)};
  write_file(out_path, dump(measurements_to_json(set)));
  write_manifest(out_path + ".manifest.json",
                 RunManifest{"simulate", {scenario_path}, seed, 1, SolverConfig{}, seconds_since(start)});
}

PoseEstimate cmd_estimate(const std::string& measurement_path, const std::string& out_path,
                          const SolverConfig& config) {
  const auto start = Clock::now();
  const MeasurementSet set = load_measurements(measurement_path);
  const PoseEstimate estimate = solve_pose(set.observations, config);
  const CovarianceReport covariance = covariance_report(estimate.pose, set.observations);
  write_file(out_path, dump(solution_to_json(set, estimate, covariance)));
  write_manifest(out_path + ".manifest.json",
                 RunManifest{"estimate", {measurement_path}, set.seed.value_or(0), 0, config,
                             seconds_since(start)});
  return estimate;
}

std::vector<std::string> montecarlo_outputs(std::size_t pairs) {
  std::vector<std::string> names{"trials.csv", "summary.json", "plot_attitude_rpy.csv",
                                 "plot_translation.csv"};
  for (std::size_t i = 1; i <= pairs; ++i) {
    for (const char* side : {"b", "r"}) {
      for (const char* kind : {"estimate", "residual"}) {
        names.push_back("plot_" + std::string(side) + std::to_string(i) + "_" + kind + ".csv");
      }
    }
  }
  names.push_back("manifest.json");
  return names;
}

MonteCarloReport cmd_montecarlo(const std::string& scenario_path, std::size_t trials,
                                std::uint64_t seed, const std::string& out_dir,
                                const SolverConfig& config) {
  const auto start = Clock::now();
  const Scenario scenario = load_scenario(scenario_path);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create output directory: " + ec.message());

  MonteCarloReport report = run_monte_carlo(scenario, trials, seed, config);
  const std::filesystem::path dir(out_dir);
  const std::size_t pairs = scenario.landmarks.size();
  write_file((dir / "trials.csv").string(), trials_csv(report, pairs));
  write_file((dir / "summary.json").string(), dump(summary_json(report)));
  if (!report.records.empty()) {
    for (const PlotFile& f : plot_files(report, pairs)) write_file((dir / f.name).string(), f.content);
  }
  write_manifest((dir / "manifest.json").string(),
                 RunManifest{"montecarlo", {scenario_path}, seed, trials, config, seconds_since(start)});
  return report;
}

bool cmd_validate(std::uint64_t seed, std::size_t sweep, std::ostream& out, const CheckHooks& hooks) {
  bool ok = true;
  for (std::size_t s = 0; s < sweep; ++s) {
    const std::uint64_t current = seed + s;
    out << "seed " << current << "\n";
    for (const CheckResult& c : run_validation(current, hooks)) {
      out << "  " << check_line(c) << "\n";
      ok = ok && c.passed();
    }
  }
  out << (ok ? "all checks passed" : "validation FAILED") << "\n";
  return ok;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidNoiseModelError& e) {
    err << "invalid noise model: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const DegenerateGeometryError& e) {
    err << "degenerate geometry: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const SingularWeightError& e) {
    err << "singular weight: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Total-least-squares pose estimation with first-order covariance analysis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string scenario = kBuiltinScenario;
  std::string out_path;
  std::string config_path;
  std::string input_path;
  std::uint64_t seed = 1;
  std::size_t trials = 10000;
  std::size_t sweep = 1;

  CLI::App* simulate = app.add_subcommand("simulate", "Draw one noisy measurement set from a scenario");
  simulate->add_option("--scenario", scenario, "Scenario file or \"paper\"")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", out_path, "Measurement file to write")->required();

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate the pose and covariances from measurements");
  estimate->add_option("measurements", input_path, "Measurement file or solution report")->required();
  estimate->add_option("--out", out_path, "Solution report to write")->required();
  estimate->add_option("--config", config_path, "Solver configuration file");

  CLI::App* montecarlo = app.add_subcommand("montecarlo", "Run a seeded Monte-Carlo experiment");
  montecarlo->add_option("--scenario", scenario, "Scenario file or \"paper\"")->capture_default_str();
  montecarlo->add_option("--trials", trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
  montecarlo->add_option("--seed", seed, "Random seed")->capture_default_str();
  montecarlo->add_option("--out", out_path, "Output directory")->required();
  montecarlo->add_option("--config", config_path, "Solver configuration file");

  CLI::App* validate = app.add_subcommand("validate", "Run the built-in invariant checks");
  validate->add_option("--seed", seed, "First seed")->capture_default_str();
  validate->add_option("--sweep", sweep, "Number of consecutive seeds")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  return run_guarded(
      [&]() -> int {
        const SolverConfig config = config_path.empty() ? SolverConfig{} : load_solver_config(config_path);
        if (*simulate) {
          cmd_simulate(scenario, out_path, seed);
          out << "wrote " << out_path << "\n";
        } else if (*estimate) {
          const PoseEstimate e = cmd_estimate(input_path, out_path, config);
          if (!e.diagnostics.converged) {
            err << "warning: solver did not converge after " << e.diagnostics.iterations
                << " iterations\n";
          }
          out << "wrote " << out_path << "\n";
        } else if (*montecarlo) {
          const MonteCarloReport r = cmd_montecarlo(scenario, trials, seed, out_path, config);
          out << "trials " << r.trials << ", diverged " << r.diverged.size() << ", wrote " << out_path
              << "\n";
        } else if (*validate) {
          return cmd_validate(seed, sweep, out) ? kExitOk : kExitValidation;
        }
        return kExitOk;
      },
      err);
}

}  // namespace tlspose::app
