#include "tlspose_app/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tlspose/errors.hpp"

namespace tlspose::app {

namespace {

std::string describe(const std::string& source, std::optional<std::size_t> line,
                     const std::string& field, const std::string& message) {
  std::string out = source;
  if (line) out += ":" + std::to_string(*line);
  if (!field.empty()) out += " at " + field;
  return out + ": " + message;
}

// Typed access to a JSON document that reports failures by JSON pointer.
class Reader {
 public:
  Reader(const Json& node, std::string pointer, const std::string& source)
      : node_(node), pointer_(std::move(pointer)), source_(source) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, std::nullopt, pointer_.empty() ? "/" : pointer_, message);
  }

  [[noreturn]] void fail_noise_model(const std::string& message) const {
    throw InvalidNoiseModelError(describe(source_, std::nullopt, pointer_, message));
  }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Reader at(const char* key) const {
    if (!node_.is_object()) fail("expected an object");
    if (!node_.contains(key)) child_pointer(key).fail("missing required field");
    return Reader(node_.at(key), pointer_ + "/" + key, source_);
  }

  Reader at(std::size_t index) const {
    return Reader(node_.at(index), pointer_ + "/" + std::to_string(index), source_);
  }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double v = node_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail("expected true or false");
    return node_.get<bool>();
  }

  std::int64_t integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer() const {
    if (!node_.is_number_unsigned() && !(node_.is_number_integer() && node_.get<std::int64_t>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return node_.get<std::uint64_t>();
  }

  Eigen::VectorXd numbers(std::size_t count) const {
    if (array_size() != count) fail("expected an array of " + std::to_string(count) + " numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = at(i).number();
    return v;
  }

  Vec3 vec3() const { return numbers(3); }

  template <int R, int C>
  Eigen::Matrix<double, R, C> matrix() const {
    const Eigen::VectorXd v = numbers(R * C);
    Eigen::Matrix<double, R, C> m;
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < C; ++c) m(r, c) = v(r * C + c);
    }
    return m;
  }

  void expect_format(const char* format) const {
    const std::string got = at("format").string();
    if (got != format) at("format").fail("expected \"" + std::string(format) + "\", got \"" + got + "\"");
    if (at("version").integer() != kFormatVersion) {
      at("version").fail("unsupported version");
    }
  }

  const std::string& pointer() const { return pointer_; }

 private:
  Reader child_pointer(const char* key) const {
    return Reader(node_, pointer_ + "/" + key, source_);
  }

  const Json& node_;
  std::string pointer_;
  const std::string& source_;
};

NoiseModel noise_from_json(const Reader& r) {
  const Mat6 joint = r.matrix<6, 6>();
  const NoiseModel noise = NoiseModel::from_joint(joint);
  try {
    noise.validate();
  } catch (const InvalidNoiseModelError& e) {
    r.fail_noise_model(e.what());
  }
  return noise;
}

Json vec_to_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

constexpr double kInputRotationTolerance = 1e-9;

}  // namespace

ParseError::ParseError(const std::string& source, std::optional<std::size_t> line,
                       std::string field, const std::string& message)
    : std::runtime_error(describe(source, line, field, message)),
      line_(line),
      field_(std::move(field)) {}

IoError::IoError(const std::string& path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(path) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end > 0 ? end - 1 : 0), '\n'));
    throw ParseError(source, line, "", "invalid JSON syntax");
  }
}

Scenario scenario_from_json(const Json& doc, const std::string& source) {
  const Reader root(doc, "", source);
  root.expect_format(kScenarioFormat);

  Scenario s;
  s.name = root.at("name").string();
  const Reader attitude = root.at("attitude");
  const Mat3 a = attitude.matrix<3, 3>();
  if (!is_rotation(a, kInputRotationTolerance)) attitude.fail("not a proper rotation matrix");
  s.truth = Pose{project_to_rotation(a), root.at("translation_p").vec3()};

  const Reader landmarks = root.at("landmarks");
  const Reader covariances = root.at("covariances");
  const std::size_t n = landmarks.array_size();
  if (n < 3) landmarks.fail("at least three landmarks are required");
  if (covariances.array_size() != n) covariances.fail("expected one covariance per landmark");

  for (std::size_t i = 0; i < n; ++i) {
    const Reader l = landmarks.at(i);
    const bool body = l.has("b_true");
    const bool reference = l.has("r_true");
    if (body == reference) l.fail("exactly one of b_true or r_true is required");
    s.landmarks.push_back(body ? Landmark{Side::body, l.at("b_true").vec3()}
                               : Landmark{Side::reference, l.at("r_true").vec3()});
    s.noise.push_back(noise_from_json(covariances.at(i)));
  }
  return s;
}

Json scenario_to_json(const Scenario& scenario) {
  Json landmarks = Json::array();
  Json covariances = Json::array();
  for (std::size_t i = 0; i < scenario.landmarks.size(); ++i) {
    const Landmark& l = scenario.landmarks[i];
    landmarks.push_back({{l.given == Side::body ? "b_true" : "r_true", vec_to_json(l.value)}});
    covariances.push_back(matrix_to_json(scenario.noise[i].joint()));
  }
  return Json{{"format", kScenarioFormat},
              {"version", kFormatVersion},
              {"name", scenario.name},
              {"attitude", matrix_to_json(scenario.truth.attitude.matrix())},
              {"translation_p", vec_to_json(scenario.truth.p)},
              {"landmarks", landmarks},
              {"covariances", covariances}};
}

Scenario load_scenario(const std::string& path_or_name) {
  if (path_or_name == kBuiltinScenario) return paper_scenario();
  return scenario_from_json(parse_json(read_file(path_or_name), path_or_name), path_or_name);
}

MeasurementSet measurements_from_json(const Json& doc, const std::string& source) {
  const Reader root(doc, "", source);
  const std::string format = root.at("format").string();
  if (format == kSolutionFormat) {
    root.expect_format(kSolutionFormat);
    return measurements_from_json(doc.at("input"), source);
  }
  root.expect_format(kMeasurementFormat);

  MeasurementSet set;
  set.name = root.at("name").string();
  if (root.has("seed") && !doc.at("seed").is_null()) set.seed = root.at("seed").unsigned_integer();
  const Reader obs = root.at("observations");
  const std::size_t n = obs.array_size();
  if (n < 3) obs.fail("at least three observation pairs are required");
  for (std::size_t i = 0; i < n; ++i) {
    const Reader o = obs.at(i);
    set.observations.push_back(
        ObservationPair{o.at("r_tilde").vec3(), o.at("b_tilde").vec3(), noise_from_json(o.at("covariance"))});
  }
  return set;
}

Json measurements_to_json(const MeasurementSet& set) {
  Json obs = Json::array();
  for (const ObservationPair& o : set.observations) {
    obs.push_back({{"r_tilde", vec_to_json(o.r_tilde)},
                   {"b_tilde", vec_to_json(o.b_tilde)},
                   {"covariance", matrix_to_json(o.noise.joint())}});
  }
  Json doc{{"format", kMeasurementFormat}, {"version", kFormatVersion}, {"name", set.name}};
  doc["seed"] = set.seed ? Json(*set.seed) : Json(nullptr);
  doc["observations"] = obs;
  return doc;
}

MeasurementSet load_measurements(const std::string& path) {
  return measurements_from_json(parse_json(read_file(path), path), path);
}

SolverConfig solver_config_from_json(const Json& doc, const std::string& source) {
  const Reader root(doc, "", source);
  if (!doc.is_object()) root.fail("expected an object");
  SolverConfig c;
  for (const auto& [key, value] : doc.items()) {
    const Reader r = root.at(key.c_str());
    if (key == "max_iterations") {
      c.max_iterations = static_cast<int>(r.integer());
    } else if (key == "step_tolerance") {
      c.step_tolerance = r.number();
    } else if (key == "cost_decrease_required") {
      c.cost_decrease_required = r.boolean();
    } else if (key == "damping_halvings_max") {
      c.damping_halvings_max = static_cast<int>(r.integer());
    } else {
      r.fail("unknown solver option");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    root.fail(e.what());
  }
  return c;
}

Json solver_config_to_json(const SolverConfig& config) {
  return Json{{"max_iterations", config.max_iterations},
              {"step_tolerance", config.step_tolerance},
              {"cost_decrease_required", config.cost_decrease_required},
              {"damping_halvings_max", config.damping_halvings_max}};
}

SolverConfig load_solver_config(const std::string& path) {
  return solver_config_from_json(parse_json(read_file(path), path), path);
}

Json pose_to_json(const Pose& pose) {
  const Vec3 rpy_deg = roll_pitch_yaw(pose.attitude) * (180.0 / std::numbers::pi);
  return Json{{"attitude", matrix_to_json(pose.attitude.matrix())},
              {"rpy_deg", vec_to_json(rpy_deg)},
              {"translation_p", vec_to_json(pose.p)},
              {"translation_t", vec_to_json(pose.conventional_translation())}};
}

Json diagnostics_to_json(const SolverDiagnostics& d) {
  return Json{{"iterations", d.iterations},
              {"converged", d.converged},
              {"final_cost", d.final_cost},
              {"final_gradient_norm", d.final_gradient_norm},
              {"step_history", d.step_history},
              {"cost_history", d.cost_history},
              {"reweighted_cost_history", d.reweighted_cost_history},
              {"halvings", d.halvings}};
}

Json covariance_report_to_json(const CovarianceReport& report) {
  Json obs = Json::array();
  for (const ObservationReport& o : report.observations) {
    obs.push_back({{"b_hat", vec_to_json(o.b_hat)},
                   {"r_hat", vec_to_json(o.r_hat)},
                   {"cov_resid_b", matrix_to_json(o.cov_resid_b)},
                   {"cov_resid_r", matrix_to_json(o.cov_resid_r)},
                   {"p_b", matrix_to_json(o.p_b)},
                   {"p_r", matrix_to_json(o.p_r)},
                   {"p_b_correlated", matrix_to_json(o.p_b_correlated)},
                   {"p_r_correlated", matrix_to_json(o.p_r_correlated)}});
  }
  return Json{{"p_delta_alpha", matrix_to_json(report.p_delta_alpha)},
              {"cov_p", matrix_to_json(report.cov_p)},
              {"p_f", matrix_to_json(report.p_f)},
              {"a_bar", matrix_to_json(report.a_bar)},
              {"s_lambda", matrix_to_json(report.s_lambda)},
              {"observations", obs}};
}

Json solution_to_json(const MeasurementSet& input, const PoseEstimate& estimate,
                      const CovarianceReport& covariance) {
  const Vec3 attitude_3sigma = 3.0 * covariance.p_delta_alpha.diagonal().cwiseSqrt();
  const Vec3 translation_3sigma = 3.0 * covariance.cov_p.diagonal().cwiseSqrt();
  return Json{{"format", kSolutionFormat},
              {"version", kFormatVersion},
              {"name", input.name},
              {"pose", pose_to_json(estimate.pose)},
              {"attitude_3sigma_rad", vec_to_json(attitude_3sigma)},
              {"translation_3sigma_m", vec_to_json(translation_3sigma)},
              {"covariance", covariance_report_to_json(covariance)},
              {"diagnostics", diagnostics_to_json(estimate.diagnostics)},
              {"input", measurements_to_json(input)}};
}

}  // namespace tlspose::app
