#include "tvarx/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "tvarx/error.hpp"

namespace tvarx {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(path) && !force) {
    throw IoError("refusing to overwrite existing file " + path.string() + " (use --force)");
  }
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw IoError("output directory " + path.parent_path().string() + " does not exist");
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string signal_to_csv(const Signal& sig) {
  std::string out = "time_s,value\n";
  out.reserve(sig.size() * 48);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    out += format_number(sig.time_at(i));
    out += ',';
    out += format_number(sig[i]);
    out += '\n';
  }
  return out;
}

Signal signal_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty signal file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time_s,value") throw IoError("signal header must be 'time_s,value', got '" + line + "'");
  std::vector<double> times, values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw IoError("row " + std::to_string(row) + " must have exactly two fields");
    }
    times.push_back(parse_number(std::string_view(line).substr(0, comma)));
    values.push_back(parse_number(std::string_view(line).substr(comma + 1)));
  }
  if (values.empty()) throw IoError("signal file has no samples");
  if (values.size() < 2) throw IoError("a single sample does not define a sampling interval");
  const double t0 = times.front();
  const double ts = (times.back() - t0) / static_cast<double>(times.size() - 1);
  if (!(ts > 0.0)) throw IoError("time stamps must increase");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = t0 + static_cast<double>(i) * ts;
    if (std::abs(times[i] - expect) > 1e-6 * ts) {
      throw IoError("time stamps are not uniformly spaced near row " + std::to_string(i + 2));
    }
  }
  return Signal(std::move(values), ts, t0);
}

Signal read_signal_csv(const std::filesystem::path& path) {
  try {
    return signal_from_csv(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_signal_csv(const std::filesystem::path& path, const Signal& sig, bool force) {
  write_file_atomic(path, signal_to_csv(sig), force);
}

std::string grid_to_csv(std::string_view corner, std::span<const double> row_coords,
                        std::span<const double> col_coords, const Eigen::MatrixXd& values) {
  std::string out(corner);
  for (double c : col_coords) {
    out += ',';
    out += format_number(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < row_coords.size(); ++r) {
    out += format_number(row_coords[r]);
    for (std::size_t c = 0; c < col_coords.size(); ++c) {
      out += ',';
      out += format_number(values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)));
    }
    out += '\n';
  }
  return out;
}

std::string modal_to_csv(const std::vector<double>& times, const Eigen::MatrixXd& values) {
  std::string out = "mode\\time_s";
  for (double t : times) {
    out += ',';
    out += format_number(t);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out += std::to_string(r + 1);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out += ',';
      out += format_number(values(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string finite_or_empty(double v) { return std::isfinite(v) ? format_number(v) : std::string(); }

}  // namespace

std::string grid_results_to_csv(const std::vector<CandidateScore>& ranked) {
  std::string out = "na,nb,lambda,rss_sss,ess_sss,aic,bic,status,gap\n";
  for (const auto& c : ranked) {
    const bool ok = c.status == CandidateStatus::ok;
    out += std::to_string(c.structure.na) + ',';
    out += (c.structure.nb ? std::to_string(*c.structure.nb) : std::string()) + ',';
    out += format_number(c.structure.lambda) + ',';
    out += (ok ? finite_or_empty(c.rss_sss) : std::string()) + ',';
    out += (ok && c.ess_sss ? finite_or_empty(*c.ess_sss) : std::string()) + ',';
    out += (ok ? finite_or_empty(c.aic) : std::string()) + ',';
    out += (ok ? finite_or_empty(c.bic) : std::string()) + ',';
    out += ok ? "ok" : "diverged";
    out += ',';
    out += ok ? finite_or_empty(c.gap) : std::string();
    out += '\n';
  }
  return out;
}

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get_field<T>(j, key);
}

json structure_to_json(const ModelStructure& s) {
  json j;
  j["na"] = s.na;
  j["nb"] = s.nb ? json(*s.nb) : json(nullptr);
  j["lambda"] = s.lambda;
  return j;
}

ModelStructure structure_from_json(const json& j) {
  if (!j.is_object()) throw IoError("structure must be an object");
  ModelStructure s;
  s.na = get_field<int>(j, "na");
  if (j.contains("nb") && !j.at("nb").is_null()) s.nb = get_field<int>(j, "nb");
  s.lambda = get_field<double>(j, "lambda");
  return s;
}

json theta_to_json(const Eigen::MatrixXd& theta) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < theta.cols(); ++c) row.push_back(theta(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd theta_from_json(const json& j, std::size_t cols) {
  if (!j.is_array()) throw IoError("theta must be an array of rows");
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw IoError("theta row " + std::to_string(r) + " must hold " + std::to_string(cols) + " values");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw IoError("theta entries must be numbers");
      theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return theta;
}

std::vector<double> doubles_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw IoError(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw IoError(std::string(what) + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw IoError("synthesis config must be a JSON object");
  SynthConfig c;
  c.plate_length = get_field_or(j, "plate_length", c.plate_length);
  c.propagation_distance = get_field_or(j, "propagation_distance", c.propagation_distance);
  c.mode_velocities = get_field_or(j, "mode_velocities", c.mode_velocities);
  c.mode_amplitudes = get_field_or(j, "mode_amplitudes", c.mode_amplitudes);
  c.reflection_count = get_field_or(j, "reflection_count", c.reflection_count);
  c.reflection_decay = get_field_or(j, "reflection_decay", c.reflection_decay);
  c.temperature = get_field_or(j, "temperature", c.temperature);
  c.temp_ref = get_field_or(j, "temp_ref", c.temp_ref);
  c.delay_sensitivity = get_field_or(j, "delay_sensitivity", c.delay_sensitivity);
  c.amplitude_sensitivity = get_field_or(j, "amplitude_sensitivity", c.amplitude_sensitivity);
  c.noise_std = get_field_or(j, "noise_std", c.noise_std);
  c.seed = get_field_or<std::uint64_t>(j, "seed", c.seed);
  return c;
}

std::string synth_config_to_json(const SynthConfig& c) {
  json j;
  j["plate_length"] = c.plate_length;
  j["propagation_distance"] = c.propagation_distance;
  j["mode_velocities"] = c.mode_velocities;
  j["mode_amplitudes"] = c.mode_amplitudes;
  j["reflection_count"] = c.reflection_count;
  j["reflection_decay"] = c.reflection_decay;
  j["temperature"] = c.temperature;
  j["temp_ref"] = c.temp_ref;
  j["delay_sensitivity"] = c.delay_sensitivity;
  j["amplitude_sensitivity"] = c.amplitude_sensitivity;
  j["noise_std"] = c.noise_std;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::string model_to_json(const ParameterTrajectory& traj) {
  json j;
  j["structure"] = structure_to_json(traj.structure);
  j["ts"] = traj.ts;
  j["t0"] = traj.t0;
  j["theta"] = theta_to_json(traj.theta);
  j["sigma2e"] = traj.sigma2e;
  return j.dump() + "\n";
}

ParameterTrajectory model_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw IoError("model must be a JSON object");
  ParameterTrajectory t;
  t.structure = structure_from_json(j.contains("structure") ? j.at("structure") : json());
  t.ts = get_field<double>(j, "ts");
  t.t0 = get_field_or(j, "t0", 0.0);
  if (!j.contains("theta")) throw IoError("missing field 'theta'");
  if (t.structure.na < 1 || (t.structure.nb && *t.structure.nb < 0)) {
    throw ValidationError("model orders out of range");
  }
  t.theta = theta_from_json(j.at("theta"), t.structure.param_count());
  if (!j.contains("sigma2e")) throw IoError("missing field 'sigma2e'");
  t.sigma2e = doubles_from_json(j.at("sigma2e"), "sigma2e");
  t.validate();
  return t;
}

std::string surrogate_to_json(const SurrogateModel& m) {
  json j;
  j["structure"] = structure_to_json(m.structure);
  j["ts"] = m.ts;
  j["t0"] = m.t0;
  j["temps"] = m.temps;
  j["scheme"] = std::string(to_string(m.scheme));
  j["uniform_knots"] = m.uniform_knots();
  json trajs = json::array();
  json s2 = json::array();
  for (const auto& t : m.trajectories) {
    trajs.push_back(theta_to_json(t.theta));
    s2.push_back(t.sigma2e);
  }
  j["trajectories"] = std::move(trajs);
  j["sigma2e"] = std::move(s2);
  return j.dump() + "\n";
}

SurrogateModel surrogate_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw IoError("surrogate must be a JSON object");
  SurrogateModel m;
  m.structure = structure_from_json(j.contains("structure") ? j.at("structure") : json());
  m.ts = get_field<double>(j, "ts");
  m.t0 = get_field_or(j, "t0", 0.0);
  if (!j.contains("temps")) throw IoError("missing field 'temps'");
  m.temps = doubles_from_json(j.at("temps"), "temps");
  m.scheme = parse_scheme(get_field<std::string>(j, "scheme"));
  if (!j.contains("trajectories") || !j.at("trajectories").is_array()) {
    throw IoError("missing array 'trajectories'");
  }
  if (!j.contains("sigma2e") || !j.at("sigma2e").is_array()) throw IoError("missing array 'sigma2e'");
  const auto& trajs = j.at("trajectories");
  const auto& s2 = j.at("sigma2e");
  if (trajs.size() != s2.size()) throw IoError("trajectories and sigma2e counts differ");
  if (m.structure.na < 1 || (m.structure.nb && *m.structure.nb < 0)) {
    throw ValidationError("model orders out of range");
  }
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    ParameterTrajectory t;
    t.structure = m.structure;
    t.ts = m.ts;
    t.t0 = m.t0;
    t.theta = theta_from_json(trajs[i], m.structure.param_count());
    t.sigma2e = doubles_from_json(s2[i], "sigma2e");
    m.trajectories.push_back(std::move(t));
  }
  m.validate();
  return m;
}

}  // namespace tvarx
