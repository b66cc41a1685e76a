#include "tvarx/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvarx/error.hpp"
#include "tvarx/frozen.hpp"
#include "tvarx/io.hpp"
#include "tvarx/nonparametric.hpp"
#include "tvarx/rml.hpp"
#include "tvarx/selection.hpp"
#include "tvarx/signal.hpp"
#include "tvarx/surrogate.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv("TVARX_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void require_input(const std::string& path) {
  if (!fs::exists(path)) throw IoError("input file " + path + " does not exist");
}

void require_output(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw IoError("refusing to overwrite existing file " + path.string() + " (use --force)");
  }
  if (path.has_parent_path() && !fs::is_directory(path.parent_path())) {
    throw IoError("output directory " + path.parent_path().string() + " does not exist");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

int parse_int(const std::string& s) {
  const double v = parse_number(s);
  if (v != std::floor(v)) throw ValidationError("expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

/// "a" or "a:b" (inclusive).
std::vector<int> parse_int_range(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() == 1) return {parse_int(p[0])};
  if (p.size() == 2) return int_range(parse_int(p[0]), parse_int(p[1]));
  throw ValidationError("integer range must be 'lo' or 'lo:hi', got '" + s + "'");
}

/// "v", "lo:hi" with a separate step, or "lo:hi:step".
std::vector<double> parse_lambda_range(const std::string& s, double step) {
  const auto p = split(s, ':');
  if (p.size() == 1) return {parse_number(p[0])};
  if (p.size() == 2) return lambda_range(parse_number(p[0]), parse_number(p[1]), step);
  if (p.size() == 3) return lambda_range(parse_number(p[0]), parse_number(p[1]), parse_number(p[2]));
  throw ValidationError("lambda range must be 'v', 'lo:hi' or 'lo:hi:step', got '" + s + "'");
}

std::string report_line(const std::string& key, const std::string& value) {
  return key + ": " + value + "\n";
}

std::string report_line(const std::string& key, double value) {
  return report_line(key, format_number(value));
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + suffix);
  return out;
}

struct Common {
  bool force = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out;
  std::string actuation_out;
};

int cmd_synth(const SynthArgs& a, const Common& c, std::ostream& out) {
  require_input(a.config);
  require_output(a.out, c.force);
  if (!a.actuation_out.empty()) require_output(a.actuation_out, c.force);

  const std::string text = read_file(a.config);
  SynthConfig cfg = synth_config_from_json(text);
  if (c.seed_given) cfg.seed = c.seed;
  json extra;
  try {
    extra = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  auto num = [&](const char* key, double fallback) {
    if (!extra.contains(key) || extra.at(key).is_null()) return fallback;
    if (!extra.at(key).is_number()) throw IoError(std::string("field '") + key + "' must be a number");
    return extra.at(key).get<double>();
  };
  const int cycles = static_cast<int>(num("burst_cycles", 5));
  const double fc = num("center_frequency", 250e3);
  const double amp = num("burst_amplitude", 1.0);
  const double ts = num("ts", 1.0 / 24e6);
  const int factor = static_cast<int>(num("decimation", 12));
  const double burst_s = static_cast<double>(tone_burst_length(cycles, fc, ts)) * ts;
  cfg.validate();
  if (factor < 1) throw ValidationError("decimation factor must be >= 1");
  const auto length = static_cast<std::size_t>(num("length", 0));
  std::size_t crop_start = static_cast<std::size_t>(num("crop_start", 0));
  const bool tof = extra.contains("crop_time_of_flight") && extra.at("crop_time_of_flight").is_boolean() &&
                   extra.at("crop_time_of_flight").get<bool>();
  const double ts_out = ts * factor;
  if (tof) {
    // First-mode arrival at the reference temperature.
    crop_start = static_cast<std::size_t>(
        std::floor(cfg.propagation_distance / cfg.mode_velocities.front() / ts_out));
  }
  double duration = cfg.latest_arrival() + 2.0 * burst_s;
  if (length > 0) {
    duration = std::max(duration, static_cast<double>(crop_start + length + 1) * ts_out);
  }
  duration = num("duration", duration);

  const Signal burst = tone_burst(cycles, fc, amp, ts);
  const Signal raw = synth_guided_wave(cfg, burst, duration);
  const Signal dec = decimate(raw, factor);
  const Signal y = crop(dec, crop_start, length);
  write_signal_csv(a.out, y, c.force);

  if (!a.actuation_out.empty()) {
    const Signal act = decimate(fit_length(burst, raw.size()), factor);
    Signal x = fit_length(act, y.size());
    x = Signal(std::vector<double>(x.samples().begin(), x.samples().end()), y.ts(), y.t0());
    write_signal_csv(a.actuation_out, x, c.force);
  }
  out << "N=" << y.size() << " ts=" << format_number(y.ts())
      << " temperature=" << format_number(cfg.temperature) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- identify

struct IdentifyArgs {
  std::string y, x, out, residuals, report;
  int na = 6;
  int nb = -1;
  double lambda = 0.6;
  std::string passes = "three_pass";
  double alpha = 1e4;
  std::size_t window_m = 10;
};

ModelStructure make_structure(int na, int nb, double lambda) {
  ModelStructure s;
  s.na = na;
  if (nb >= 0) s.nb = nb;
  s.lambda = lambda;
  s.validate();
  return s;
}

std::string fit_report(const ModelStructure& s, std::span<const double> residuals,
                       std::span<const double> sigma2e, std::span<const double> y) {
  const std::size_t skip = std::min(s.transient(), y.size() - 1);
  const double rss = rss_sss(residuals.subspan(skip), y.subspan(skip));
  const double ll = gaussian_loglik(residuals, sigma2e);
  std::string r;
  r += report_line("structure", s.label());
  r += report_line("samples", std::to_string(y.size()));
  r += report_line("rss_sss", rss);
  r += report_line("rss_sss_percent", 100.0 * rss);
  r += report_line("loglik", ll);
  r += report_line("aic", aic(ll, s.param_count()));
  r += report_line("bic", bic(ll, s.param_count(), y.size()));
  return r;
}

int cmd_identify(const IdentifyArgs& a, const Common& c, std::ostream& out) {
  const ModelStructure s = make_structure(a.na, a.nb, a.lambda);
  EstimationOptions opts;
  opts.alpha = a.alpha;
  opts.passes = parse_passes(a.passes);
  opts.variance_window_M = a.window_m;
  opts.validate();

  require_input(a.y);
  if (!a.x.empty()) require_input(a.x);
  if (s.has_x() && a.x.empty()) throw ValidationError(s.label() + " needs --x");
  if (!s.has_x() && !a.x.empty()) throw ValidationError("--x given but no --nb");
  const fs::path model_path = a.out;
  const fs::path res_path = a.residuals.empty() ? sibling(model_path, "_residuals.csv") : fs::path(a.residuals);
  const fs::path rep_path = a.report.empty() ? sibling(model_path, "_report.txt") : fs::path(a.report);
  require_output(model_path, c.force);
  require_output(res_path, c.force);
  require_output(rep_path, c.force);

  const Signal y = read_signal_csv(a.y);
  std::optional<Signal> x;
  if (!a.x.empty()) x = read_signal_csv(a.x);
  require_identifiable(s, y.size());

  const auto est = estimate(y, x ? &*x : nullptr, s, opts);
  std::string report = fit_report(s, est.residuals, est.trajectory.sigma2e, y.samples());
  report += report_line("passes", std::string(to_string(opts.passes)));
  report += report_line("alpha", opts.alpha);

  write_file_atomic(model_path, model_to_json(est.trajectory), c.force);
  write_signal_csv(res_path, Signal(est.residuals, y.ts(), y.t0()), c.force);
  write_file_atomic(rep_path, report, c.force);
  out << report;
  return kOk;
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  std::string y, x, out;
  std::string na_range = "2:22";
  std::string nb_range;
  std::string lambda_range = "0.5:0.999";
  double lambda_step = 0.001;
  std::string criterion = "bic";
  std::string passes = "three_pass";
  double alpha = 1e4;
  std::size_t window_m = 10;
  std::size_t jobs = 0;
  bool count_only = false;
};

int cmd_select(const SelectArgs& a, const Common& c, std::ostream& out) {
  StructureGrid grid;
  grid.na = parse_int_range(a.na_range);
  if (!a.nb_range.empty()) grid.nb = parse_int_range(a.nb_range);
  grid.lambda = parse_lambda_range(a.lambda_range, a.lambda_step);
  const Criterion crit = parse_criterion(a.criterion);
  for (const auto& s : grid.structures()) s.validate();
  if (a.count_only) {
    out << "candidates: " << grid.size() << "\n";
    return kOk;
  }
  EstimationOptions opts;
  opts.alpha = a.alpha;
  opts.passes = parse_passes(a.passes);
  opts.variance_window_M = a.window_m;

  require_input(a.y);
  if (!a.x.empty()) require_input(a.x);
  require_output(a.out, c.force);
  const Signal y = read_signal_csv(a.y);
  std::optional<Signal> x;
  if (!a.x.empty()) x = read_signal_csv(a.x);
  for (const auto& s : grid.structures()) require_identifiable(s, y.size());

  const auto ranked =
      grid_search(y, x ? &*x : nullptr, grid, crit, opts, a.jobs == 0 ? default_jobs() : a.jobs);
  write_file_atomic(a.out, grid_results_to_csv(ranked), c.force);

  const auto& best = ranked.front();
  const auto pick = parsimonious_choice(ranked);
  out << report_line("candidates", std::to_string(ranked.size()));
  out << report_line("criterion", std::string(to_string(crit)));
  out << report_line("best", best.structure.label());
  out << report_line("best_score", best.score(crit));
  out << report_line("parsimonious", ranked[pick].structure.label());
  out << report_line("parsimonious_gap", ranked[pick].gap);
  return kOk;
}

// ---------------------------------------------------------------- predict / simulate

struct PredictArgs {
  std::string model, y, x, out, residuals;
};

int cmd_predict(const PredictArgs& a, const Common& c, std::ostream& out) {
  require_input(a.model);
  require_input(a.y);
  if (!a.x.empty()) require_input(a.x);
  const fs::path res_path = a.residuals.empty() ? sibling(a.out, "_residuals.csv") : fs::path(a.residuals);
  require_output(a.out, c.force);
  require_output(res_path, c.force);
  const auto traj = model_from_json(read_file(a.model));
  const Signal y = read_signal_csv(a.y);
  std::optional<Signal> x;
  if (!a.x.empty()) x = read_signal_csv(a.x);
  const auto pr = predict_one_step(traj, y, x ? &*x : nullptr);
  write_signal_csv(a.out, pr.predicted, c.force);
  write_signal_csv(res_path, pr.residuals, c.force);
  out << report_line("structure", traj.structure.label());
  out << report_line("rss_sss", pr.rss_sss);
  return kOk;
}

struct SimulateArgs {
  std::string model, x, noise, out;
  double noise_std = 0.0;
};

int cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
  require_input(a.model);
  require_input(a.x);
  if (!a.noise.empty()) require_input(a.noise);
  if (!a.noise.empty() && a.noise_std > 0.0) throw ValidationError("give either --noise or --noise-std");
  if (a.noise_std < 0.0) throw ValidationError("--noise-std must be >= 0");
  require_output(a.out, c.force);
  const auto traj = model_from_json(read_file(a.model));
  const Signal x = read_signal_csv(a.x);
  std::optional<Signal> noise;
  if (!a.noise.empty()) noise = read_signal_csv(a.noise);
  if (a.noise_std > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd(0.0, a.noise_std);
    std::vector<double> e(x.size());
    for (double& v : e) v = nd(rng);
    noise = Signal(std::move(e), x.ts(), x.t0());
  }
  const Signal y = simulate(traj, x, noise ? &*noise : nullptr);
  write_signal_csv(a.out, y, c.force);
  out << report_line("structure", traj.structure.label());
  out << report_line("samples", std::to_string(y.size()));
  return kOk;
}

// ---------------------------------------------------------------- spectral

struct SpectralArgs {
  std::string model, out_dir, freq_grid;
  bool track = false;
};

int cmd_spectral(const SpectralArgs& a, const Common& c, std::ostream& out) {
  require_input(a.model);
  if (!fs::is_directory(a.out_dir)) throw IoError("output directory " + a.out_dir + " does not exist");
  const fs::path dir = a.out_dir;
  const auto traj = model_from_json(read_file(a.model));
  const bool frf = traj.structure.has_x();
  std::vector<fs::path> outputs = {dir / "psd.csv", dir / "modal_frequency.csv",
                                   dir / "modal_damping.csv", dir / "modal_magnitude.csv"};
  if (frf) outputs.push_back(dir / "frf.csv");
  for (const auto& p : outputs) require_output(p, c.force);

  std::vector<double> freqs;
  if (a.freq_grid.empty()) {
    freqs = uniform_freq_grid(traj.ts, 501);
  } else {
    const auto p = split(a.freq_grid, ':');
    if (p.size() != 3) throw ValidationError("--freq-grid must be 'lo:hi:count'");
    const double lo = parse_number(p[0]), hi = parse_number(p[1]);
    const int count = parse_int(p[2]);
    if (count < 2 || !(hi > lo)) throw ValidationError("--freq-grid needs hi > lo and count >= 2");
    for (int i = 0; i < count; ++i) freqs.push_back(lo + (hi - lo) * i / (count - 1));
    freqs.back() = hi;
  }
  const FrozenGrid g = frf ? frozen_frf(traj, freqs) : frozen_psd(traj, freqs);
  ModalTrack m = frozen_modes(traj);
  if (a.track) m = track_modes(m);

  write_file_atomic(outputs[0], grid_to_csv("time_s\\freq_hz", g.times, g.freqs, g.psd), c.force);
  write_file_atomic(outputs[1], modal_to_csv(m.times, m.frequencies), c.force);
  write_file_atomic(outputs[2], modal_to_csv(m.times, m.dampings), c.force);
  write_file_atomic(outputs[3], modal_to_csv(m.times, m.pole_magnitudes), c.force);
  if (frf) write_file_atomic(outputs[4], grid_to_csv("time_s\\freq_hz", g.times, g.freqs, *g.frf_mag), c.force);

  std::size_t marginal = 0;
  for (Eigen::Index i = 0; i < m.marginal.size(); ++i) marginal += m.marginal.data()[i] ? 1 : 0;
  out << report_line("structure", traj.structure.label());
  out << report_line("modes", std::to_string(m.mode_rows()));
  out << report_line("freqs", std::to_string(freqs.size()));
  out << report_line("singular_points", std::to_string(g.singular.size()));
  out << report_line("marginal_poles", std::to_string(marginal));
  out << report_line("failed_instants", std::to_string(m.failed.size()));
  return kOk;
}

struct SpectrogramArgs {
  std::string y, out;
  std::size_t window = 30;
  double overlap = 0.98;
  std::size_t nfft_mult = 100;
};

int cmd_spectrogram(const SpectrogramArgs& a, const Common& c, std::ostream& out) {
  require_input(a.y);
  require_output(a.out, c.force);
  const Signal y = read_signal_csv(a.y);
  SpectrogramOptions o{a.window, a.overlap, a.nfft_mult};
  const auto g = spectrogram(y, o);
  write_file_atomic(a.out, grid_to_csv("time_s\\freq_hz", g.times, g.freqs, g.values), c.force);
  out << report_line("window", std::to_string(o.window_len));
  out << report_line("overlap", o.overlap_fraction);
  out << report_line("nfft", std::to_string(o.window_len * o.nfft_multiple));
  out << report_line("hop", std::to_string(spectrogram_hop(o)));
  out << report_line("frames", std::to_string(g.times.size()));
  out << report_line("bins", std::to_string(g.freqs.size()));
  out << report_line("freq_resolution_hz", g.freq_resolution);
  return kOk;
}

// ---------------------------------------------------------------- surrogate

struct SurrogateArgs {
  std::string input, out, x, y_ref, scheme;
  double temp = std::nan("");
  std::size_t jobs = 0;
};

int cmd_surrogate_build(const SurrogateArgs& a, const Common& c, std::ostream& out) {
  require_input(a.input);
  require_output(a.out, c.force);
  json j;
  try {
    j = json::parse(read_file(a.input));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest JSON: ") + e.what());
  }
  try {
    const auto& st = j.at("structure");
    const int nb = st.contains("nb") && !st.at("nb").is_null() ? st.at("nb").get<int>() : -1;
    const ModelStructure s = make_structure(st.at("na").get<int>(), nb, st.at("lambda").get<double>());
    if (!s.has_x()) throw ValidationError("a surrogate needs a TARX structure");
    EstimationOptions opts;
    if (j.contains("options")) {
      const auto& o = j.at("options");
      if (o.contains("alpha")) opts.alpha = o.at("alpha").get<double>();
      if (o.contains("variance_window_M")) opts.variance_window_M = o.at("variance_window_M").get<std::size_t>();
    }
    Scheme scheme = Scheme::linear;
    if (!a.scheme.empty()) {
      scheme = parse_scheme(a.scheme);
    } else if (j.contains("scheme")) {
      scheme = parse_scheme(j.at("scheme").get<std::string>());
    }
    const fs::path base = fs::path(a.input).parent_path();
    std::vector<TemperatureRecord> recs;
    for (const auto& e : j.at("signals")) {
      const fs::path yp = base / e.at("y").get<std::string>();
      const fs::path xp = base / e.at("x").get<std::string>();
      require_input(yp.string());
      require_input(xp.string());
      recs.push_back({e.at("temp").get<double>(), read_signal_csv(yp), read_signal_csv(xp)});
    }
    for (const auto& r : recs) require_identifiable(s, r.y.size());
    const auto m = build_surrogate(std::move(recs), s, opts, scheme, a.jobs == 0 ? default_jobs() : a.jobs);
    write_file_atomic(a.out, surrogate_to_json(m), c.force);
    out << report_line("structure", s.label());
    out << report_line("temperatures", std::to_string(m.temps.size()));
    out << report_line("scheme", std::string(to_string(m.scheme)));
    out << report_line("samples", std::to_string(m.length()));
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid manifest: ") + e.what());
  }
  return kOk;
}

int cmd_surrogate_query(const SurrogateArgs& a, const Common& c, std::ostream& out) {
  require_input(a.input);
  require_input(a.x);
  require_output(a.out, c.force);
  if (!std::isfinite(a.temp)) throw ValidationError("--temp is required");
  const auto m = surrogate_from_json(read_file(a.input));
  const Scheme scheme = a.scheme.empty() ? m.scheme : parse_scheme(a.scheme);
  const Signal x = read_signal_csv(a.x);
  const Signal y = simulate_at_temperature(m, a.temp, scheme, x);
  write_signal_csv(a.out, y, c.force);
  out << report_line("temperature", a.temp);
  out << report_line("scheme", std::string(to_string(scheme)));
  out << report_line("samples", std::to_string(y.size()));
  return kOk;
}

int cmd_surrogate_eval(const SurrogateArgs& a, const Common& c, std::ostream& out) {
  require_input(a.input);
  require_input(a.x);
  require_input(a.y_ref);
  if (!a.out.empty()) require_output(a.out, c.force);
  if (!std::isfinite(a.temp)) throw ValidationError("--temp is required");
  const auto m = surrogate_from_json(read_file(a.input));
  const Scheme scheme = a.scheme.empty() ? m.scheme : parse_scheme(a.scheme);
  const Signal x = read_signal_csv(a.x);
  const Signal y = read_signal_csv(a.y_ref);
  const double e = evaluate_surrogate(m, a.temp, scheme, x, y);
  std::string report;
  report += report_line("temperature", a.temp);
  report += report_line("scheme", std::string(to_string(scheme)));
  report += report_line("ess_sss", e);
  report += report_line("ess_sss_percent", 100.0 * e);
  if (!a.out.empty()) write_file_atomic(a.out, report, c.force);
  out << report;
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-varying AR/ARX identification, simulation, spectra and temperature surrogates"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--force", common.force, "Overwrite existing outputs");
  auto* seed_opt = app.add_option("--seed", common.seed, "Seed for every stochastic path (default 0)");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Synthesize a guided-wave record from a JSON config");
  s_synth->add_option("config", synth.config, "SynthConfig JSON")->required();
  s_synth->add_option("-o,--out", synth.out, "Output signal CSV")->required();
  s_synth->add_option("--actuation-out", synth.actuation_out, "Also write the matching actuation CSV");

  IdentifyArgs ident;
  auto* s_ident = app.add_subcommand("identify", "Estimate a TAR/TARX parameter trajectory");
  s_ident->add_option("y", ident.y, "Output signal CSV")->required();
  s_ident->add_option("--x", ident.x, "Excitation signal CSV (TARX)");
  s_ident->add_option("--na", ident.na, "AR order")->capture_default_str();
  s_ident->add_option("--nb", ident.nb, "X order (omit for TAR)");
  s_ident->add_option("--lambda", ident.lambda, "Forgetting factor")->capture_default_str();
  s_ident->add_option("--passes", ident.passes, "three_pass or single_forward")->capture_default_str();
  s_ident->add_option("--alpha", ident.alpha, "Initial covariance scale")->capture_default_str();
  s_ident->add_option("--window-m", ident.window_m, "Half-width M of the variance window")->capture_default_str();
  s_ident->add_option("-o,--out", ident.out, "Model JSON")->required();
  s_ident->add_option("--residuals", ident.residuals, "Residual CSV (default <out>_residuals.csv)");
  s_ident->add_option("--report", ident.report, "Report (default <out>_report.txt)");

  SelectArgs sel;
  auto* s_sel = app.add_subcommand("select", "Grid search over orders and forgetting factors");
  s_sel->add_option("y", sel.y, "Output signal CSV");
  s_sel->add_option("--x", sel.x, "Excitation signal CSV (TARX)");
  s_sel->add_option("--na-range", sel.na_range, "AR orders lo:hi")->capture_default_str();
  s_sel->add_option("--nb-range", sel.nb_range, "X orders lo:hi (omit for TAR)");
  s_sel->add_option("--lambda-range", sel.lambda_range, "lo:hi[:step] or a single value")->capture_default_str();
  s_sel->add_option("--lambda-step", sel.lambda_step, "Step for lo:hi ranges")->capture_default_str();
  s_sel->add_option("--criterion", sel.criterion, "rss_sss, ess_sss, bic or aic")->capture_default_str();
  s_sel->add_option("--passes", sel.passes, "three_pass or single_forward")->capture_default_str();
  s_sel->add_option("--alpha", sel.alpha, "Initial covariance scale")->capture_default_str();
  s_sel->add_option("--window-m", sel.window_m, "Half-width M of the variance window")->capture_default_str();
  s_sel->add_option("--jobs", sel.jobs, "Worker threads (default $TVARX_JOBS or all cores)");
  s_sel->add_flag("--count-only", sel.count_only, "Print the number of candidates and exit");
  s_sel->add_option("-o,--out", sel.out, "Ranked CSV");

  PredictArgs pred;
  auto* s_pred = app.add_subcommand("predict", "One-step-ahead prediction with a stored model");
  s_pred->add_option("model", pred.model, "Model JSON")->required();
  s_pred->add_option("y", pred.y, "Output signal CSV")->required();
  s_pred->add_option("--x", pred.x, "Excitation signal CSV (TARX)");
  s_pred->add_option("-o,--out", pred.out, "Predicted signal CSV")->required();
  s_pred->add_option("--residuals", pred.residuals, "Residual CSV (default <out>_residuals.csv)");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Simulate a TARX model driven by an excitation");
  s_sim->add_option("model", sim.model, "Model JSON")->required();
  s_sim->add_option("x", sim.x, "Excitation signal CSV")->required();
  s_sim->add_option("--noise", sim.noise, "Innovations CSV added to the output");
  s_sim->add_option("--noise-std", sim.noise_std, "White Gaussian innovations drawn from --seed");
  s_sim->add_option("-o,--out", sim.out, "Simulated signal CSV")->required();

  SpectralArgs spectral_args;
  auto* s_spec = app.add_subcommand("spectral", "Frozen-time PSD, FRF and modal tracks");
  s_spec->add_option("model", spectral_args.model, "Model JSON")->required();
  s_spec->add_option("--freq-grid", spectral_args.freq_grid, "lo:hi:count in Hz (default 0 to Nyquist, 501 points)");
  s_spec->add_flag("--track", spectral_args.track, "Order modes by nearest-frequency tracking");
  s_spec->add_option("-o,--out-dir", spectral_args.out_dir, "Output directory")->required();

  SpectrogramArgs sg;
  auto* s_sg = app.add_subcommand("spectrogram", "Short-time Fourier power spectrogram");
  s_sg->add_option("y", sg.y, "Signal CSV")->required();
  s_sg->add_option("--window", sg.window, "Hamming window length in samples")->capture_default_str();
  s_sg->add_option("--overlap", sg.overlap, "Overlap fraction in [0, 1)")->capture_default_str();
  s_sg->add_option("--nfft-mult", sg.nfft_mult, "Zero-padded DFT length as a multiple of the window")
      ->capture_default_str();
  s_sg->add_option("-o,--out", sg.out, "Grid CSV")->required();

  SurrogateArgs sur;
  auto* s_sur = app.add_subcommand("surrogate", "Temperature surrogate build, query and evaluation");
  s_sur->require_subcommand(1);
  auto* s_build = s_sur->add_subcommand("build", "Estimate one trajectory per temperature");
  s_build->add_option("manifest", sur.input, "Manifest JSON")->required();
  s_build->add_option("--scheme", sur.scheme, "linear, spline or v5cubic");
  s_build->add_option("--jobs", sur.jobs, "Worker threads (default $TVARX_JOBS or all cores)");
  s_build->add_option("-o,--out", sur.out, "Surrogate JSON")->required();
  auto* s_query = s_sur->add_subcommand("query", "Simulate at a temperature");
  s_query->add_option("surrogate", sur.input, "Surrogate JSON")->required();
  s_query->add_option("--temp", sur.temp, "Temperature in degC")->required();
  s_query->add_option("--x", sur.x, "Excitation signal CSV")->required();
  s_query->add_option("--scheme", sur.scheme, "Override the stored scheme");
  s_query->add_option("-o,--out", sur.out, "Simulated signal CSV")->required();
  auto* s_eval = s_sur->add_subcommand("eval", "ESS/SSS of the simulation against a reference");
  s_eval->add_option("surrogate", sur.input, "Surrogate JSON")->required();
  s_eval->add_option("--temp", sur.temp, "Temperature in degC")->required();
  s_eval->add_option("--x", sur.x, "Excitation signal CSV")->required();
  s_eval->add_option("--y-ref", sur.y_ref, "Reference signal CSV")->required();
  s_eval->add_option("--scheme", sur.scheme, "Override the stored scheme");
  s_eval->add_option("-o,--out", sur.out, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kOk : kIoError;
  }
  common.seed_given = seed_opt->count() > 0;

  try {
    if (*s_synth) return cmd_synth(synth, common, out);
    if (*s_ident) return cmd_identify(ident, common, out);
    if (*s_sel) {
      if (!sel.count_only && (sel.y.empty() || sel.out.empty())) {
        throw ValidationError("select needs an input signal and --out");
      }
      return cmd_select(sel, common, out);
    }
    if (*s_pred) return cmd_predict(pred, common, out);
    if (*s_sim) return cmd_simulate(sim, common, out);
    if (*s_spec) return cmd_spectral(spectral_args, common, out);
    if (*s_sg) return cmd_spectrogram(sg, common, out);
    if (*s_build) return cmd_surrogate_build(sur, common, out);
    if (*s_query) return cmd_surrogate_query(sur, common, out);
    if (*s_eval) return cmd_surrogate_eval(sur, common, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const InterpolationRefused& e) {
    err << "refused: " << e.what() << "\n";
    return kDomainRefusal;
  } catch (const DomainRefusal& e) {
    err << "refused: " << e.what() << "\n";
    return kDomainRefusal;
  } catch (const ValidationError& e) {
    err << "invalid: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace tvarx::cli
