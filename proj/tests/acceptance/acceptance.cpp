// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned
// below and never adjusted at runtime.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <thread>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "oracles.hpp"
#include "support.hpp"
#include "tvarx/cli.hpp"
#include "tvarx/error.hpp"
#include "tvarx/frozen.hpp"
#include "tvarx/io.hpp"
#include "tvarx/nonparametric.hpp"
#include "tvarx/parallel.hpp"
#include "tvarx/rml.hpp"
#include "tvarx/selection.hpp"
#include "tvarx/surrogate.hpp"

using namespace tvarx;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kOlsTol = 1e-6;
constexpr double kOlsSeconds = 1.0;
constexpr double kInfoRelTol = 1e-6;
constexpr double kModalRelTol = 1e-9;
constexpr int kOrderHits = 16;
constexpr double kOrderSeconds = 30.0;
constexpr double kWhiteFraction = 0.95;
constexpr double kEssNoiseFree = 0.01;
constexpr double kEssSnr40 = 0.03;
constexpr double kSurrogateInterior = 0.02;
constexpr int kThreePassWins = 45;
constexpr double kSuiteSeconds = 300.0;

const std::size_t kJobs = std::max(1u, std::thread::hardware_concurrency());

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> to_vec(const Signal& s) { return {s.samples().begin(), s.samples().end()}; }

Verdict rls_matches_ols() {
  const auto t0 = Clock::now();
  EstimationOptions o;
  o.passes = Passes::single_forward;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Signal y = testing::ar_data({-1.5, 0.7}, 500, 100 + seed);
    const auto r = estimate(y, nullptr, {2, std::nullopt, 1.0}, o);
    const auto ols = oracle::batch_ls(oracle::regression_matrix(to_vec(y), {}, 2, -1), to_vec(y));
    const Eigen::VectorXd last = r.trajectory.theta.bottomRows(1).transpose();
    worst = std::max(worst, (last - ols).cwiseAbs().maxCoeff());
  }
  const double s = seconds_since(t0);
  return {worst <= kOlsTol && s < kOlsSeconds,
          fmt("max |dtheta| = %.3g (tol %.0e), %.3f s (limit %.0f s)", worst, kOlsTol, s, kOlsSeconds)};
}

Verdict information_oracle() {
  double worst = 0.0;
  int checked = 0;
  EstimationOptions o;
  const ModelStructure shapes[] = {{2, 1, 1.0}, {3, std::nullopt, 1.0}};
  for (double lambda : {0.6, 0.9, 1.0}) {
    for (std::size_t n : {60u, 130u, 200u}) {
      for (const auto& base : shapes) {
        ModelStructure s = base;
        s.lambda = lambda;
        const auto d = testing::arx_data({-1.2, 0.5}, {0.7, -0.3}, n, 50 + n, 0.2);
        const Signal* x = s.has_x() ? &d.x : nullptr;
        const auto Phi = oracle::regression_matrix(to_vec(d.y), s.has_x() ? to_vec(d.x) : std::vector<double>{},
                                                   s.na, s.nb ? *s.nb : -1);
        const std::size_t step = n / 10;
        run_pass(d.y, x, s, RmlState::initial(s.param_count(), o.alpha), false, o, [&](const RmlState& st) {
          if (st.t % step != 0) return;
          const Eigen::MatrixXd R = oracle::weighted_information(Phi, st.t, lambda, o.alpha);
          worst = std::max(worst, (st.P.inverse() - R).norm() / R.norm());
          ++checked;
        });
      }
    }
  }
  return {worst <= kInfoRelTol && checked == 180,
          fmt("max relative |P^-1 - R| = %.3g over %d instants (tol %.0e)", worst, checked, kInfoRelTol)};
}

Verdict modal_round_trip() {
  const double ts = 0.5e-6;
  double worst_f = 0.0, worst_z = 0.0;
  bool shape_ok = true;
  for (double f : {50e3, 250e3, 450e3}) {
    for (double zeta : {0.01, 0.05, 0.3}) {
      const auto a = oracle::ar2_from_modal(2.0 * oracle::pi() * f, zeta, ts);
      const auto tr = testing::constant_trajectory({2, std::nullopt, 1.0}, a, 3, 1.0, ts);
      const auto m = frozen_modes(tr);
      if (m.mode_rows() != 1 || !m.failed.empty()) {
        shape_ok = false;
        continue;
      }
      for (Eigen::Index t = 0; t < 3; ++t) {
        worst_f = std::max(worst_f, std::abs(m.frequencies(0, t) - f) / f);
        worst_z = std::max(worst_z, std::abs(m.dampings(0, t) - zeta) / zeta);
      }
    }
  }
  return {shape_ok && worst_f <= kModalRelTol && worst_z <= kModalRelTol,
          fmt("max relative error: frequency %.3g, damping %.3g (tol %.0e)", worst_f, worst_z, kModalRelTol)};
}

Verdict order_recovery() {
  const auto t0 = Clock::now();
  const auto a = oracle::poly_from_roots({std::polar(0.9, 0.6), std::polar(0.9, -0.6), std::polar(0.8, 1.9),
                                          std::polar(0.8, -1.9)});
  const StructureGrid grid{int_range(2, 8), {}, {0.9, 0.95, 0.99}};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Signal y = testing::ar_data(a, 600, 2000 + seed);
    const auto r = grid_search(y, nullptr, grid, Criterion::bic, {}, kJobs);
    hits += r.front().structure.na == 4;
  }
  const double s = seconds_since(t0);
  return {hits >= kOrderHits && s < kOrderSeconds,
          fmt("na = 4 chosen in %d/20 seeds (need %d), %.2f s (limit %.0f s)", hits, kOrderHits, s, kOrderSeconds)};
}

Verdict whiteness() {
  struct Case {
    const char* name;
    ModelStructure s;
  };
  std::string detail;
  bool pass = true;
  for (const Case& c : {Case{"TAR(2)", {2, std::nullopt, 0.995}}, Case{"TARX(2,1)", {2, 1, 0.995}}}) {
    const auto d = testing::arx_data({-1.5, 0.7}, {0.7, -0.3}, 2000, 77, 0.5);
    const Signal y = c.s.has_x() ? d.y : testing::ar_data({-1.5, 0.7}, 2000, 77);
    const auto r = three_pass_estimate(y, c.s.has_x() ? &d.x : nullptr, c.s);
    const std::vector<double> e(r.residuals.begin() + long(c.s.transient()), r.residuals.end());
    const double bound = 2.58 / std::sqrt(double(e.size()));
    int inside = 0;
    for (std::size_t lag = 1; lag <= 20; ++lag) inside += std::abs(oracle::sample_acf(e, lag)) <= bound;
    pass = pass && inside >= int(std::ceil(kWhiteFraction * 20));
    detail += fmt("%s %d/20 lags inside; ", c.name, inside);
  }
  return {pass, detail + fmt("need >= %.0f%%", 100 * kWhiteFraction)};
}

Verdict simulation_fidelity() {
  const testing::GuidedWaveSetup g;
  const Signal x = g.actuation();
  const Signal clean = g.output(g.cfg.temperature, 0.0, 0);
  double ms = 0.0;
  for (double v : clean.samples()) ms += v * v;
  const double sd40 = std::sqrt(ms / double(clean.size())) / 100.0;
  const Signal noisy = g.output(g.cfg.temperature, sd40, 7);
  StructureGrid grid{int_range(2, 8), int_range(2, 8), lambda_range(0.5, 0.95, 0.05)};
  grid.lambda.push_back(0.99);

  const auto best_clean = grid_search(clean, &x, grid, Criterion::ess_sss, {}, kJobs).front();
  const auto best_noisy = grid_search(noisy, &x, grid, Criterion::ess_sss, {}, kJobs).front();
  const double e0 = best_clean.ess_sss.value_or(INFINITY);
  const double e40 = best_noisy.ess_sss.value_or(INFINITY);
  const auto m40 = estimate(noisy, &x, best_noisy.structure);
  const double e40_clean = ess_sss(to_vec(simulate(m40.trajectory, x)), to_vec(clean));
  return {clean.size() == 601 && e0 <= kEssNoiseFree && e40 <= kEssSnr40,
          fmt("noise-free %s ESS/SSS %.3g%% (<= %.0f%%); 40 dB %s ESS/SSS %.3g%% (<= %.0f%%), vs clean %.3g%%",
              best_clean.structure.label().c_str(), 100 * e0, 100 * kEssNoiseFree,
              best_noisy.structure.label().c_str(), 100 * e40, 100 * kEssSnr40, 100 * e40_clean)};
}

Verdict surrogate_interpolation() {
  const auto g = testing::thermal_setup();
  constexpr double kNoise = 1e-2;
  constexpr std::uint64_t kSeed = 11;
  const auto knots = testing::temperature_family(g, {30, 40, 50, 60, 70, 80, 90}, kNoise, kSeed);
  const auto held = testing::temperature_family(g, {35, 62.5, 87, 100}, kNoise, kSeed);
  const StructureGrid grid{int_range(2, 6), int_range(2, 6), {0.5, 0.55, 0.6, 0.65, 0.7, 0.8}};
  const auto ranked = select_shared_structure(knots, grid, {}, Scheme::linear, kJobs);
  const ModelStructure s = ranked.front().structure;
  const auto m7 = build_surrogate(knots, s, {}, Scheme::linear, kJobs);

  double worst = 0.0;
  std::string scores;
  for (int i = 0; i < 3; ++i) {
    for (Scheme sc : {Scheme::linear, Scheme::v5cubic}) {
      const double e = evaluate_surrogate(m7, held[i].temp, sc, held[i].x, held[i].y);
      worst = std::max(worst, std::isfinite(e) ? e : INFINITY);
      scores += fmt("%g/%s %.3g%% ", held[i].temp, std::string(to_string(sc)).c_str(), 100 * e);
    }
  }
  const auto m3 = build_surrogate({knots[0], knots[3], knots[6]}, s, {}, Scheme::linear, kJobs);
  const double extrap = evaluate_surrogate(m3, 100.0, Scheme::linear, held[3].x, held[3].y);

  bool spline_refused = false, v5_refused = false;
  try {
    (void)interpolate_params(m3, 45.0, Scheme::spline);
  } catch (const InterpolationRefused&) {
    spline_refused = true;
  }
  try {
    (void)interpolate_params(m7, 100.0, Scheme::v5cubic);
  } catch (const InterpolationRefused&) {
    v5_refused = true;
  }
  const bool pass = worst <= kSurrogateInterior && extrap > worst && spline_refused && v5_refused;
  return {pass, fmt("%s; interior %s(<= %.0f%%); extrapolation 100 degC %.3g%%; spline/3 knots %s; "
                    "v5cubic extrapolation %s",
                    s.label().c_str(), scores.c_str(), 100 * kSurrogateInterior, 100 * extrap,
                    spline_refused ? "refused" : "accepted", v5_refused ? "refused" : "accepted")};
}

Verdict three_pass_benefit() {
  EstimationOptions single;
  single.passes = Passes::single_forward;
  const ModelStructure s{2, std::nullopt, 1.0};
  const Eigen::Vector2d truth(-1.5, 0.7);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Signal y = testing::ar_data({-1.5, 0.7}, 601, 5000 + seed);
    const auto p1 = estimate(y, nullptr, s, single);
    const auto p3 = three_pass_estimate(y, nullptr, s);
    const double e1 = (p1.trajectory.theta.row(19).transpose() - truth).norm();
    const double e3 = (p3.trajectory.theta.row(19).transpose() - truth).norm();
    wins += e3 < e1;
  }
  return {wins >= kThreePassWins, fmt("pass 3 better at t = 20 in %d/50 trials (need %d)", wins, kThreePassWins)};
}

Verdict spectrogram_sanity() {
  const double ts_fine = 1.0 / 24e6;
  const Signal fine = tone_burst(5, 250e3, 1.0, ts_fine);
  const Signal burst = decimate(fine, 12);
  const std::size_t pad = 100;
  std::vector<double> v(pad, 0.0);
  v.insert(v.end(), burst.samples().begin(), burst.samples().end());
  v.resize(v.size() + pad, 0.0);
  const Signal y(v, burst.ts());
  const SpectrogramOptions o;
  const auto g = spectrogram(y, o);

  const std::size_t L = o.window_len;
  const std::size_t nfft = L * o.nfft_multiple;
  const bool dims = spectrogram_hop(o) == 1 && g.times.size() == y.size() - L + 1 &&
                    g.freqs.size() == nfft / 2 + 1 && std::size_t(g.values.cols()) == g.times.size();

  // Nominal burst support in decimated samples.
  const double burst_s = double(tone_burst_length(5, 250e3, ts_fine)) * ts_fine;
  const std::size_t first = pad;
  const std::size_t last = pad + std::size_t(std::ceil(burst_s / y.ts())) - 1;
  int overlapping = 0, on_bin = 0, full = 0, full_on_bin = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.times.size(); ++k) {
    if (k + L - 1 < first || k > last) continue;
    ++overlapping;
    Eigen::Index am = 0;
    g.values.col(Eigen::Index(k)).maxCoeff(&am);
    const double off = std::abs(g.freqs[std::size_t(am)] - 250e3);
    const bool ok = off <= g.freq_resolution * (1.0 + 1e-12);
    on_bin += ok;
    worst = std::max(worst, off);
    if (k >= first && k + L - 1 <= last) {
      ++full;
      full_on_bin += ok;
    }
  }
  return {dims && on_bin == overlapping,
          fmt("grid %s; argmax within one bin (%.1f Hz) in %d/%d overlapping frames, worst offset %.0f Hz; "
              "frames inside the burst: %d/%d",
              dims ? "matches hop = 1" : "MISMATCH", g.freq_resolution, on_bin, overlapping, worst, full_on_bin,
              full)};
}

/// Full command-line pipeline in `dir`; returns a hash of every output file.
std::map<std::string, std::size_t> pipeline(const fs::path& dir, std::string& failures) {
  fs::remove_all(dir);
  fs::create_directories(dir / "spectral");
  auto p = [&](const std::string& f) { return (dir / f).string(); };
  int step = 0;
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "tvarx");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), out, err);
    if (code != cli::kOk) failures += args[1] + " exited " + std::to_string(code) + ": " + err.str();
    write_file_atomic(dir / fmt("stdout_%02d.txt", ++step), out.str(), true);
  };

  const auto g = testing::thermal_setup();
  std::string manifest = R"({"structure": {"na": 3, "nb": 4, "lambda": 0.6}, "scheme": "linear", "signals": [)";
  for (int T : {30, 45, 60, 75, 90}) {
    nlohmann::json cfg = nlohmann::json::parse(synth_config_to_json(g.cfg));
    cfg["temperature"] = T;
    cfg["noise_std"] = 1e-2;
    cfg["length"] = 601;
    cfg["crop_time_of_flight"] = true;
    const std::string name = "cfg" + std::to_string(T) + ".json";
    write_file_atomic(dir / name, cfg.dump(2), true);
    run({"--seed", "3", "synth", p(name), "-o", p("y" + std::to_string(T) + ".csv"), "--actuation-out",
         p("x" + std::to_string(T) + ".csv")});
    manifest += (T == 30 ? "" : ", ") + fmt(R"({"temp": %d, "y": "y%d.csv", "x": "x%d.csv"})", T, T, T);
  }
  write_file_atomic(dir / "manifest.json", manifest + "]}", true);

  run({"spectrogram", p("y30.csv"), "-o", p("spectrogram.csv")});
  run({"select", p("y30.csv"), "--x", p("x30.csv"), "--na-range", "2:5", "--nb-range", "2:5", "--lambda-range",
       "0.5:0.9", "--lambda-step", "0.1", "--criterion", "ess_sss", "-o", p("ranked.csv")});
  run({"identify", p("y30.csv"), "--x", p("x30.csv"), "--na", "3", "--nb", "4", "--lambda", "0.6", "-o",
       p("model.json")});
  run({"identify", p("y30.csv"), "--na", "6", "--lambda", "0.9", "-o", p("tar.json")});
  run({"predict", p("model.json"), p("y30.csv"), "--x", p("x30.csv"), "-o", p("predicted.csv")});
  run({"--seed", "9", "simulate", p("model.json"), p("x30.csv"), "--noise-std", "0.01", "-o", p("simulated.csv")});
  run({"spectral", p("model.json"), "--track", "-o", p("spectral")});
  run({"surrogate", "build", p("manifest.json"), "-o", p("surrogate.json")});
  run({"surrogate", "query", p("surrogate.json"), "--temp", "52.5", "--x", p("x30.csv"), "-o", p("query.csv")});
  run({"surrogate", "eval", p("surrogate.json"), "--temp", "60", "--x", p("x30.csv"), "--y-ref", p("y60.csv"),
       "-o", p("eval.txt")});

  std::map<std::string, std::size_t> hashes;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      hashes[fs::relative(e.path(), dir).string()] = std::hash<std::string>{}(read_file(e.path()));
    }
  }
  return hashes;
}

Verdict determinism(Clock::time_point suite_start) {
  const fs::path root = fs::temp_directory_path() / "tvarx_acceptance";
  std::string failures;
  const auto a = pipeline(root / "run1", failures);
  const auto b = pipeline(root / "run2", failures);
  std::size_t differ = 0;
  for (const auto& [name, h] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != h) {
      ++differ;
      std::fprintf(stderr, "differs: %s\n", name.c_str());
    }
  }
  differ += b.size() > a.size() ? b.size() - a.size() : 0;
  fs::remove_all(root);
  const double s = seconds_since(suite_start);
  return {failures.empty() && differ == 0 && s < kSuiteSeconds,
          fmt("%zu files hashed, %zu differ%s; suite %.1f s (limit %.0f s)", a.size(), differ,
              failures.empty() ? "" : (", command failures: " + failures).c_str(), s, kSuiteSeconds)};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"RLS/OLS equivalence", rls_matches_ols},
      {"weighted-information oracle", information_oracle},
      {"modal round-trip", modal_round_trip},
      {"BIC order recovery", order_recovery},
      {"residual whiteness", whiteness},
      {"simulation fidelity", simulation_fidelity},
      {"surrogate interpolation", surrogate_interpolation},
      {"three-pass benefit", three_pass_benefit},
      {"spectrogram sanity", spectrogram_sanity},
      {"determinism and runtime", [&] { return determinism(start); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %zu %s: %s | %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
