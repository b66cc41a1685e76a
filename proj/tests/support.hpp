#pragma once

// Synthetic data generators shared by the unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tvarx/signal.hpp"
#include "tvarx/surrogate.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double std = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std);
  std::vector<double> e(n);
  for (double& v : e) v = nd(rng);
  return e;
}

/// y[t] + sum a_i y[t-i] = e[t] with constant a and zero initial conditions.
inline Signal ar_data(const std::vector<double>& a, std::size_t n, std::uint64_t seed,
                      double noise_std = 1.0, double ts = 1.0) {
  const auto e = white_noise(n, seed, noise_std);
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double v = e[t];
    for (std::size_t i = 1; i <= a.size() && i <= t; ++i) v -= a[i - 1] * y[t - i];
    y[t] = v;
  }
  return Signal(std::move(y), ts);
}

/// ARX data: y[t] + sum a_i y[t-i] = sum b_i x[t-i] + e[t], white x.
struct ArxData {
  Signal y;
  Signal x;
};

inline ArxData arx_data(const std::vector<double>& a, const std::vector<double>& b, std::size_t n,
                        std::uint64_t seed, double noise_std = 0.1) {
  const auto x = white_noise(n, seed * 2 + 1);
  const auto e = white_noise(n, seed * 2 + 2, noise_std);
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double v = e[t];
    for (std::size_t i = 1; i <= a.size() && i <= t; ++i) v -= a[i - 1] * y[t - i];
    for (std::size_t i = 0; i < b.size() && i <= t; ++i) v += b[i] * x[t - i];
    y[t] = v;
  }
  return {Signal(std::move(y), 1.0), Signal(x, 1.0)};
}

/// Constant trajectory with the given coefficients repeated for n rows.
inline ParameterTrajectory constant_trajectory(const ModelStructure& s, const std::vector<double>& row,
                                               std::size_t n, double sigma2 = 1.0, double ts = 1.0) {
  ParameterTrajectory tr;
  tr.structure = s;
  tr.ts = ts;
  tr.theta.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(row.size()));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      tr.theta(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  tr.sigma2e.assign(n, sigma2);
  return tr;
}

/// Guided-wave geometry at 24 MHz decimated to 2 MHz, cropped at
/// the reference-temperature time of flight of the fastest packet.
struct GuidedWaveSetup {
  SynthConfig cfg;
  int cycles = 5;
  double fc = 250e3;
  double amplitude = 1.0;
  double ts_fine = 1.0 / 24e6;
  int factor = 12;
  std::size_t length = 601;

  GuidedWaveSetup() {
    cfg.plate_length = 0.04;
    cfg.propagation_distance = 0.1524;
    cfg.mode_velocities = {5400.0, 4200.0};
    cfg.mode_amplitudes = {1.0, 1.5};
    cfg.reflection_count = 2;
    cfg.reflection_decay = 0.6;
    cfg.temperature = 30.0;
    cfg.temp_ref = 30.0;
    cfg.noise_std = 0.0;
    cfg.seed = 0;
  }

  double ts() const { return ts_fine * factor; }

  std::size_t crop_start() const {
    return static_cast<std::size_t>(
        std::floor(cfg.propagation_distance / cfg.mode_velocities.front() / ts()));
  }

  double duration() const {
    return static_cast<double>(crop_start() + length + 2) * ts();
  }

  Signal output(double temperature, double noise_std, std::uint64_t seed) const {
    SynthConfig c = cfg;
    c.temperature = temperature;
    c.noise_std = noise_std;
    c.seed = seed;
    const Signal burst = tone_burst(cycles, fc, amplitude, ts_fine);
    const Signal raw = synth_guided_wave(c, burst, duration());
    return crop(decimate(raw, factor), crop_start(), length);
  }

  Signal actuation() const {
    const Signal burst = tone_burst(cycles, fc, amplitude, ts_fine);
    const auto n = static_cast<std::size_t>(std::lround(duration() / ts_fine));
    const Signal dec = decimate(fit_length(burst, n), factor);
    return fit_length(dec, length);
  }
};

/// Records of one geometry at several temperatures. Every record shares the
/// noise seed so that only the temperature differs between them.
inline std::vector<TemperatureRecord> temperature_family(const GuidedWaveSetup& g,
                                                         const std::vector<double>& temps,
                                                         double noise_std, std::uint64_t seed) {
  std::vector<TemperatureRecord> out;
  const Signal x = g.actuation();
  for (double T : temps) out.push_back({T, g.output(T, noise_std, seed), x});
  return out;
}

/// Geometry with temperature-dependent arrival time and amplitude.
inline GuidedWaveSetup thermal_setup() {
  GuidedWaveSetup g;
  g.cfg.delay_sensitivity = 2e-4;
  g.cfg.amplitude_sensitivity = -2e-3;
  return g;
}

}  // namespace tvarx::testing
