#include "tvarx/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tvarx/error.hpp"

namespace tvarx {

Signal::Signal(std::vector<double> samples, double ts, double t0)
    : samples_(std::move(samples)), ts_(ts), t0_(t0) {
  if (!(ts_ > 0.0) || !std::isfinite(ts_)) {
    throw ValidationError("sampling interval must be positive and finite");
  }
  if (samples_.empty()) {
    throw ValidationError("a signal needs at least one sample");
  }
}

Signal Signal::zeros(std::size_t n, double ts, double t0) {
  return Signal(std::vector<double>(n, 0.0), ts, t0);
}

double Signal::energy() const noexcept {
  double acc = 0.0;
  for (double v : samples_) acc += v * v;
  return acc;
}

std::size_t tone_burst_length(int cycles, double center_frequency, double ts) {
  return static_cast<std::size_t>(std::lround(cycles / center_frequency / ts));
}

Signal tone_burst(int cycles, double center_frequency, double amplitude, double ts,
                  std::size_t total_length) {
  if (cycles < 1) throw ValidationError("tone burst needs at least one cycle");
  if (!(ts > 0.0)) throw ValidationError("sampling interval must be positive");
  if (!(center_frequency > 0.0)) throw ValidationError("center frequency must be positive");
  if (center_frequency >= 0.5 / ts) {
    throw SamplingError("center frequency " + std::to_string(center_frequency) +
                        " Hz is at or above the Nyquist frequency " + std::to_string(0.5 / ts) +
                        " Hz");
  }
  const std::size_t n = tone_burst_length(cycles, center_frequency, ts);
  if (n == 0) throw SamplingError("tone burst shorter than one sample");

  std::vector<double> s(std::max(n, total_length), 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        n == 1 ? 1.0
               : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
    s[i] = std::sin(2.0 * std::numbers::pi * center_frequency * static_cast<double>(i) * ts) * w;
    peak = std::max(peak, std::abs(s[i]));
  }
  if (peak > 0.0) {
    for (std::size_t i = 0; i < n; ++i) s[i] = s[i] / peak * amplitude;
  }
  return Signal(std::move(s), ts);
}

std::vector<double> decimation_filter(int factor) {
  if (factor < 1) throw ValidationError("decimation factor must be >= 1");
  const int order = 8 * factor;
  const double cutoff = 0.8 / factor;  // fraction of the input Nyquist frequency
  std::vector<double> h(static_cast<std::size_t>(order) + 1);
  const double mid = order / 2.0;
  double sum = 0.0;
  for (int i = 0; i <= order; ++i) {
    const double m = i - mid;
    const double sinc =
        m == 0.0 ? cutoff : std::sin(std::numbers::pi * cutoff * m) / (std::numbers::pi * m);
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / order);
    h[static_cast<std::size_t>(i)] = sinc * w;
    sum += h[static_cast<std::size_t>(i)];
  }
  for (double& v : h) v /= sum;
  return h;
}

namespace {

// Centered ("same") convolution with a symmetric odd-length kernel and zero
// padding outside the record.
std::vector<double> convolve_same(std::span<const double> x, std::span<const double> h) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(h.size() / 2);
  std::vector<double> out(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      acc += x[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(i - j + half)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace

Signal decimate(const Signal& sig, int factor) {
  if (factor < 1) throw ValidationError("decimation factor must be >= 1");
  if (static_cast<std::size_t>(factor) > sig.size()) {
    throw ValidationError("decimation factor " + std::to_string(factor) +
                          " exceeds the signal length " + std::to_string(sig.size()));
  }
  if (factor == 1) return sig;

  const auto h = decimation_filter(factor);
  // The kernel is symmetric, so the backward pass is another centered
  // convolution.
  auto once = convolve_same(sig.samples(), h);
  std::reverse(once.begin(), once.end());
  auto twice = convolve_same(once, h);
  std::reverse(twice.begin(), twice.end());

  std::vector<double> out;
  out.reserve(sig.size() / static_cast<std::size_t>(factor) + 1);
  for (std::size_t i = 0; i < twice.size(); i += static_cast<std::size_t>(factor)) {
    out.push_back(twice[i]);
  }
  return Signal(std::move(out), sig.ts() * factor, sig.t0());
}

Signal crop(const Signal& sig, std::size_t start, std::size_t length) {
  if (start >= sig.size()) {
    throw ValidationError("crop start " + std::to_string(start) + " is past the end of the signal");
  }
  const std::size_t avail = sig.size() - start;
  const std::size_t n = length == 0 ? avail : std::min(length, avail);
  auto s = sig.samples();
  return Signal(std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(start),
                                    s.begin() + static_cast<std::ptrdiff_t>(start + n)),
                sig.ts(), sig.time_at(start));
}

Signal fit_length(const Signal& sig, std::size_t length) {
  if (length == 0) throw ValidationError("target length must be positive");
  std::vector<double> s(length, 0.0);
  std::copy_n(sig.samples().begin(), std::min(length, sig.size()), s.begin());
  return Signal(std::move(s), sig.ts(), sig.t0());
}

void SynthConfig::validate() const {
  if (mode_velocities.empty() || mode_velocities.size() != mode_amplitudes.size()) {
    throw ValidationError("mode_velocities and mode_amplitudes must have equal nonzero length");
  }
  for (double v : mode_velocities) {
    if (!(v > 0.0)) throw ValidationError("mode velocities must be positive");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("noise_std must be >= 0");
  if (!(reflection_decay > 0.0 && reflection_decay <= 1.0)) {
    throw ValidationError("reflection_decay must lie in (0, 1]");
  }
  if (reflection_count < 0) throw ValidationError("reflection_count must be >= 0");
  if (!(propagation_distance >= 0.0) || !(plate_length >= 0.0)) {
    throw ValidationError("distances must be nonnegative");
  }
}

double SynthConfig::arrival_delay(std::size_t mode, int bounce) const {
  const double path = propagation_distance + 2.0 * plate_length * bounce;
  return path / mode_velocities.at(mode) * (1.0 + delay_sensitivity * (temperature - temp_ref));
}

double SynthConfig::amplitude_factor() const {
  return 1.0 + amplitude_sensitivity * (temperature - temp_ref);
}

double SynthConfig::latest_arrival() const {
  double latest = 0.0;
  for (std::size_t p = 0; p < mode_velocities.size(); ++p) {
    latest = std::max(latest, arrival_delay(p, reflection_count));
  }
  return latest;
}

Signal synth_guided_wave(const SynthConfig& cfg, const Signal& actuation, double duration) {
  cfg.validate();
  const double ts = actuation.ts();
  if (!(duration > 0.0)) throw ValidationError("duration must be positive");
  if (duration < cfg.latest_arrival()) {
    throw ValidationError("duration " + std::to_string(duration) +
                          " s ends before the latest arrival at " +
                          std::to_string(cfg.latest_arrival()) + " s");
  }
  const auto n = static_cast<std::size_t>(std::lround(duration / ts));
  std::vector<double> out(std::max<std::size_t>(n, 1), 0.0);

  auto act = actuation.samples();
  const double act_last = static_cast<double>(act.size() - 1);
  const double gain = cfg.amplitude_factor();

  for (std::size_t p = 0; p < cfg.mode_velocities.size(); ++p) {
    double bounce_gain = 1.0;
    for (int r = 0; r <= cfg.reflection_count; ++r) {
      const double amp = cfg.mode_amplitudes[p] * gain * bounce_gain;
      const double delay = cfg.arrival_delay(p, r);
      for (std::size_t i = 0; i < out.size(); ++i) {
        // Position in actuation samples.
        const double u = (static_cast<double>(i) * ts - delay) / ts;
        if (u < 0.0 || u > act_last) continue;
        const auto j = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(j);
        const double v = j + 1 < act.size() ? act[j] + frac * (act[j + 1] - act[j]) : act[j];
        out[i] += amp * v;
      }
      bounce_gain *= cfg.reflection_decay;
    }
  }

  if (cfg.noise_std > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : out) v += noise(rng);
  }
  return Signal(std::move(out), ts, actuation.t0());
}

}  // namespace tvarx
