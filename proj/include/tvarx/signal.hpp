#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tvarx {

/// Uniformly sampled real-valued record.
///
/// Sample `i` (0-based storage) sits at analog time `t0 + i * ts`, which is
/// `(t - 1) * ts + t0` for the 1-based discrete time `t` used by the models.
class Signal {
 public:
  Signal() = default;
  Signal(std::vector<double> samples, double ts, double t0 = 0.0);

  static Signal zeros(std::size_t n, double ts, double t0 = 0.0);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double ts() const noexcept { return ts_; }
  double t0() const noexcept { return t0_; }
  double fs() const noexcept { return 1.0 / ts_; }

  /// Analog time of storage index `i`.
  double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * ts_; }

  std::span<const double> samples() const noexcept { return samples_; }
  std::vector<double>& mutable_samples() noexcept { return samples_; }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  double energy() const noexcept;

 private:
  std::vector<double> samples_;
  double ts_ = 1.0;
  double t0_ = 0.0;
};

/// Hamming-windowed sine burst of `cycles` periods at `center_frequency`,
/// scaled so that the largest absolute sample equals `amplitude`.
/// `total_length` (when larger than the burst) pads with trailing zeros.
Signal tone_burst(int cycles, double center_frequency, double amplitude, double ts,
                  std::size_t total_length = 0);

/// Number of samples a tone burst occupies: round(cycles / fc / ts).
std::size_t tone_burst_length(int cycles, double center_frequency, double ts);

/// Zero-phase FIR low-pass (Hamming-windowed sinc, order 8*factor, cutoff at
/// 0.8 of the new Nyquist frequency, applied forward and backward) followed
/// by keeping every `factor`-th sample.
Signal decimate(const Signal& sig, int factor);

/// Taps of the anti-alias filter used by `decimate`; unit DC gain.
std::vector<double> decimation_filter(int factor);

/// Drops the first `start` samples (time-of-flight trimming) and keeps at
/// most `length` samples (all remaining when `length` is 0).
Signal crop(const Signal& sig, std::size_t start, std::size_t length = 0);

/// Returns `sig` truncated or zero-padded to exactly `length` samples.
Signal fit_length(const Signal& sig, std::size_t length);

struct SynthConfig {
  double plate_length = 0.3048;           // m
  double propagation_distance = 0.1524;   // m
  std::vector<double> mode_velocities{5400.0, 3100.0};  // m/s
  std::vector<double> mode_amplitudes{1.0, 1.5};
  int reflection_count = 0;
  double reflection_decay = 0.5;
  double temperature = 25.0;  // degC
  double temp_ref = 25.0;     // degC
  double delay_sensitivity = 0.0;      // fractional arrival-time increase per degC
  double amplitude_sensitivity = 0.0;  // fractional amplitude change per degC
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  /// Arrival delay in seconds of mode `mode` after `bounce` reflections.
  double arrival_delay(std::size_t mode, int bounce) const;
  double amplitude_factor() const;
  /// Latest start time over all packets and echoes.
  double latest_arrival() const;
};

/// Superposition of delayed, scaled copies of `actuation` (one per mode plus
/// `reflection_count` echoes each) with additive white Gaussian noise drawn
/// from `cfg.seed`. Output shares the actuation sampling interval and lasts
/// `duration` seconds. Fractional delays use linear interpolation of the
/// actuation samples.
Signal synth_guided_wave(const SynthConfig& cfg, const Signal& actuation, double duration);

}  // namespace tvarx
