#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "tvarx/signal.hpp"

namespace tvarx {

/// values(f, k) is the power at freqs[f] in the frame centred at times[k].
struct TimeFrequencyGrid {
  std::vector<double> times;
  std::vector<double> freqs;
  Eigen::MatrixXd values;
  double freq_resolution = 0.0;
};

struct SpectrogramOptions {
  std::size_t window_len = 30;
  double overlap_fraction = 0.98;
  std::size_t nfft_multiple = 100;
};

/// Hamming-windowed short-time power spectral density, one-sided
/// (bins 0..nfft/2, interior bins doubled), scaled by 1 / (fs * sum(w^2)).
TimeFrequencyGrid spectrogram(const Signal& sig, const SpectrogramOptions& opts = {});

std::size_t spectrogram_hop(const SpectrogramOptions& opts);

/// Mean of squares over the centred window [t - M, t + M], truncated at the
/// record edges with the divisor equal to the number of samples used.
std::vector<double> sliding_variance(std::span<const double> series, std::size_t M);

}  // namespace tvarx
