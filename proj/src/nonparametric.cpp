#include "tvarx/nonparametric.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "tvarx/error.hpp"

namespace tvarx {

std::size_t spectrogram_hop(const SpectrogramOptions& opts) {
  return static_cast<std::size_t>(
      std::lround(static_cast<double>(opts.window_len) * (1.0 - opts.overlap_fraction)));
}

TimeFrequencyGrid spectrogram(const Signal& sig, const SpectrogramOptions& opts) {
  const std::size_t L = opts.window_len;
  if (L < 2) throw ValidationError("spectrogram window must span at least 2 samples");
  if (L > sig.size()) {
    throw ValidationError("window length " + std::to_string(L) + " exceeds the signal length " +
                          std::to_string(sig.size()));
  }
  if (!(opts.overlap_fraction >= 0.0 && opts.overlap_fraction < 1.0)) {
    throw ValidationError("overlap fraction must lie in [0, 1)");
  }
  if (opts.nfft_multiple < 1) throw ValidationError("nfft multiple must be >= 1");
  const std::size_t hop = spectrogram_hop(opts);
  if (hop < 1) throw ValidationError("overlap leaves a hop of zero samples");

  const std::size_t nfft = opts.nfft_multiple * L;
  const std::size_t nbins = nfft / 2 + 1;
  const std::size_t frames = (sig.size() - L) / hop + 1;

  std::vector<double> w(L);
  double w2 = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(L - 1));
    w2 += w[i] * w[i];
  }
  std::vector<std::complex<double>> twiddle(nfft);
  for (std::size_t m = 0; m < nfft; ++m) {
    twiddle[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) /
                                     static_cast<double>(nfft));
  }

  TimeFrequencyGrid grid;
  grid.freq_resolution = sig.fs() / static_cast<double>(nfft);
  grid.freqs.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) grid.freqs[k] = static_cast<double>(k) * grid.freq_resolution;
  grid.times.resize(frames);
  grid.values.resize(static_cast<Eigen::Index>(nbins), static_cast<Eigen::Index>(frames));

  const double scale = 1.0 / (sig.fs() * w2);
  std::vector<double> frame(L);
  auto s = sig.samples();
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    grid.times[f] = sig.t0() + (static_cast<double>(start) + 0.5 * static_cast<double>(L - 1)) * sig.ts();
    for (std::size_t i = 0; i < L; ++i) frame[i] = s[start + i] * w[i];
    for (std::size_t k = 0; k < nbins; ++k) {
      std::complex<double> acc{0.0, 0.0};
      std::size_t idx = 0;
      for (std::size_t i = 0; i < L; ++i) {
        acc += frame[i] * twiddle[idx];
        idx += k;
        if (idx >= nfft) idx -= nfft;
      }
      double p = std::norm(acc) * scale;
      const bool unpaired = k == 0 || (nfft % 2 == 0 && k == nfft / 2);
      if (!unpaired) p *= 2.0;
      grid.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = p;
    }
  }
  return grid;
}

std::vector<double> sliding_variance(std::span<const double> series, std::size_t M) {
  const std::size_t n = series.size();
  if (2 * M + 1 > n) {
    throw ValidationError("variance window of " + std::to_string(2 * M + 1) +
                          " samples exceeds the series length " + std::to_string(n));
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= M ? t - M : 0;
    const std::size_t hi = std::min(n - 1, t + M);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += series[j] * series[j];
    out[t] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace tvarx
