#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tvarx/tv_model.hpp"

namespace tvarx {

/// psd(f, k) and frf_mag(f, k) at freqs[f] and times[k].
struct FrozenGrid {
  std::vector<double> times;
  std::vector<double> freqs;
  Eigen::MatrixXd psd;
  std::optional<Eigen::MatrixXd> frf_mag;
  /// (freq index, time index) where A vanished and +inf was stored.
  std::vector<std::pair<std::size_t, std::size_t>> singular;
};

/// Column k holds the modes of instant k sorted by frequency (or in tracked
/// order after track_modes). Unused rows are NaN.
struct ModalTrack {
  std::vector<double> times;
  Eigen::MatrixXd frequencies;  // Hz
  Eigen::MatrixXd dampings;
  Eigen::MatrixXd pole_magnitudes;
  /// Non-oscillatory (real) pole.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> real_pole;
  /// |pole| > 1 - 1e-12.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> marginal;
  /// Instants whose root finding failed.
  std::vector<std::size_t> failed;

  std::size_t mode_rows() const noexcept { return static_cast<std::size_t>(frequencies.rows()); }
};

struct ModalParams {
  double frequency_hz = 0.0;
  double damping = 0.0;
};

inline constexpr double kMarginalPoleTolerance = 1e-12;

/// Roots of z^n + a_1 z^(n-1) + ... + a_n via eigenvalues of the balanced
/// companion matrix.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> a);

/// omega_n = |ln z| / Ts (reported in Hz), zeta = -cos(arg ln z).
ModalParams pole_to_modal(std::complex<double> z, double ts);

/// A(e^{-j w Ts}) and B(e^{-j w Ts}) for row `t` of the trajectory.
std::complex<double> frozen_a(const ParameterTrajectory& traj, std::size_t t, double freq_hz);
std::complex<double> frozen_b(const ParameterTrajectory& traj, std::size_t t, double freq_hz);

FrozenGrid frozen_psd(const ParameterTrajectory& traj, std::span<const double> freqs);
/// PSD plus |B/A| sigma_e. Rejects TAR trajectories.
FrozenGrid frozen_frf(const ParameterTrajectory& traj, std::span<const double> freqs);

ModalTrack frozen_modes(const ParameterTrajectory& traj);

/// Reorders rows so each mode follows the nearest frequency of the previous
/// instant (greedy, closest pairs first).
ModalTrack track_modes(const ModalTrack& modes);

/// `count` evenly spaced frequencies from 0 to the Nyquist frequency.
std::vector<double> uniform_freq_grid(double ts, std::size_t count);

}  // namespace tvarx
