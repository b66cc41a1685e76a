#pragma once

// Independent reference computations. None of these call into the library
// routine they are used to check.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace tvarx::oracle {

inline double pi() { return std::numbers::pi; }

/// Pointwise windowed sine, scaled to peak `amp`.
inline std::vector<double> windowed_sine(int cycles, double fc, double amp, double ts) {
  const auto n = static_cast<std::size_t>(std::lround(cycles / fc / ts));
  std::vector<double> s(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * pi() * double(i) / double(n - 1));
    s[i] = hamming * std::sin(2.0 * pi() * fc * double(i) * ts);
    peak = std::max(peak, std::abs(s[i]));
  }
  for (double& v : s) v *= amp / peak;
  return s;
}

inline std::vector<double> windowed_mean_square(const std::vector<double>& x, std::size_t M) {
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    double acc = 0.0;
    int count = 0;
    for (long tau = long(t) - long(M); tau <= long(t + M); ++tau) {
      if (tau < 0 || tau >= long(x.size())) continue;
      acc += x[std::size_t(tau)] * x[std::size_t(tau)];
      ++count;
    }
    out[t] = acc / count;
  }
  return out;
}

/// Rows phi[t]' for t = 1..N of the AR(X) regression, built directly.
inline Eigen::MatrixXd regression_matrix(const std::vector<double>& y, const std::vector<double>& x,
                                         int na, int nb) {
  const long n = long(y.size());
  const long d = na + (nb >= 0 ? nb + 1 : 0);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(n, d);
  for (long t = 0; t < n; ++t) {
    for (long i = 1; i <= na; ++i) {
      if (t - i >= 0) Phi(t, i - 1) = -y[std::size_t(t - i)];
    }
    for (long i = 0; nb >= 0 && i <= nb; ++i) {
      if (t - i >= 0) Phi(t, na + i) = x[std::size_t(t - i)];
    }
  }
  return Phi;
}

/// Batch least squares from the normal equations.
inline Eigen::VectorXd batch_ls(const Eigen::MatrixXd& Phi, const std::vector<double>& y) {
  Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), long(y.size()));
  return (Phi.transpose() * Phi).ldlt().solve(Phi.transpose() * Y);
}

/// sum_{tau<=t} lambda^(t-tau) phi phi' + lambda^t / alpha I (t is 1-based).
inline Eigen::MatrixXd weighted_information(const Eigen::MatrixXd& Phi, std::size_t t,
                                            double lambda, double alpha) {
  const long d = Phi.cols();
  Eigen::MatrixXd R = std::pow(lambda, double(t)) / alpha * Eigen::MatrixXd::Identity(d, d);
  for (std::size_t tau = 1; tau <= t; ++tau) {
    const Eigen::VectorXd phi = Phi.row(long(tau - 1)).transpose();
    R += std::pow(lambda, double(t - tau)) * phi * phi.transpose();
  }
  return R;
}

/// Impulse response of B/A by a scalar difference equation.
inline std::vector<double> impulse_response(const std::vector<double>& a, const std::vector<double>& b,
                                            std::size_t n) {
  std::vector<double> h(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double v = t < b.size() ? b[t] : 0.0;
    for (std::size_t i = 1; i <= a.size() && i <= t; ++i) v -= a[i - 1] * h[t - i];
    h[t] = v;
  }
  return h;
}

/// Frequency (Hz) of the largest DFT magnitude over bins 0..n/2.
inline double dft_peak_hz(const std::vector<double>& x, double fs) {
  const std::size_t n = x.size();
  double best = -1.0, best_f = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::exp(std::complex<double>(0.0, -2.0 * pi() * double(k * i % n) / double(n)));
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = double(k) * fs / double(n);
    }
  }
  return best_f;
}

inline std::complex<double> dft_bin(const std::vector<double>& x, double freq, double fs) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * std::exp(std::complex<double>(0.0, -2.0 * pi() * freq * double(i) / fs));
  }
  return acc;
}

/// AR(2) coefficients whose poles are exp(s Ts) for the continuous pair
/// s = -zeta wn +- j wn sqrt(1 - zeta^2).
inline std::vector<double> ar2_from_modal(double wn, double zeta, double ts) {
  const std::complex<double> s(-zeta * wn, wn * std::sqrt(1.0 - zeta * zeta));
  const std::complex<double> z = std::exp(s * ts);
  return {-2.0 * z.real(), std::norm(z)};
}

/// Polynomial coefficients a_1..a_n of prod (z - p_k) for conjugate-closed
/// pole sets.
inline std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = next;
  }
  std::vector<double> a;
  for (std::size_t i = 1; i < c.size(); ++i) a.push_back(c[i].real());
  return a;
}

inline double sample_acf(const std::vector<double>& e, std::size_t lag) {
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= double(e.size());
  double c0 = 0.0, ck = 0.0;
  for (std::size_t t = 0; t < e.size(); ++t) c0 += (e[t] - mean) * (e[t] - mean);
  for (std::size_t t = lag; t < e.size(); ++t) ck += (e[t] - mean) * (e[t - lag] - mean);
  return ck / c0;
}

}  // namespace tvarx::oracle
