#include "tvarx/frozen.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tvarx/error.hpp"

namespace tvarx {

namespace {

// Scales row/column pairs by powers of two until their 1-norms are close.
void balance(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  constexpr double gamma = 0.9;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row_norm = m.row(i).lpNorm<1>() - std::abs(m(i, i));
      const double col_norm = m.col(i).lpNorm<1>() - std::abs(m(i, i));
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(row_norm / col_norm, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scaled_col = std::ldexp(col_norm, exponent);
      const double scaled_row = std::ldexp(row_norm, -exponent);
      if (scaled_col + scaled_row < gamma * (col_norm + row_norm)) {
        changed = true;
        m.row(i) *= std::ldexp(1.0, -exponent);
        m.col(i) *= std::ldexp(1.0, exponent);
      }
    }
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<std::complex<double>> polynomial_roots(std::span<const double> a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (n == 0) return {};
  for (double v : a) {
    if (!std::isfinite(v)) throw NumericalFailure("non-finite polynomial coefficient", 0);
  }
  if (n == 1) return {std::complex<double>(-a[0], 0.0)};

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) c(0, j) = -a[static_cast<std::size_t>(j)];
  c.diagonal(-1).setOnes();
  balance(c);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(c, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("companion eigenvalue iteration did not converge", 0);
  }
  const auto& ev = solver.eigenvalues();
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = ev(i);
  return roots;
}

ModalParams pole_to_modal(std::complex<double> z, double ts) {
  const std::complex<double> l = std::log(z);
  return {std::abs(l) / ts / (2.0 * std::numbers::pi), -std::cos(std::arg(l))};
}

std::complex<double> frozen_a(const ParameterTrajectory& traj, std::size_t t, double freq_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz * traj.ts;
  const auto row = static_cast<Eigen::Index>(t);
  std::complex<double> acc{1.0, 0.0};
  for (int i = 1; i <= traj.structure.na; ++i) {
    acc += traj.theta(row, i - 1) * std::polar(1.0, -w * i);
  }
  return acc;
}

std::complex<double> frozen_b(const ParameterTrajectory& traj, std::size_t t, double freq_hz) {
  if (!traj.structure.nb) return {1.0, 0.0};
  const double w = 2.0 * std::numbers::pi * freq_hz * traj.ts;
  const auto row = static_cast<Eigen::Index>(t);
  const int na = traj.structure.na;
  std::complex<double> acc{0.0, 0.0};
  for (int i = 0; i <= *traj.structure.nb; ++i) {
    acc += traj.theta(row, na + i) * std::polar(1.0, -w * i);
  }
  return acc;
}

namespace {

FrozenGrid frozen_grid(const ParameterTrajectory& traj, std::span<const double> freqs, bool frf) {
  traj.validate();
  const double nyquist = 0.5 / traj.ts;
  for (double f : freqs) {
    if (!(f >= 0.0 && f <= nyquist * (1.0 + 1e-12))) {
      throw ValidationError("frequency " + std::to_string(f) + " Hz outside [0, Nyquist]");
    }
  }
  const std::size_t n = traj.size();
  const auto nf = static_cast<Eigen::Index>(freqs.size());
  FrozenGrid g;
  g.freqs.assign(freqs.begin(), freqs.end());
  g.times.resize(n);
  g.psd.resize(nf, static_cast<Eigen::Index>(n));
  if (frf) g.frf_mag = Eigen::MatrixXd(nf, static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    g.times[t] = traj.t0 + static_cast<double>(t) * traj.ts;
    const double s2 = traj.sigma2e[t];
    for (Eigen::Index f = 0; f < nf; ++f) {
      const double fr = freqs[static_cast<std::size_t>(f)];
      const auto A = frozen_a(traj, t, fr);
      const auto B = frozen_b(traj, t, fr);
      const auto col = static_cast<Eigen::Index>(t);
      if (std::abs(A) == 0.0) {
        g.psd(f, col) = std::numeric_limits<double>::infinity();
        if (frf) (*g.frf_mag)(f, col) = std::numeric_limits<double>::infinity();
        g.singular.emplace_back(static_cast<std::size_t>(f), t);
        continue;
      }
      const double h = std::abs(B / A);
      g.psd(f, col) = h * h * s2;
      if (frf) (*g.frf_mag)(f, col) = h * std::sqrt(s2);
    }
  }
  return g;
}

}  // namespace

FrozenGrid frozen_psd(const ParameterTrajectory& traj, std::span<const double> freqs) {
  return frozen_grid(traj, freqs, false);
}

FrozenGrid frozen_frf(const ParameterTrajectory& traj, std::span<const double> freqs) {
  if (!traj.structure.has_x()) {
    throw UnsupportedModel("a frequency response needs an exogenous channel; " +
                           traj.structure.label() + " is output-only");
  }
  return frozen_grid(traj, freqs, true);
}

ModalTrack frozen_modes(const ParameterTrajectory& traj) {
  traj.validate();
  const std::size_t n = traj.size();
  const auto na = static_cast<Eigen::Index>(traj.structure.na);
  const auto cols = static_cast<Eigen::Index>(n);

  ModalTrack m;
  m.times.resize(n);
  m.frequencies = Eigen::MatrixXd::Constant(na, cols, kNaN);
  m.dampings = Eigen::MatrixXd::Constant(na, cols, kNaN);
  m.pole_magnitudes = Eigen::MatrixXd::Constant(na, cols, kNaN);
  m.real_pole.setConstant(na, cols, false);
  m.marginal.setConstant(na, cols, false);

  struct Mode {
    double freq, zeta, mag;
    bool real;
  };
  Eigen::Index used_rows = 0;
  std::vector<double> a(static_cast<std::size_t>(na));
  for (std::size_t t = 0; t < n; ++t) {
    m.times[t] = traj.t0 + static_cast<double>(t) * traj.ts;
    for (Eigen::Index i = 0; i < na; ++i) {
      a[static_cast<std::size_t>(i)] = traj.theta(static_cast<Eigen::Index>(t), i);
    }
    std::vector<std::complex<double>> roots;
    try {
      roots = polynomial_roots(a);
    } catch (const NumericalFailure&) {
      m.failed.push_back(t);
      continue;
    }
    std::vector<Mode> modes;
    for (const auto& z : roots) {
      if (z.imag() < 0.0) continue;  // conjugate partner reported once
      const auto mp = pole_to_modal(z, traj.ts);
      modes.push_back({mp.frequency_hz, mp.damping, std::abs(z), z.imag() == 0.0});
    }
    std::stable_sort(modes.begin(), modes.end(),
                     [](const Mode& l, const Mode& r) { return l.freq < r.freq; });
    const auto col = static_cast<Eigen::Index>(t);
    for (std::size_t r = 0; r < modes.size(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      m.frequencies(row, col) = modes[r].freq;
      m.dampings(row, col) = modes[r].zeta;
      m.pole_magnitudes(row, col) = modes[r].mag;
      m.real_pole(row, col) = modes[r].real;
      m.marginal(row, col) = modes[r].mag > 1.0 - kMarginalPoleTolerance;
    }
    used_rows = std::max(used_rows, static_cast<Eigen::Index>(modes.size()));
  }
  // Drop rows that never hold a mode (conjugate pairs halve the count).
  m.frequencies.conservativeResize(used_rows, cols);
  m.dampings.conservativeResize(used_rows, cols);
  m.pole_magnitudes.conservativeResize(used_rows, cols);
  m.real_pole.conservativeResize(used_rows, cols);
  m.marginal.conservativeResize(used_rows, cols);
  return m;
}

ModalTrack track_modes(const ModalTrack& modes) {
  ModalTrack out = modes;
  const Eigen::Index rows = modes.frequencies.rows();
  const Eigen::Index cols = modes.frequencies.cols();
  if (rows == 0 || cols == 0) return out;

  std::vector<double> last(static_cast<std::size_t>(rows), kNaN);
  for (Eigen::Index r = 0; r < rows; ++r) last[static_cast<std::size_t>(r)] = modes.frequencies(r, 0);

  struct Pair {
    double dist;
    Eigen::Index track, mode;
  };
  for (Eigen::Index c = 1; c < cols; ++c) {
    std::vector<Eigen::Index> present;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!std::isnan(modes.frequencies(r, c))) present.push_back(r);
    }
    std::vector<Pair> pairs;
    for (Eigen::Index tr = 0; tr < rows; ++tr) {
      if (std::isnan(last[static_cast<std::size_t>(tr)])) continue;
      for (auto md : present) {
        pairs.push_back({std::abs(modes.frequencies(md, c) - last[static_cast<std::size_t>(tr)]), tr, md});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) {
      if (l.dist != r.dist) return l.dist < r.dist;
      if (l.track != r.track) return l.track < r.track;
      return l.mode < r.mode;
    });
    std::vector<Eigen::Index> assign(static_cast<std::size_t>(rows), -1);  // track -> mode
    std::vector<bool> mode_taken(static_cast<std::size_t>(rows), false);
    for (const auto& p : pairs) {
      if (assign[static_cast<std::size_t>(p.track)] >= 0 || mode_taken[static_cast<std::size_t>(p.mode)]) continue;
      assign[static_cast<std::size_t>(p.track)] = p.mode;
      mode_taken[static_cast<std::size_t>(p.mode)] = true;
    }
    // New modes fill free tracks in frequency order.
    for (auto md : present) {
      if (mode_taken[static_cast<std::size_t>(md)]) continue;
      for (Eigen::Index tr = 0; tr < rows; ++tr) {
        if (assign[static_cast<std::size_t>(tr)] < 0 && std::isnan(last[static_cast<std::size_t>(tr)])) {
          assign[static_cast<std::size_t>(tr)] = md;
          mode_taken[static_cast<std::size_t>(md)] = true;
          break;
        }
      }
      if (mode_taken[static_cast<std::size_t>(md)]) continue;
      for (Eigen::Index tr = 0; tr < rows; ++tr) {
        if (assign[static_cast<std::size_t>(tr)] < 0) {
          assign[static_cast<std::size_t>(tr)] = md;
          mode_taken[static_cast<std::size_t>(md)] = true;
          break;
        }
      }
    }
    for (Eigen::Index tr = 0; tr < rows; ++tr) {
      const Eigen::Index md = assign[static_cast<std::size_t>(tr)];
      if (md < 0) {
        out.frequencies(tr, c) = kNaN;
        out.dampings(tr, c) = kNaN;
        out.pole_magnitudes(tr, c) = kNaN;
        out.real_pole(tr, c) = false;
        out.marginal(tr, c) = false;
        continue;
      }
      out.frequencies(tr, c) = modes.frequencies(md, c);
      out.dampings(tr, c) = modes.dampings(md, c);
      out.pole_magnitudes(tr, c) = modes.pole_magnitudes(md, c);
      out.real_pole(tr, c) = modes.real_pole(md, c);
      out.marginal(tr, c) = modes.marginal(md, c);
      last[static_cast<std::size_t>(tr)] = modes.frequencies(md, c);
    }
  }
  return out;
}

std::vector<double> uniform_freq_grid(double ts, std::size_t count) {
  if (count < 2) throw ValidationError("frequency grid needs at least 2 points");
  const double nyquist = 0.5 / ts;
  std::vector<double> f(count);
  for (std::size_t i = 0; i < count; ++i) {
    f[i] = nyquist * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  f.back() = nyquist;
  return f;
}

}  // namespace tvarx
