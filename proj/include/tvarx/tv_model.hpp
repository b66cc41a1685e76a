#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvarx/signal.hpp"

namespace tvarx {

/// AR order, optional X order (absent for output-only TAR models) and
/// forgetting factor.
struct ModelStructure {
  int na = 1;
  std::optional<int> nb;
  double lambda = 1.0;

  bool has_x() const noexcept { return nb.has_value(); }
  /// Per-instant coefficient count: na (+ nb + 1 with an X part).
  std::size_t param_count() const noexcept {
    return static_cast<std::size_t>(na) + (nb ? static_cast<std::size_t>(*nb) + 1 : 0);
  }
  /// First sample not affected by zero initial conditions: max(na, nb + 1).
  std::size_t transient() const noexcept {
    const int lag = nb ? std::max(na, *nb + 1) : na;
    return static_cast<std::size_t>(lag);
  }
  /// e.g. "TAR(6)_0.6" or "TARX(4,4)_0.5".
  std::string label() const;
  void validate() const;

  friend bool operator==(const ModelStructure&, const ModelStructure&) = default;
};

/// theta row t (0-based storage of time t + 1) is [a_1 .. a_na, b_0 .. b_nb].
struct ParameterTrajectory {
  ModelStructure structure;
  Eigen::MatrixXd theta;
  std::vector<double> sigma2e;
  double ts = 1.0;
  double t0 = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(theta.rows()); }
  void validate() const;
};

struct PredictionResult {
  Signal predicted;
  Signal residuals;
  double rss_sss = 0.0;
};

/// Half-open sample range [first, last) used for scoring; `last == 0` means
/// the end of the record.
struct EvalRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Writes phi[t] for 1-based time `t` into `out` (length param_count()).
/// Lags before the start of the record contribute zeros. `x` is empty for
/// TAR structures.
void fill_regressor(std::span<const double> y, std::span<const double> x, std::size_t t,
                    const ModelStructure& s, double* out);

/// phi[t] = [-y[t-1] .. -y[t-na], x[t] .. x[t-nb]] with 1-based `t`.
Eigen::VectorXd regressor(const Signal& y, const Signal* x, std::size_t t, const ModelStructure& s);

PredictionResult predict_one_step(const ParameterTrajectory& traj, const Signal& y, const Signal* x,
                                  EvalRange range = {});

/// Recursive output of the frozen transfer function B/A driven by `x`
/// (plus `noise` when given), with coefficients taken at the current time.
/// Throws DivergedSimulation once |y[t]| exceeds `overflow_guard`.
Signal simulate(const ParameterTrajectory& traj, const Signal& x, const Signal* noise = nullptr,
                double overflow_guard = 1e12);

}  // namespace tvarx
