#include "tvarx/tv_model.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "tvarx/error.hpp"

namespace tvarx {

std::string ModelStructure::label() const {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, lambda);
  std::string lam(buf, res.ptr);
  if (nb) return "TARX(" + std::to_string(na) + "," + std::to_string(*nb) + ")_" + lam;
  return "TAR(" + std::to_string(na) + ")_" + lam;
}

void ModelStructure::validate() const {
  if (na < 1) throw ValidationError("AR order na must be >= 1, got " + std::to_string(na));
  if (nb && *nb < 0) throw ValidationError("X order nb must be >= 0, got " + std::to_string(*nb));
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ValidationError("forgetting factor must lie in (0, 1]");
  }
}

void ParameterTrajectory::validate() const {
  structure.validate();
  if (static_cast<std::size_t>(theta.cols()) != structure.param_count()) {
    throw ValidationError("theta has " + std::to_string(theta.cols()) + " columns, structure " +
                          structure.label() + " needs " + std::to_string(structure.param_count()));
  }
  if (theta.rows() < 1) throw ValidationError("trajectory is empty");
  if (sigma2e.size() != size()) {
    throw ValidationError("sigma2e length does not match the trajectory length");
  }
  for (double v : sigma2e) {
    if (!(v >= 0.0)) throw ValidationError("sigma2e must be nonnegative");
  }
  if (!(ts > 0.0)) throw ValidationError("sampling interval must be positive");
}

void fill_regressor(std::span<const double> y, std::span<const double> x, std::size_t t,
                    const ModelStructure& s, double* out) {
  const std::size_t na = static_cast<std::size_t>(s.na);
  for (std::size_t i = 1; i <= na; ++i) out[i - 1] = t > i ? -y[t - 1 - i] : 0.0;
  if (s.nb) {
    const std::size_t nb = static_cast<std::size_t>(*s.nb);
    for (std::size_t i = 0; i <= nb; ++i) out[na + i] = t > i ? x[t - 1 - i] : 0.0;
  }
}

namespace {

void check_x(const ModelStructure& s, const Signal& y, const Signal* x) {
  if (s.has_x() && x == nullptr) {
    throw ValidationError("structure " + s.label() + " needs an exogenous signal");
  }
  if (!s.has_x() && x != nullptr) {
    throw ValidationError("structure " + s.label() + " takes no exogenous signal");
  }
  if (x != nullptr && x->size() != y.size()) {
    throw ValidationError("input and output lengths differ (" + std::to_string(x->size()) +
                          " vs " + std::to_string(y.size()) + ")");
  }
}

}  // namespace

Eigen::VectorXd regressor(const Signal& y, const Signal* x, std::size_t t, const ModelStructure& s) {
  s.validate();
  check_x(s, y, x);
  if (t < 1 || t > y.size()) {
    throw ValidationError("time index " + std::to_string(t) + " outside 1.." +
                          std::to_string(y.size()));
  }
  Eigen::VectorXd phi(static_cast<Eigen::Index>(s.param_count()));
  fill_regressor(y.samples(), x ? x->samples() : std::span<const double>{}, t, s, phi.data());
  return phi;
}

PredictionResult predict_one_step(const ParameterTrajectory& traj, const Signal& y, const Signal* x,
                                  EvalRange range) {
  const auto& s = traj.structure;
  check_x(s, y, x);
  if (traj.size() != y.size()) {
    throw ValidationError("trajectory length " + std::to_string(traj.size()) +
                          " does not match the signal length " + std::to_string(y.size()));
  }
  const std::size_t n = y.size();
  const std::size_t d = s.param_count();
  std::vector<double> pred(n), res(n), phi(d);
  auto ys = y.samples();
  auto xs = x ? x->samples() : std::span<const double>{};
  for (std::size_t t = 1; t <= n; ++t) {
    fill_regressor(ys, xs, t, s, phi.data());
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += phi[k] * traj.theta(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(k));
    pred[t - 1] = acc;
    res[t - 1] = ys[t - 1] - acc;
  }

  const std::size_t last = range.last == 0 ? n : std::min(range.last, n);
  if (range.first >= last) throw ValidationError("empty evaluation range");
  double num = 0.0, den = 0.0;
  for (std::size_t i = range.first; i < last; ++i) {
    num += res[i] * res[i];
    den += ys[i] * ys[i];
  }
  if (!(den > 0.0)) throw ValidationError("signal has zero energy over the evaluation range");

  PredictionResult out{Signal(std::move(pred), y.ts(), y.t0()), Signal(std::move(res), y.ts(), y.t0()),
                       num / den};
  return out;
}

Signal simulate(const ParameterTrajectory& traj, const Signal& x, const Signal* noise,
                double overflow_guard) {
  const auto& s = traj.structure;
  if (!s.has_x()) {
    throw UnsupportedModel("simulation needs an exogenous channel; " + s.label() +
                           " is output-only");
  }
  const std::size_t n = traj.size();
  if (x.size() != n) {
    throw ValidationError("input length " + std::to_string(x.size()) +
                          " does not match the trajectory length " + std::to_string(n));
  }
  if (noise != nullptr && noise->size() != n) {
    throw ValidationError("noise length does not match the trajectory length");
  }
  const std::size_t na = static_cast<std::size_t>(s.na);
  const std::size_t nb = static_cast<std::size_t>(*s.nb);
  auto xs = x.samples();
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 1; t <= n; ++t) {
    const auto row = static_cast<Eigen::Index>(t - 1);
    double acc = noise ? (*noise)[t - 1] : 0.0;
    for (std::size_t i = 1; i <= na && i < t; ++i) {
      acc -= traj.theta(row, static_cast<Eigen::Index>(i - 1)) * y[t - 1 - i];
    }
    for (std::size_t i = 0; i <= nb && i < t; ++i) {
      acc += traj.theta(row, static_cast<Eigen::Index>(na + i)) * xs[t - 1 - i];
    }
    if (!std::isfinite(acc) || std::abs(acc) > overflow_guard) {
      throw DivergedSimulation("simulated output exceeded the overflow guard", t);
    }
    y[t - 1] = acc;
  }
  return Signal(std::move(y), traj.ts, traj.t0);
}

}  // namespace tvarx
