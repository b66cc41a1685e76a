#include "tvarx/rml.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvarx/error.hpp"
#include "tvarx/nonparametric.hpp"

namespace tvarx {

Passes parse_passes(std::string_view name) {
  if (name == "single_forward" || name == "single" || name == "1") return Passes::single_forward;
  if (name == "three_pass" || name == "three" || name == "3") return Passes::three_pass;
  throw ValidationError("unknown pass scheme '" + std::string(name) + "'");
}

std::string_view to_string(Passes p) {
  return p == Passes::single_forward ? "single_forward" : "three_pass";
}

void EstimationOptions::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("initial covariance scale alpha must be positive");
  }
}

RmlState RmlState::initial(std::size_t dim, double alpha) {
  RmlState s;
  s.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  s.P = alpha * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim));
  return s;
}

namespace {

struct Workspace {
  Eigen::VectorXd Pphi;
  Eigen::VectorXd phiP;
  Eigen::VectorXd k;

  explicit Workspace(Eigen::Index d) : Pphi(d), phiP(d), k(d) {}
};

double step(RmlState& st, const Eigen::VectorXd& phi, double y_t, double lambda, Workspace& ws) {
  const std::size_t t = st.t + 1;
  ws.Pphi.noalias() = st.P * phi;
  const double denom = lambda + phi.dot(ws.Pphi);
  const double e = y_t - phi.dot(st.theta);
  if (!std::isfinite(denom) || !std::isfinite(e) || denom == 0.0) {
    throw NumericalFailure("non-finite quantity in the recursive update", t);
  }
  ws.k = ws.Pphi / denom;
  st.theta.noalias() += ws.k * e;
  ws.phiP.noalias() = st.P.transpose() * phi;
  st.P.noalias() -= ws.k * ws.phiP.transpose();
  st.P /= lambda;

  const Eigen::Index d = st.P.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const double m = 0.5 * (st.P(i, j) + st.P(j, i));
      st.P(i, j) = m;
      st.P(j, i) = m;
    }
  }
  if (!st.theta.allFinite() || !st.P.diagonal().allFinite()) {
    throw NumericalFailure("non-finite quantity in the recursive update", t);
  }
  st.t = t;
  return e;
}

}  // namespace

double rml_step(RmlState& state, const Eigen::VectorXd& phi, double y_t, double lambda) {
  if (phi.size() != state.theta.size() || state.P.rows() != phi.size() ||
      state.P.cols() != phi.size()) {
    throw ValidationError("regressor and state dimensions disagree");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ValidationError("forgetting factor must lie in (0, 1]");
  Workspace ws(phi.size());
  return step(state, phi, y_t, lambda, ws);
}

void require_identifiable(const ModelStructure& s, std::size_t n) {
  if (n <= s.param_count()) {
    throw ValidationError("record of " + std::to_string(n) + " samples is too short for " +
                          s.label() + " with " + std::to_string(s.param_count()) +
                          " coefficients per instant");
  }
}

std::vector<double> innovations_variance(std::span<const double> residuals, std::size_t M) {
  return sliding_variance(residuals, M);
}

EstimationResult run_pass(const Signal& y, const Signal* x, const ModelStructure& s, RmlState state,
                          bool reversed, const EstimationOptions& opts,
                          const StepObserver& observer) {
  s.validate();
  opts.validate();
  if (s.has_x() != (x != nullptr)) {
    throw ValidationError("structure " + s.label() +
                          (s.has_x() ? " needs an exogenous signal" : " takes no exogenous signal"));
  }
  if (x != nullptr && x->size() != y.size()) {
    throw ValidationError("input and output lengths differ");
  }
  const std::size_t n = y.size();
  const auto d = static_cast<Eigen::Index>(s.param_count());
  if (state.theta.size() != d || state.P.rows() != d || state.P.cols() != d) {
    throw ValidationError("initial state dimension does not match " + s.label());
  }

  std::vector<double> yv(y.samples().begin(), y.samples().end());
  std::vector<double> xv;
  if (x != nullptr) xv.assign(x->samples().begin(), x->samples().end());
  if (reversed) {
    std::reverse(yv.begin(), yv.end());
    std::reverse(xv.begin(), xv.end());
  }

  EstimationResult out;
  out.trajectory.structure = s;
  out.trajectory.ts = y.ts();
  out.trajectory.t0 = y.t0();
  out.trajectory.theta.resize(static_cast<Eigen::Index>(n), d);
  out.residuals.resize(n);

  state.t = 0;
  Workspace ws(d);
  Eigen::VectorXd phi(d);
  for (std::size_t t = 1; t <= n; ++t) {
    fill_regressor(yv, xv, t, s, phi.data());
    out.residuals[t - 1] = step(state, phi, yv[t - 1], s.lambda, ws);
    out.trajectory.theta.row(static_cast<Eigen::Index>(t - 1)) = state.theta.transpose();
    if (observer) observer(state);
  }

  // Short records cannot host the full variance window; shrink it.
  const std::size_t M = std::min(opts.variance_window_M, (n - 1) / 2);
  out.trajectory.sigma2e = innovations_variance(out.residuals, M);
  out.final_state = std::move(state);
  return out;
}

EstimationResult estimate(const Signal& y, const Signal* x, const ModelStructure& s,
                          const EstimationOptions& opts) {
  if (opts.passes == Passes::three_pass) return three_pass_estimate(y, x, s, opts);
  s.validate();
  opts.validate();
  return run_pass(y, x, s, RmlState::initial(s.param_count(), opts.alpha), false, opts);
}

EstimationResult three_pass_estimate(const Signal& y, const Signal* x, const ModelStructure& s,
                                     const EstimationOptions& opts) {
  s.validate();
  opts.validate();
  auto first = run_pass(y, x, s, RmlState::initial(s.param_count(), opts.alpha), false, opts);
  auto second = run_pass(y, x, s, std::move(first.final_state), true, opts);
  return run_pass(y, x, s, std::move(second.final_state), false, opts);
}

}  // namespace tvarx
