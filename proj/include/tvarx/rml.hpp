#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "tvarx/signal.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx {

enum class Passes { single_forward, three_pass };

Passes parse_passes(std::string_view name);
std::string_view to_string(Passes p);

struct EstimationOptions {
  double alpha = 1e4;
  Passes passes = Passes::three_pass;
  std::size_t variance_window_M = 10;

  void validate() const;
};

struct RmlState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd P;
  std::size_t t = 0;

  static RmlState initial(std::size_t dim, double alpha);
};

/// One exponentially weighted recursive least-squares update. Returns the
/// a-priori prediction error y_t - phi' theta[t-1]. Throws NumericalFailure
/// naming time `state.t + 1` on a non-finite intermediate.
double rml_step(RmlState& state, const Eigen::VectorXd& phi, double y_t, double lambda);

struct EstimationResult {
  ParameterTrajectory trajectory;
  /// A-priori prediction errors of the returned pass.
  std::vector<double> residuals;
  RmlState final_state;
};

/// Called after every update with the post-update state; used by tests that
/// inspect the covariance recursion.
using StepObserver = std::function<void(const RmlState&)>;

/// Single recursive pass over t = 1..N starting from `state`. With
/// `reversed` the recursion runs over the time-reversed record; theta rows
/// and residuals are stored in recursion order.
EstimationResult run_pass(const Signal& y, const Signal* x, const ModelStructure& s,
                          RmlState state, bool reversed, const EstimationOptions& opts,
                          const StepObserver& observer = {});

/// Single forward pass from theta = 0, P = alpha I (or three passes when
/// `opts.passes` says so).
EstimationResult estimate(const Signal& y, const Signal* x, const ModelStructure& s,
                          const EstimationOptions& opts = {});

/// Forward, backward (time-reversed record), forward; each pass starts from
/// the terminal estimate and covariance of the previous one.
EstimationResult three_pass_estimate(const Signal& y, const Signal* x, const ModelStructure& s,
                                     const EstimationOptions& opts = {});

std::vector<double> innovations_variance(std::span<const double> residuals, std::size_t M);

/// Throws ValidationError unless the record is longer than the per-instant
/// parameter count.
void require_identifiable(const ModelStructure& s, std::size_t n);

}  // namespace tvarx
