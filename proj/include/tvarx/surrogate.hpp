#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tvarx/rml.hpp"
#include "tvarx/selection.hpp"
#include "tvarx/signal.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx {

enum class Scheme { linear, spline, v5cubic };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme s);
/// Knots a scheme needs: 2, 4 and 3 respectively.
std::size_t min_knots(Scheme s);

struct TemperatureRecord {
  double temp = 0.0;
  Signal y;
  Signal x;
};

struct SurrogateModel {
  ModelStructure structure;
  double ts = 1.0;
  double t0 = 0.0;
  std::vector<double> temps;
  std::vector<ParameterTrajectory> trajectories;
  Scheme scheme = Scheme::linear;

  std::size_t length() const noexcept {
    return trajectories.empty() ? 0 : trajectories.front().size();
  }
  bool uniform_knots() const;
  void validate() const;
};

/// Weights w such that the interpolant at `T` is sum_k w[k] f(temps[k]).
/// Refuses with InterpolationRefused when there are too few knots or when
/// v5cubic is asked to extrapolate.
struct InterpolationWeights {
  std::vector<double> w;
  /// Set when `T` coincides with a knot.
  std::optional<std::size_t> knot;
  /// v5cubic on non-uniform knots was reparameterized onto index space.
  bool reparameterized = false;
};

InterpolationWeights interpolation_weights(std::span<const double> temps, double T, Scheme scheme);

SurrogateModel build_surrogate(std::vector<TemperatureRecord> records, const ModelStructure& s,
                               const EstimationOptions& opts = {}, Scheme scheme = Scheme::linear,
                               std::size_t jobs = 1);

/// Coefficient-wise interpolation of theta; sigma2e is interpolated in log
/// space.
ParameterTrajectory interpolate_params(const SurrogateModel& m, double T);
ParameterTrajectory interpolate_params(const SurrogateModel& m, double T, Scheme scheme);

Signal simulate_at_temperature(const SurrogateModel& m, double T, const Signal& x,
                               const Signal* noise = nullptr);
Signal simulate_at_temperature(const SurrogateModel& m, double T, Scheme scheme, const Signal& x,
                               const Signal* noise = nullptr);

/// Zero-noise simulation at `T` scored by ESS/SSS against `y_ref`.
double evaluate_surrogate(const SurrogateModel& m, double T, const Signal& x, const Signal& y_ref);
double evaluate_surrogate(const SurrogateModel& m, double T, Scheme scheme, const Signal& x,
                          const Signal& y_ref);

/// Shared-structure choice by leave-one-knot-out validation: each interior
/// knot is dropped in turn, reconstructed from the remaining knots with
/// `scheme` and scored by simulation ESS/SSS against its record. The
/// candidate score is the worst such ESS/SSS; the returned list is ranked
/// ascending with diverged candidates last.
struct SharedStructureScore {
  ModelStructure structure;
  double worst_ess_sss = 0.0;
  std::vector<double> held_out_ess_sss;
  CandidateStatus status = CandidateStatus::ok;
};

std::vector<SharedStructureScore> select_shared_structure(
    const std::vector<TemperatureRecord>& records, const StructureGrid& grid,
    const EstimationOptions& opts = {}, Scheme scheme = Scheme::linear, std::size_t jobs = 1);

}  // namespace tvarx
