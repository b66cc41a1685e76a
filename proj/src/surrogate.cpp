#include "tvarx/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "tvarx/error.hpp"
#include "tvarx/parallel.hpp"

namespace tvarx {

Scheme parse_scheme(std::string_view name) {
  if (name == "linear") return Scheme::linear;
  if (name == "spline") return Scheme::spline;
  if (name == "v5cubic") return Scheme::v5cubic;
  throw ValidationError("unknown interpolation scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::linear: return "linear";
    case Scheme::spline: return "spline";
    case Scheme::v5cubic: return "v5cubic";
  }
  return "?";
}

std::size_t min_knots(Scheme s) {
  switch (s) {
    case Scheme::linear: return 2;
    case Scheme::spline: return 4;
    case Scheme::v5cubic: return 3;
  }
  return 2;
}

namespace {

bool is_uniform(std::span<const double> t) {
  if (t.size() < 3) return true;
  const double h = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::abs(h)) return false;
  }
  return true;
}

void check_knots(std::span<const double> temps, Scheme scheme) {
  if (temps.size() < min_knots(scheme)) {
    std::string why = "the " + std::string(to_string(scheme)) + " scheme needs at least " +
                      std::to_string(min_knots(scheme)) + " temperatures, got " +
                      std::to_string(temps.size());
    throw InterpolationRefused(why);
  }
  for (std::size_t i = 1; i < temps.size(); ++i) {
    if (!(temps[i] > temps[i - 1])) {
      throw ValidationError("temperatures must be strictly increasing");
    }
  }
}

// Segment index j with temps[j] <= T <= temps[j + 1], clamped to the end
// segments for T outside the knot range.
std::size_t segment(std::span<const double> temps, double T) {
  const auto it = std::upper_bound(temps.begin(), temps.end(), T);
  const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - temps.begin() - 1, 0));
  return std::min(j, temps.size() - 2);
}

std::vector<double> linear_weights(std::span<const double> temps, double T) {
  std::vector<double> w(temps.size(), 0.0);
  const std::size_t j = segment(temps, T);
  const double h = temps[j + 1] - temps[j];
  w[j] = (temps[j + 1] - T) / h;
  w[j + 1] = (T - temps[j]) / h;
  return w;
}

std::vector<double> spline_weights(std::span<const double> temps, double T) {
  const std::size_t K = temps.size();
  std::vector<double> h(K - 1);
  for (std::size_t i = 0; i + 1 < K; ++i) h[i] = temps[i + 1] - temps[i];

  // Second derivatives at the interior knots are linear in the data: solve
  // once per unit data vector.
  const auto m = static_cast<Eigen::Index>(K - 2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(K));
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t i = static_cast<std::size_t>(r) + 1;
    A(r, r) = 2.0 * (h[i - 1] + h[i]);
    if (r > 0) A(r, r - 1) = h[i - 1];
    if (r + 1 < m) A(r, r + 1) = h[i];
    rhs(r, static_cast<Eigen::Index>(i + 1)) += 6.0 / h[i];
    rhs(r, static_cast<Eigen::Index>(i)) -= 6.0 / h[i] + 6.0 / h[i - 1];
    rhs(r, static_cast<Eigen::Index>(i - 1)) += 6.0 / h[i - 1];
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  M.middleRows(1, m) = A.partialPivLu().solve(rhs);

  const std::size_t j = segment(temps, T);
  const double hj = h[j];
  const double l = temps[j + 1] - T;
  const double r = T - temps[j];
  std::vector<double> w(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double Mj = M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    const double Mj1 = M(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(k));
    const double fj = k == j ? 1.0 : 0.0;
    const double fj1 = k == j + 1 ? 1.0 : 0.0;
    w[k] = Mj * l * l * l / (6.0 * hj) + Mj1 * r * r * r / (6.0 * hj) +
           (fj / hj - Mj * hj / 6.0) * l + (fj1 / hj - Mj1 * hj / 6.0) * r;
  }
  return w;
}

double keys_kernel(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
  if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

std::vector<double> v5cubic_weights(std::span<const double> temps, double T, bool& reparameterized) {
  const std::size_t K = temps.size();
  if (T < temps.front() || T > temps.back()) {
    throw InterpolationRefused(
        "cubic convolution (v5cubic) cannot be used for extrapolation: temperature " +
        std::to_string(T) + " lies outside [" + std::to_string(temps.front()) + ", " +
        std::to_string(temps.back()) + "]");
  }
  double u;
  reparameterized = !is_uniform(temps);
  if (!reparameterized) {
    u = (T - temps.front()) / (temps[1] - temps[0]);
  } else {
    const std::size_t j = segment(temps, T);
    u = static_cast<double>(j) + (T - temps[j]) / (temps[j + 1] - temps[j]);
  }
  const auto j = std::min(static_cast<std::size_t>(std::floor(u)), K - 2);
  const double s = u - static_cast<double>(j);

  std::vector<double> w(K, 0.0);
  // Contribution of (possibly virtual) node index `idx`; the virtual end
  // nodes are 3 f0 - 3 f1 + f2 and its mirror.
  auto add = [&](std::ptrdiff_t idx, double c) {
    if (idx < 0) {
      w[0] += 3.0 * c;
      w[1] -= 3.0 * c;
      w[2] += c;
    } else if (idx >= static_cast<std::ptrdiff_t>(K)) {
      w[K - 1] += 3.0 * c;
      w[K - 2] -= 3.0 * c;
      w[K - 3] += c;
    } else {
      w[static_cast<std::size_t>(idx)] += c;
    }
  };
  const auto jj = static_cast<std::ptrdiff_t>(j);
  add(jj - 1, keys_kernel(s + 1.0));
  add(jj, keys_kernel(s));
  add(jj + 1, keys_kernel(1.0 - s));
  add(jj + 2, keys_kernel(2.0 - s));
  return w;
}

ParameterTrajectory combine(const std::vector<const ParameterTrajectory*>& trajs,
                            const std::vector<double>& w) {
  const auto& first = *trajs.front();
  ParameterTrajectory out;
  out.structure = first.structure;
  out.ts = first.ts;
  out.t0 = first.t0;
  out.theta = Eigen::MatrixXd::Zero(first.theta.rows(), first.theta.cols());
  std::vector<double> log_s2(first.size(), 0.0);
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    if (w[k] == 0.0) continue;
    out.theta += w[k] * trajs[k]->theta;
    for (std::size_t t = 0; t < log_s2.size(); ++t) {
      log_s2[t] += w[k] * std::log(std::max(trajs[k]->sigma2e[t], kVarianceFloor));
    }
  }
  out.sigma2e.resize(log_s2.size());
  for (std::size_t t = 0; t < log_s2.size(); ++t) out.sigma2e[t] = std::exp(log_s2[t]);
  return out;
}

}  // namespace

InterpolationWeights interpolation_weights(std::span<const double> temps, double T, Scheme scheme) {
  check_knots(temps, scheme);
  if (!std::isfinite(T)) throw ValidationError("query temperature must be finite");
  InterpolationWeights out;
  if (scheme == Scheme::v5cubic && (T < temps.front() || T > temps.back())) {
    bool dummy = false;
    v5cubic_weights(temps, T, dummy);  // throws the refusal
  }
  const auto it = std::find(temps.begin(), temps.end(), T);
  if (it != temps.end()) {
    out.knot = static_cast<std::size_t>(it - temps.begin());
    out.w.assign(temps.size(), 0.0);
    out.w[*out.knot] = 1.0;
    out.reparameterized = scheme == Scheme::v5cubic && !is_uniform(temps);
    return out;
  }
  switch (scheme) {
    case Scheme::linear: out.w = linear_weights(temps, T); break;
    case Scheme::spline: out.w = spline_weights(temps, T); break;
    case Scheme::v5cubic: out.w = v5cubic_weights(temps, T, out.reparameterized); break;
  }
  return out;
}

bool SurrogateModel::uniform_knots() const { return is_uniform(temps); }

void SurrogateModel::validate() const {
  structure.validate();
  if (temps.size() < 2) throw ValidationError("a surrogate needs at least 2 temperatures");
  check_knots(temps, scheme);
  if (trajectories.size() != temps.size()) {
    throw ValidationError("one trajectory per temperature is required");
  }
  for (const auto& tr : trajectories) {
    tr.validate();
    if (tr.structure != structure) throw ValidationError("trajectories must share the structure");
    if (tr.size() != trajectories.front().size()) {
      throw ValidationError("trajectories must share the record length");
    }
    if (std::abs(tr.ts - ts) > 1e-12 * ts) {
      throw ValidationError("trajectories must share the sampling interval");
    }
  }
}

SurrogateModel build_surrogate(std::vector<TemperatureRecord> records, const ModelStructure& s,
                               const EstimationOptions& opts, Scheme scheme, std::size_t jobs) {
  s.validate();
  opts.validate();
  if (records.size() < 2) throw ValidationError("a surrogate needs at least 2 temperatures");
  std::stable_sort(records.begin(), records.end(),
                   [](const TemperatureRecord& a, const TemperatureRecord& b) { return a.temp < b.temp; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].temp == records[i - 1].temp) {
      throw ValidationError("duplicate temperature " + std::to_string(records[i].temp));
    }
  }
  const std::size_t n = records.front().y.size();
  const double ts = records.front().y.ts();
  for (const auto& r : records) {
    if (r.y.size() != n || r.x.size() != n) {
      throw ValidationError("all records must share one length (" + std::to_string(n) +
                            " samples); temperature " + std::to_string(r.temp) + " differs");
    }
    if (std::abs(r.y.ts() - ts) > 1e-9 * ts || std::abs(r.x.ts() - ts) > 1e-9 * ts) {
      throw ValidationError("all records must share one sampling interval");
    }
  }

  SurrogateModel m;
  m.structure = s;
  m.ts = ts;
  m.t0 = records.front().y.t0();
  m.scheme = scheme;
  for (const auto& r : records) m.temps.push_back(r.temp);
  check_knots(m.temps, scheme);

  const bool with_x = s.has_x();
  m.trajectories.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = records[i];
    m.trajectories[i] = three_pass_estimate(r.y, with_x ? &r.x : nullptr, s, opts).trajectory;
    m.trajectories[i].ts = ts;
    m.trajectories[i].t0 = m.t0;
  });
  return m;
}

ParameterTrajectory interpolate_params(const SurrogateModel& m, double T) {
  return interpolate_params(m, T, m.scheme);
}

ParameterTrajectory interpolate_params(const SurrogateModel& m, double T, Scheme scheme) {
  const auto iw = interpolation_weights(m.temps, T, scheme);
  if (m.trajectories.size() != m.temps.size()) {
    throw ValidationError("one trajectory per temperature is required");
  }
  if (iw.knot) return m.trajectories[*iw.knot];
  std::vector<const ParameterTrajectory*> ptrs;
  for (const auto& t : m.trajectories) ptrs.push_back(&t);
  return combine(ptrs, iw.w);
}

Signal simulate_at_temperature(const SurrogateModel& m, double T, const Signal& x,
                               const Signal* noise) {
  return simulate_at_temperature(m, T, m.scheme, x, noise);
}

Signal simulate_at_temperature(const SurrogateModel& m, double T, Scheme scheme, const Signal& x,
                               const Signal* noise) {
  return simulate(interpolate_params(m, T, scheme), x, noise);
}

double evaluate_surrogate(const SurrogateModel& m, double T, const Signal& x, const Signal& y_ref) {
  return evaluate_surrogate(m, T, m.scheme, x, y_ref);
}

double evaluate_surrogate(const SurrogateModel& m, double T, Scheme scheme, const Signal& x,
                          const Signal& y_ref) {
  const auto sim = simulate_at_temperature(m, T, scheme, x);
  if (sim.size() != y_ref.size()) throw ValidationError("reference length does not match");
  return ess_sss(sim.samples(), y_ref.samples());
}

std::vector<SharedStructureScore> select_shared_structure(
    const std::vector<TemperatureRecord>& records_in, const StructureGrid& grid,
    const EstimationOptions& opts, Scheme scheme, std::size_t jobs) {
  auto records = records_in;
  std::stable_sort(records.begin(), records.end(),
                   [](const TemperatureRecord& a, const TemperatureRecord& b) { return a.temp < b.temp; });
  if (records.size() < 3) {
    throw ValidationError("leave-one-out validation needs at least 3 temperatures");
  }
  std::vector<double> temps;
  for (const auto& r : records) temps.push_back(r.temp);
  // Each held-out reconstruction uses one knot fewer.
  std::vector<double> reduced(temps.begin() + 1, temps.end());
  check_knots(reduced, scheme);

  const auto structures = grid.structures();
  if (structures.empty()) throw ValidationError("empty structure grid");
  for (const auto& s : structures) {
    s.validate();
    if (!s.has_x()) throw ValidationError("shared-structure selection needs TARX candidates");
  }

  std::vector<SharedStructureScore> scores(structures.size());
  parallel_for(structures.size(), jobs, [&](std::size_t c) {
    auto& sc = scores[c];
    sc.structure = structures[c];
    try {
      std::vector<ParameterTrajectory> trajs;
      for (const auto& r : records) {
        trajs.push_back(three_pass_estimate(r.y, &r.x, sc.structure, opts).trajectory);
      }
      for (std::size_t i = 1; i + 1 < records.size(); ++i) {
        std::vector<double> kt;
        std::vector<const ParameterTrajectory*> kp;
        for (std::size_t k = 0; k < records.size(); ++k) {
          if (k == i) continue;
          kt.push_back(temps[k]);
          kp.push_back(&trajs[k]);
        }
        const auto iw = interpolation_weights(kt, temps[i], scheme);
        const auto sim = simulate(combine(kp, iw.w), records[i].x);
        const double e = ess_sss(sim.samples(), records[i].y.samples());
        if (!std::isfinite(e)) throw NumericalFailure("non-finite held-out score", 0);
        sc.held_out_ess_sss.push_back(e);
      }
      sc.worst_ess_sss = *std::max_element(sc.held_out_ess_sss.begin(), sc.held_out_ess_sss.end());
    } catch (const NumericalFailure&) {
      sc.status = CandidateStatus::diverged;
      sc.held_out_ess_sss.clear();
      sc.worst_ess_sss = std::numeric_limits<double>::quiet_NaN();
    }
  });

  std::stable_sort(scores.begin(), scores.end(),
                   [](const SharedStructureScore& a, const SharedStructureScore& b) {
                     auto key = [](const SharedStructureScore& s) {
                       return std::make_tuple(
                           s.status != CandidateStatus::ok,
                           s.status == CandidateStatus::ok ? s.worst_ess_sss
                                                           : std::numeric_limits<double>::infinity(),
                           s.structure.na, s.structure.nb.value_or(-1), -s.structure.lambda);
                     };
                     return key(a) < key(b);
                   });
  return scores;
}

}  // namespace tvarx
