#include "tvarx/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "tvarx/error.hpp"
#include "tvarx/parallel.hpp"

namespace tvarx {

namespace {

double energy_ratio(std::span<const double> num_terms, std::span<const double> y, bool diff) {
  if (num_terms.size() != y.size()) throw ValidationError("sequence lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = diff ? y[i] - num_terms[i] : num_terms[i];
    num += e * e;
    den += y[i] * y[i];
  }
  if (!(den > 0.0)) throw ValidationError("signal has zero energy");
  return num / den;
}

}  // namespace

double rss_sss(std::span<const double> residuals, std::span<const double> y) {
  return energy_ratio(residuals, y, false);
}

double ess_sss(std::span<const double> y_sim, std::span<const double> y) {
  return energy_ratio(y_sim, y, true);
}

double gaussian_loglik(std::span<const double> residuals, std::span<const double> sigma2e) {
  if (residuals.size() != sigma2e.size()) throw ValidationError("sequence lengths differ");
  const double n = static_cast<double>(residuals.size());
  double acc = 0.0;
  bool any_positive = false;
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    if (sigma2e[t] > 0.0) any_positive = true;
    const double v = std::max(sigma2e[t], kVarianceFloor);
    acc += std::log(v) + residuals[t] * residuals[t] / v;
  }
  if (!any_positive && !residuals.empty()) {
    throw ValidationError("innovations variance is zero everywhere");
  }
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * acc;
}

double aic(double loglik, std::size_t d) { return -2.0 * loglik + 2.0 * static_cast<double>(d); }

double bic(double loglik, std::size_t d, std::size_t n) {
  return -loglik + 0.5 * std::log(static_cast<double>(n)) * static_cast<double>(d);
}

Criterion parse_criterion(std::string_view name) {
  if (name == "rss_sss" || name == "rss") return Criterion::rss_sss;
  if (name == "ess_sss" || name == "ess") return Criterion::ess_sss;
  if (name == "bic") return Criterion::bic;
  if (name == "aic") return Criterion::aic;
  throw ValidationError("unknown criterion '" + std::string(name) + "'");
}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::rss_sss: return "rss_sss";
    case Criterion::ess_sss: return "ess_sss";
    case Criterion::bic: return "bic";
    case Criterion::aic: return "aic";
  }
  return "?";
}

double CandidateScore::score(Criterion c) const {
  if (status != CandidateStatus::ok) return std::numeric_limits<double>::infinity();
  switch (c) {
    case Criterion::rss_sss: return rss_sss;
    case Criterion::ess_sss: return ess_sss.value_or(std::numeric_limits<double>::infinity());
    case Criterion::bic: return bic;
    case Criterion::aic: return aic;
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<ModelStructure> StructureGrid::structures() const {
  std::vector<ModelStructure> out;
  out.reserve(size());
  for (int a : na) {
    if (nb.empty()) {
      for (double l : lambda) out.push_back({a, std::nullopt, l});
    } else {
      for (int b : nb) {
        for (double l : lambda) out.push_back({a, b, l});
      }
    }
  }
  return out;
}

std::vector<double> lambda_range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("lambda step must be positive");
  if (hi < lo) throw ValidationError("lambda range upper bound below lower bound");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Round to the step's decimal grid so 0.5 + 499 * 0.001 prints as 0.999.
    const double v = lo + static_cast<double>(i) * step;
    out[i] = std::round(v * 1e12) / 1e12;
  }
  return out;
}

std::vector<int> int_range(int lo, int hi) {
  if (hi < lo) throw ValidationError("range upper bound below lower bound");
  std::vector<int> out;
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

CandidateScore score_candidate(const Signal& y, const Signal* x, const ModelStructure& s,
                               const EstimationOptions& opts, bool with_ess) {
  CandidateScore c;
  c.structure = s;
  try {
    const auto est = estimate(y, x, s, opts);
    const std::size_t skip = std::min(s.transient(), y.size() - 1);
    auto ys = y.samples();
    c.rss_sss = rss_sss(std::span(est.residuals).subspan(skip), ys.subspan(skip));
    c.loglik = gaussian_loglik(est.residuals, est.trajectory.sigma2e);
    c.aic = aic(c.loglik, s.param_count());
    c.bic = bic(c.loglik, s.param_count(), y.size());
    if (!std::isfinite(c.rss_sss) || !std::isfinite(c.loglik)) {
      throw NumericalFailure("non-finite candidate score", y.size());
    }
    if (with_ess) {
      // An unstable simulation leaves ESS/SSS absent without voiding the
      // prediction scores.
      try {
        const auto sim = simulate(est.trajectory, *x);
        const double e = ess_sss(sim.samples(), ys);
        if (std::isfinite(e)) c.ess_sss = e;
      } catch (const NumericalFailure&) {
      }
    }
  } catch (const NumericalFailure&) {
    c = CandidateScore{};
    c.structure = s;
    c.status = CandidateStatus::diverged;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    c.rss_sss = c.bic = c.aic = c.loglik = c.gap = nan;
  }
  return c;
}

void rank_candidates(std::vector<CandidateScore>& scores, Criterion criterion) {
  auto key = [&](const CandidateScore& c) {
    return std::make_tuple(c.status != CandidateStatus::ok, c.score(criterion), c.structure.na,
                           c.structure.nb.value_or(-1), -c.structure.lambda);
  };
  std::stable_sort(scores.begin(), scores.end(),
                   [&](const CandidateScore& a, const CandidateScore& b) { return key(a) < key(b); });
  if (scores.empty()) return;
  const double best = scores.front().score(criterion);
  for (auto& c : scores) {
    c.gap = c.status == CandidateStatus::ok ? c.score(criterion) - best
                                            : std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<CandidateScore> grid_search(const Signal& y, const Signal* x, const StructureGrid& grid,
                                        Criterion criterion, const EstimationOptions& opts,
                                        std::size_t jobs) {
  const auto structures = grid.structures();
  if (structures.empty()) throw ValidationError("empty structure grid");
  if (criterion == Criterion::ess_sss && x == nullptr) {
    throw ValidationError("the ess_sss criterion needs an exogenous signal");
  }
  if (!grid.nb.empty() && x == nullptr) throw ValidationError("an X-order grid needs an exogenous signal");
  if (grid.nb.empty() && x != nullptr) {
    throw ValidationError("an exogenous signal needs an X-order grid");
  }
  for (const auto& s : structures) s.validate();
  opts.validate();

  std::vector<CandidateScore> scores(structures.size());
  const bool with_ess = x != nullptr;
  parallel_for(structures.size(), jobs, [&](std::size_t i) {
    scores[i] = score_candidate(y, x, structures[i], opts, with_ess);
    if (criterion == Criterion::ess_sss && !scores[i].ess_sss) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      scores[i].status = CandidateStatus::diverged;
      scores[i].rss_sss = scores[i].bic = scores[i].aic = scores[i].loglik = nan;
    }
  });
  rank_candidates(scores, criterion);
  return scores;
}

std::size_t parsimonious_choice(const std::vector<CandidateScore>& ranked, double threshold) {
  if (ranked.empty()) throw ValidationError("no candidates to choose from");
  std::size_t pick = 0;
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    const auto& c = ranked[i];
    if (c.status != CandidateStatus::ok || !(c.gap < threshold)) continue;
    const auto& p = ranked[pick].structure;
    if (std::make_tuple(c.structure.na, c.structure.nb.value_or(-1)) <
        std::make_tuple(p.na, p.nb.value_or(-1))) {
      pick = i;
    }
  }
  return pick;
}

}  // namespace tvarx
