#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tvarx/rml.hpp"
#include "tvarx/signal.hpp"
#include "tvarx/tv_model.hpp"

namespace tvarx {

double rss_sss(std::span<const double> residuals, std::span<const double> y);
double ess_sss(std::span<const double> y_sim, std::span<const double> y);

inline constexpr double kVarianceFloor = 1e-300;

/// Gaussian log-likelihood with time-varying variance; variances are floored
/// at kVarianceFloor.
double gaussian_loglik(std::span<const double> residuals, std::span<const double> sigma2e);

double aic(double loglik, std::size_t d);
/// -loglik + (ln N / 2) d.
double bic(double loglik, std::size_t d, std::size_t n);

enum class Criterion { rss_sss, ess_sss, bic, aic };

Criterion parse_criterion(std::string_view name);
std::string_view to_string(Criterion c);

enum class CandidateStatus { ok, diverged };

struct CandidateScore {
  ModelStructure structure;
  double rss_sss = 0.0;
  std::optional<double> ess_sss;
  double bic = 0.0;
  double aic = 0.0;
  double loglik = 0.0;
  CandidateStatus status = CandidateStatus::ok;
  /// Score minus the best score under the ranking criterion.
  double gap = 0.0;

  double score(Criterion c) const;
};

struct StructureGrid {
  std::vector<int> na;
  /// Empty for TAR.
  std::vector<int> nb;
  std::vector<double> lambda;

  std::size_t size() const noexcept {
    return na.size() * (nb.empty() ? 1 : nb.size()) * lambda.size();
  }
  /// Enumeration order: na outer, nb, lambda inner.
  std::vector<ModelStructure> structures() const;
};

/// lo, lo + step, ... up to hi (inclusive within 1e-9 step).
std::vector<double> lambda_range(double lo, double hi, double step);
std::vector<int> int_range(int lo, int hi);

/// Scores one candidate: three-pass (or per `opts`) estimation, RSS/SSS past
/// the transient, log-likelihood, AIC, BIC and, when `with_ess`, the
/// zero-noise simulation ESS/SSS. Numerical failures yield a diverged score.
CandidateScore score_candidate(const Signal& y, const Signal* x, const ModelStructure& s,
                               const EstimationOptions& opts, bool with_ess);

/// Ranks ascending by `criterion`; diverged last; ties broken by smaller na,
/// smaller nb, larger lambda.
std::vector<CandidateScore> grid_search(const Signal& y, const Signal* x, const StructureGrid& grid,
                                        Criterion criterion, const EstimationOptions& opts = {},
                                        std::size_t jobs = 1);

void rank_candidates(std::vector<CandidateScore>& scores, Criterion criterion);

/// Index of the preferred candidate in a ranked list: among candidates whose
/// gap to the best is below `threshold`, the one with the smallest order.
std::size_t parsimonious_choice(const std::vector<CandidateScore>& ranked,
                                double threshold = 1e-5);

}  // namespace tvarx
