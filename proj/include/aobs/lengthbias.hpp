#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aobs/fspec.hpp"
#include "aobs/rng.hpp"

namespace aobs {

// Maximizer over real N >= m of the penalized binomial log likelihood
//   lgamma(N+1) - lgamma(N-m+1) + (N-m) log(1-p) - (1/2) log{N/(N-m)};
// lands at m/p + O(1/m). p is the (mean) capture probability in (0,1).
double penalized_mle_population(std::int64_t m, double p);

struct EmpiricalEstimate {
  double value = 0.0;
  bool empty_after_threshold = false;  // no observed p above alpha
};

// sum of 1/p_i over observed p_i > alpha (the alpha-restricted inverse
// weighting estimator; alpha = 0 gives the classical one).
EmpiricalEstimate empirical_estimator(std::span<const double> p_obs, double alpha);

// m * int p^-1 ghat(p) dp with ghat the histogram of observed p values on
// equal-width bins tiling [alpha, 1]; bin integrals are exact logs. Errors
// with MassAtZeroBin when alpha = 0 and the bin touching p = 0 is occupied.
double histogram_estimator(std::span<const double> p_obs, double bin_width, double alpha);

enum class EstimatorKind { empirical, histogram };

struct TheoreticalMse {
  double vs_restricted = 0.0;  // squared risk against N_alpha
  double vs_total = 0.0;       // squared risk against N
  double cor1_bound = 0.0;     // N_alpha (1/alpha - 1); +inf at alpha = 0
  bool infinite = false;
  std::string note;
};

// Risk formulas under known F: empirical estimator uses
//   vs_restricted = N_alpha {E_{F_alpha}(P^-1) - 1},
//   vs_total      = vs_restricted + (N - N_alpha)^2
// with N_alpha = N P(P > alpha); histogram adds the asymptotic variance form
//   N_alpha {E_{f_alpha}(P^-1) - 1/E_{f_alpha}(P)}.
TheoreticalMse theoretical_mse(const FSpec& f, std::int64_t n, EstimatorKind kind, double alpha);

struct RiskCell {
  EstimatorKind kind = EstimatorKind::empirical;
  double alpha = 0.0;
  std::vector<double> estimates;        // per replicate
  std::vector<std::int64_t> truth_restricted;  // per-replicate N_alpha
  std::int64_t truth_total = 0;         // N
  double mse_restricted = 0.0;
  double mse_total = 0.0;
  double bias_restricted = 0.0;
  std::int64_t failed = 0;              // replicates lost to estimator errors
};

struct RiskStudy {
  std::vector<RiskCell> cells;
  std::int64_t n = 0;
  int replicates = 0;
};

// Simulates replicates of (p_1..p_N ~ F, Bernoulli(p_i) detection), applies
// the requested estimators above each alpha, and tallies risks against both
// the restricted and total truths. Deterministic in (seed); replicates are
// independent substreams. histogram_bin_width <= 0 picks N^(-0.6).
RiskStudy risk_study(std::uint64_t seed, const FSpec& f, std::int64_t n,
                     std::span<const double> alphas, int replicates,
                     std::span<const EstimatorKind> estimators,
                     double histogram_bin_width = 0.0);

}  // namespace aobs
