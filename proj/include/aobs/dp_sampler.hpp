#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aobs/capture_data.hpp"
#include "aobs/rng.hpp"

namespace aobs {

// Hyperparameters of the truncated stick-breaking mixture-of-probits model:
// theta*_h ~ No(base_mean, base_var), beta_t ~ No(list_mean, list_var),
// nu* sticks with concentration alpha0 ~ Gamma(conc_shape, conc_rate),
// truncation level K classes.
struct PriorConfig {
  int truncation = 30;
  double base_mean = 0.0;
  double base_var = 4.0;
  double list_mean = 0.0;
  double list_var = 4.0;
  double conc_shape = 1.0;
  double conc_rate = 1.0;

  void validate() const;
};

struct ChainState {
  std::int64_t population = 0;          // N = m + sum(omega)
  double conc = 1.0;                    // alpha0
  std::vector<int> label;               // class of each observed unit, size m
  std::vector<double> gamma_obs;        // latent utilities, m x T row-major
  std::vector<double> theta_star;       // K
  std::vector<double> beta;             // T
  std::vector<double> stick;            // nu*_h, K, last pinned to 1
  std::vector<double> weight;           // nu_h, K
  std::vector<std::int64_t> obs_count;  // m_h, K
  std::vector<std::int64_t> unobs_count;  // omega_h, K
  std::vector<double> unobs_gamma_sum;  // Gamma0_{t,h}, T x K row-major in t
  std::int64_t clamped_rho_events = 0;  // times sum(rho) had to be clamped below 1

  int classes() const { return static_cast<int>(theta_star.size()); }
  int lists_latent() const { return static_cast<int>(beta.size()); }
  void check_consistent(const CaptureDataset& data) const;
};

ChainState init_chain(Rng& rng, const CaptureDataset& data, const PriorConfig& prior);

// One sweep of each conditional, exposed separately so correctness tests can
// drive them in isolation.
void step_labels_observed(Rng& rng, ChainState& st, const CaptureDataset& data);
void step_utilities_observed(Rng& rng, ChainState& st, const CaptureDataset& data);
void step_effects(Rng& rng, ChainState& st, const PriorConfig& prior);
void step_sticks(Rng& rng, ChainState& st);
void step_concentration(Rng& rng, ChainState& st, const PriorConfig& prior);
void step_population(Rng& rng, ChainState& st, const CaptureDataset& data);

// Per-class capture probability under the probit link, 1 - prod_t Phi(-theta_h - beta_t).
std::vector<double> class_capture_probs(const ChainState& st);

struct PosteriorDraw {
  std::int64_t population = 0;
  std::vector<std::int64_t> n_alpha;      // aligned with the alpha grid
  double alpha_inf = 0.0;                 // largest class p among uninformative classes
  std::int64_t n_lb = 0;                  // members of informative classes
  double conc = 0.0;
  // per-class snapshot for post-hoc thresholds and plots
  std::vector<double> class_p;
  std::vector<std::int64_t> class_count;
  std::vector<bool> class_informative;
};

PosteriorDraw derive_quantities(const ChainState& st, std::span<const double> alpha_grid);

// N_alpha recomputed from a stored draw at an arbitrary alpha.
std::int64_t draw_n_alpha(const PosteriorDraw& d, double alpha);

struct ChainConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 5;
  std::vector<double> alpha_grid = {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.45};
  std::vector<double> q_levels = {0.5, 0.95};

  void validate() const;
};

struct ScalarSummary {
  double mean = 0.0;
  double sd = 0.0;
  double ci_lo = 0.0;  // equal-tailed 95%
  double ci_hi = 0.0;
};

struct ChainSummary {
  ScalarSummary population;
  double population_ess = 0.0;
  std::vector<double> alpha_grid;
  std::vector<ScalarSummary> n_alpha;
  ScalarSummary n_lb;
  std::vector<double> q_levels;
  std::vector<double> alpha_inf_quantiles;
  std::int64_t kept_draws = 0;
  std::int64_t clamped_rho_events = 0;
};

struct ChainResult {
  std::vector<PosteriorDraw> draws;
  ChainSummary summary;
};

ChainResult run_chain(Rng rng, const CaptureDataset& data, const PriorConfig& prior,
                      const ChainConfig& cfg);

// Empirical quantile, linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double q);

// Effective sample size by the initial-positive-sequence autocovariance rule.
double effective_sample_size(std::span<const double> series);

}  // namespace aobs
