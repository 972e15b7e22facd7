#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aobs/capture_data.hpp"
#include "aobs/fspec.hpp"
#include "aobs/observability.hpp"
#include "aobs/rng.hpp"

namespace aobs {

enum class ScenarioKind {
  darroch,             // No(0,tau2) base tilted through the logit zero-history odds
  normal,              // No(0,tau2)
  two_normal_mixture,  // fixed weights
  truncated_normal,    // No(0,tau2) restricted to [lo, inf)
  indirect_gamma,      // theta = -X, X ~ Gamma(shape,rate), tilted by rejection
  atoms,               // finite support, Dirichlet(1,..,1) weights per call
  multi_normal_mixture,
  multi_t_mixture,     // location-scale t(dof) components
  normal_small_var,
  normal_t7,           // T = 7 variant
};

struct MixingScenario {
  ScenarioKind kind = ScenarioKind::normal;
  int lists = 4;          // T
  double list_effect = 0; // common beta
  double tau2 = 1.0;      // variance parameter where one applies
  double trunc_lo = 0.0;  // truncated_normal
  double gamma_shape = 1.0, gamma_rate = 1.0;  // indirect_gamma
  double dof = 3.0;       // multi_t_mixture
  std::vector<double> means;      // mixture locations / atom sites
  std::vector<double> variances;  // mixture component variances
  std::vector<double> weights;    // empty => Dirichlet(1,..,1) drawn per sample call

  void validate() const;

  // The ten study scenarios with their published parameter choices.
  static MixingScenario preset(int number);
  static MixingScenario by_name(const std::string& name);
  static const std::vector<std::string>& preset_names();

  // Mixing density g*(theta) for kinds that have one (everything but atoms,
  // and for random-weight kinds only once weights are fixed).
  double density(double theta) const;
  bool has_density() const;

  // E_{G*}(p) by quadrature/sums against capture_prob under the given link.
  double mean_capture_prob(Link link) const;
};

std::vector<double> sample_theta(Rng& rng, const MixingScenario& sc, std::size_t n);

struct Population {
  int lists = 0;
  double list_effect = 0;
  Link link = Link::logit;
  std::vector<double> theta;
  std::vector<double> p;                 // capture probabilities
  std::vector<std::uint32_t> history;    // per-individual capture pattern
  std::vector<std::size_t> observed;     // indices with nonzero history

  std::int64_t size() const { return static_cast<std::int64_t>(theta.size()); }
  std::int64_t observed_count() const { return static_cast<std::int64_t>(observed.size()); }
  CaptureDataset observed_dataset() const;
  std::vector<double> observed_p() const;
};

Population simulate_population(Rng& rng, const MixingScenario& sc, std::int64_t n, Link link);

// #{i : p_i > alpha}; alpha outside [0,1] rejects.
std::int64_t true_n_alpha(const Population& pop, double alpha);

// Draws from G(dp) = p F(dp) / E_F(P): the size-biased version of F.
// beta(a,b) -> beta(a+1,b); atoms/histogram reweighted by p within bins.
std::vector<double> sample_length_biased_p(Rng& rng, const FSpec& f, std::size_t n);

}  // namespace aobs
