#include "aobs/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "aobs/distributions.hpp"
#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"
#include "aobs/quadrature.hpp"

namespace aobs {
namespace {

double binom_coef(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Tilting No(0,tau2) by the inverse logit zero-history probability with a
// common list effect beta gives a (T+1)-component normal mixture:
//   w_j  propto  C(T,j) e^{j beta} e^{j^2 tau2 / 2},  component No(j tau2, tau2).
// (Derivation in docs/derivations.md.)
std::vector<double> darroch_weights(int lists, double beta, double tau2) {
  std::vector<double> w(static_cast<std::size_t>(lists) + 1);
  double mx = -1e300;
  std::vector<double> logw(w.size());
  for (int j = 0; j <= lists; ++j) {
    logw[j] = std::log(binom_coef(lists, j)) + j * beta + 0.5 * j * j * tau2;
    mx = std::max(mx, logw[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::exp(logw[j] - mx);
    total += w[j];
  }
  for (double& x : w) x /= total;
  return w;
}

double t_density(double x, double dof) {
  const double c = std::exp(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof)) /
                   std::sqrt(dof * M_PI);
  return c * std::pow(1.0 + x * x / dof, -0.5 * (dof + 1.0));
}

double gauss_density(double x, double mean, double var) {
  return normal_pdf((x - mean) / std::sqrt(var)) / std::sqrt(var);
}

}  // namespace

void MixingScenario::validate() const {
  if (lists < 1 || lists > CaptureDataset::kMaxLists)
    fail(errc::invalid_scenario_params, "list count out of range");
  switch (kind) {
    case ScenarioKind::darroch:
    case ScenarioKind::normal:
    case ScenarioKind::normal_small_var:
    case ScenarioKind::normal_t7:
    case ScenarioKind::truncated_normal:
      if (!(tau2 > 0.0)) fail(errc::invalid_scenario_params, "tau2 must be > 0");
      break;
    case ScenarioKind::indirect_gamma:
      if (!(gamma_shape > 0.0) || !(gamma_rate > 0.0))
        fail(errc::invalid_scenario_params, "gamma shape/rate must be > 0");
      break;
    case ScenarioKind::two_normal_mixture:
    case ScenarioKind::multi_normal_mixture:
      if (means.empty() || means.size() != variances.size())
        fail(errc::invalid_scenario_params, "mixture needs matching means/variances");
      for (double v : variances)
        if (!(v > 0.0)) fail(errc::invalid_scenario_params, "component variances must be > 0");
      break;
    case ScenarioKind::multi_t_mixture:
      if (means.empty() || means.size() != variances.size())
        fail(errc::invalid_scenario_params, "mixture needs matching means/variances");
      for (double v : variances)
        if (!(v > 0.0)) fail(errc::invalid_scenario_params, "component scales must be > 0");
      if (!(dof > 0.0)) fail(errc::invalid_scenario_params, "t dof must be > 0");
      break;
    case ScenarioKind::atoms:
      if (means.empty()) fail(errc::invalid_scenario_params, "atoms need >= 1 site");
      break;
  }
  if (!weights.empty()) {
    const std::size_t k =
        (kind == ScenarioKind::darroch) ? static_cast<std::size_t>(lists) + 1 : means.size();
    if (kind != ScenarioKind::darroch && weights.size() != k)
      fail(errc::invalid_scenario_params, "weights length disagrees with components");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) fail(errc::invalid_scenario_params, "weights must be >= 0");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-8)
      fail(errc::invalid_scenario_params, "weights must sum to one");
  }
}

MixingScenario MixingScenario::preset(int number) {
  MixingScenario sc;
  sc.lists = 4;
  switch (number) {
    case 1:
      sc.kind = ScenarioKind::darroch;
      sc.tau2 = 2.0;
      sc.list_effect = -3.75;
      break;
    case 2:
      sc.kind = ScenarioKind::normal;
      sc.tau2 = 14.0;
      sc.list_effect = 2.0;
      break;
    case 3:
      sc.kind = ScenarioKind::two_normal_mixture;
      sc.means = {0.0, -3.5};
      sc.variances = {0.1, 0.1};
      sc.weights = {0.5, 0.5};
      sc.list_effect = 1.0;
      break;
    case 4:
      sc.kind = ScenarioKind::truncated_normal;
      sc.tau2 = 12.0;
      sc.trunc_lo = -2.0;
      sc.list_effect = -1.0;
      break;
    case 5:
      sc.kind = ScenarioKind::indirect_gamma;
      sc.gamma_shape = 1.0;
      sc.gamma_rate = 3.5;
      sc.list_effect = -2.0;
      break;
    case 6:
      sc.kind = ScenarioKind::atoms;
      sc.means = {-5.0, -3.7, -3.2, -2.75, 0.0, 1.0, 3.0};
      sc.list_effect = 0.0;
      break;
    case 7:
      sc.kind = ScenarioKind::multi_normal_mixture;
      sc.means = {-4.0, -2.0, -2.5, -2.25, 0.0, 1.0, 3.0};
      sc.variances = {0.1, 2.0, 0.05, 0.1, 1.0, 0.1, 6.0};
      sc.list_effect = 1.0;
      break;
    case 8:
      sc.kind = ScenarioKind::multi_t_mixture;
      sc.means = {-4.0, -2.0, -2.5, -2.25, 0.0, 1.0, 3.0};
      sc.variances = {0.1, 2.0, 0.05, 0.1, 1.0, 0.1, 6.0};
      sc.dof = 3.0;
      sc.list_effect = 1.0;
      break;
    case 9:
      sc.kind = ScenarioKind::normal_small_var;
      sc.tau2 = 0.1;
      sc.list_effect = 0.0;
      break;
    case 10:
      sc.kind = ScenarioKind::normal_t7;
      sc.tau2 = 10.0;
      sc.lists = 7;
      sc.list_effect = -1.0;
      break;
    default:
      fail(errc::invalid_scenario_params, "scenario number must sit in 1..10");
  }
  sc.validate();
  return sc;
}

const std::vector<std::string>& MixingScenario::preset_names() {
  static const std::vector<std::string> names = {
      "darroch",        "normal",       "two_normal_mixture", "truncated_normal",
      "indirect_gamma", "atoms",        "multi_normal_mixture",
      "multi_t_mixture", "normal_small_var", "normal_t7"};
  return names;
}

MixingScenario MixingScenario::by_name(const std::string& name) {
  const auto& names = preset_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return preset(static_cast<int>(i) + 1);
  fail(errc::invalid_scenario_params, "unknown scenario '" + name + "'");
}

bool MixingScenario::has_density() const {
  if (kind == ScenarioKind::atoms) return false;
  if ((kind == ScenarioKind::two_normal_mixture || kind == ScenarioKind::multi_normal_mixture ||
       kind == ScenarioKind::multi_t_mixture) &&
      weights.empty())
    return false;  // weights are random per draw call
  return true;
}

double MixingScenario::density(double theta) const {
  switch (kind) {
    case ScenarioKind::normal:
    case ScenarioKind::normal_small_var:
    case ScenarioKind::normal_t7:
      return gauss_density(theta, 0.0, tau2);
    case ScenarioKind::truncated_normal: {
      if (theta < trunc_lo) return 0.0;
      const double sd = std::sqrt(tau2);
      const double mass = normal_ccdf(trunc_lo / sd);
      return gauss_density(theta, 0.0, tau2) / mass;
    }
    case ScenarioKind::darroch: {
      const auto w = darroch_weights(lists, list_effect, tau2);
      double s = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j)
        s += w[j] * gauss_density(theta, static_cast<double>(j) * tau2, tau2);
      return s;
    }
    case ScenarioKind::two_normal_mixture:
    case ScenarioKind::multi_normal_mixture: {
      if (weights.empty()) fail(errc::invalid_scenario_params, "density needs fixed weights");
      double s = 0.0;
      for (std::size_t j = 0; j < means.size(); ++j)
        s += weights[j] * gauss_density(theta, means[j], variances[j]);
      return s;
    }
    case ScenarioKind::multi_t_mixture: {
      if (weights.empty()) fail(errc::invalid_scenario_params, "density needs fixed weights");
      double s = 0.0;
      for (std::size_t j = 0; j < means.size(); ++j) {
        const double scale = std::sqrt(variances[j]);
        s += weights[j] * t_density((theta - means[j]) / scale, dof) / scale;
      }
      return s;
    }
    case ScenarioKind::indirect_gamma: {
      if (theta > 0.0) return 0.0;
      // g*(theta) propto gamma_density(-theta) * prod_t (1 + e^{theta+beta})
      const double x = -theta;
      const double log_g0 = gamma_shape * std::log(gamma_rate) - std::lgamma(gamma_shape) +
                            (gamma_shape - 1.0) * std::log(x) - gamma_rate * x;
      const double log_tilt = lists * softplus(theta + list_effect);
      // normalizer by quadrature over theta <= 0
      const auto raw = [&](double th) {
        if (th >= 0.0) return 0.0;
        const double xx = -th;
        const double lg = gamma_shape * std::log(gamma_rate) - std::lgamma(gamma_shape) +
                          (gamma_shape - 1.0) * std::log(xx) - gamma_rate * xx;
        return std::exp(lg + lists * softplus(th + list_effect));
      };
      const double lo = -(gamma_shape / gamma_rate + 14.0 * std::sqrt(gamma_shape) / gamma_rate);
      const double z = integrate_or_throw(raw, lo, -1e-14, 1e-9, 1e-13);
      return std::exp(log_g0 + log_tilt) / z;
    }
    case ScenarioKind::atoms:
      fail(errc::invalid_scenario_params, "atom scenario has no density");
  }
  return 0.0;
}

double MixingScenario::mean_capture_prob(Link link) const {
  std::vector<double> beta(static_cast<std::size_t>(lists), list_effect);
  const auto p_of = [&](double th) { return capture_prob(th, beta, link); };
  if (kind == ScenarioKind::atoms) {
    // symmetric Dirichlet weights average to equal weights
    double s = 0.0;
    for (double site : means) s += p_of(site);
    return s / static_cast<double>(means.size());
  }
  if (!has_density()) {
    MixingScenario fixed = *this;
    fixed.weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
    return fixed.mean_capture_prob(link);
  }
  double lo = -50.0, hi = 50.0;
  if (kind == ScenarioKind::indirect_gamma) {
    hi = 0.0;
    lo = -(gamma_shape / gamma_rate + 14.0 * std::sqrt(gamma_shape) / gamma_rate);
  } else if (kind == ScenarioKind::darroch) {
    hi = lists * tau2 + 12.0 * std::sqrt(tau2);
    lo = -12.0 * std::sqrt(tau2);
  } else if (kind == ScenarioKind::truncated_normal) {
    lo = trunc_lo;
    hi = 12.0 * std::sqrt(tau2);
  } else {
    double sd_max = std::sqrt(tau2);
    double m_lo = 0.0, m_hi = 0.0;
    if (!means.empty()) {
      m_lo = *std::min_element(means.begin(), means.end());
      m_hi = *std::max_element(means.begin(), means.end());
      sd_max = 0.0;
      for (double v : variances) sd_max = std::max(sd_max, std::sqrt(v));
      if (kind == ScenarioKind::multi_t_mixture) sd_max *= 6.0;  // heavy tails
    }
    lo = m_lo - 14.0 * std::max(sd_max, 1.0);
    hi = m_hi + 14.0 * std::max(sd_max, 1.0);
  }
  return integrate_or_throw([&](double th) { return density(th) * p_of(th); }, lo, hi, 1e-8,
                            1e-12);
}

std::vector<double> sample_theta(Rng& rng, const MixingScenario& sc, std::size_t n) {
  sc.validate();
  std::vector<double> out;
  out.reserve(n);
  const double sd = std::sqrt(sc.tau2);
  std::vector<double> w = sc.weights;
  switch (sc.kind) {
    case ScenarioKind::normal:
    case ScenarioKind::normal_small_var:
    case ScenarioKind::normal_t7:
      for (std::size_t i = 0; i < n; ++i) out.push_back(sample_normal(rng, 0.0, sd));
      break;
    case ScenarioKind::truncated_normal:
      for (std::size_t i = 0; i < n; ++i)
        out.push_back(sample_truncated_normal(rng, 0.0, sd, Side::right_of, sc.trunc_lo));
      break;
    case ScenarioKind::darroch: {
      const auto dw = darroch_weights(sc.lists, sc.list_effect, sc.tau2);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = sample_discrete(rng, dw);
        out.push_back(sample_normal(rng, static_cast<double>(j) * sc.tau2, sd));
      }
      break;
    }
    case ScenarioKind::two_normal_mixture:
    case ScenarioKind::multi_normal_mixture:
    case ScenarioKind::multi_t_mixture: {
      if (w.empty()) {
        const std::vector<double> conc(sc.means.size(), 1.0);
        w = sample_dirichlet(rng, conc);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = sample_discrete(rng, w);
        const double scale = std::sqrt(sc.variances[j]);
        if (sc.kind == ScenarioKind::multi_t_mixture)
          out.push_back(sc.means[j] + scale * sample_student_t(rng, sc.dof));
        else
          out.push_back(sample_normal(rng, sc.means[j], scale));
      }
      break;
    }
    case ScenarioKind::atoms: {
      if (w.empty()) {
        const std::vector<double> conc(sc.means.size(), 1.0);
        w = sample_dirichlet(rng, conc);
      }
      for (std::size_t i = 0; i < n; ++i) out.push_back(sc.means[sample_discrete(rng, w)]);
      break;
    }
    case ScenarioKind::indirect_gamma: {
      // rejection from the un-tilted base; for theta <= 0 the tilt
      // prod_t(1+e^{theta+beta}) is bounded by prod_t(1+e^{beta})
      const double log_bound = sc.lists * softplus(sc.list_effect);
      for (std::size_t i = 0; i < n; ++i) {
        for (;;) {
          const double theta = -sample_gamma(rng, sc.gamma_shape, sc.gamma_rate);
          const double log_acc = sc.lists * softplus(theta + sc.list_effect) - log_bound;
          if (std::log(rng.next_open()) <= log_acc) {
            out.push_back(theta);
            break;
          }
        }
      }
      break;
    }
  }
  return out;
}

CaptureDataset Population::observed_dataset() const {
  std::vector<CaptureHistory> rows;
  rows.reserve(observed.size());
  for (std::size_t idx : observed) rows.push_back(CaptureHistory{history[idx], lists});
  return CaptureDataset(lists, std::move(rows));
}

std::vector<double> Population::observed_p() const {
  std::vector<double> out;
  out.reserve(observed.size());
  for (std::size_t idx : observed) out.push_back(p[idx]);
  return out;
}

Population simulate_population(Rng& rng, const MixingScenario& sc, std::int64_t n, Link link) {
  if (n < 1) fail(errc::invalid_scenario_params, "population size must be >= 1");
  Population pop;
  pop.lists = sc.lists;
  pop.list_effect = sc.list_effect;
  pop.link = link;
  pop.theta = sample_theta(rng, sc, static_cast<std::size_t>(n));
  pop.p.reserve(pop.theta.size());
  pop.history.reserve(pop.theta.size());
  for (std::size_t i = 0; i < pop.theta.size(); ++i) {
    const double theta = pop.theta[i];
    pop.p.push_back(capture_prob(theta, sc.list_effect, sc.lists, link));
    std::uint32_t bits = 0;
    const double q = link_inv(link, theta + sc.list_effect);
    for (int t = 0; t < sc.lists; ++t)
      if (rng.next_double() < q) bits |= (1u << t);
    pop.history.push_back(bits);
    if (bits != 0) pop.observed.push_back(i);
  }
  return pop;
}

std::int64_t true_n_alpha(const Population& pop, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1]");
  std::int64_t count = 0;
  for (double pi : pop.p)
    if (pi > alpha) ++count;
  return count;
}

std::vector<double> sample_length_biased_p(Rng& rng, const FSpec& f, std::size_t n) {
  f.validate();
  std::vector<double> out;
  out.reserve(n);
  switch (f.kind) {
    case FSpec::Kind::beta:
      for (std::size_t i = 0; i < n; ++i) out.push_back(sample_beta(rng, f.a + 1.0, f.b));
      break;
    case FSpec::Kind::atoms: {
      std::vector<double> w(f.atom_w.size());
      for (std::size_t j = 0; j < w.size(); ++j) w[j] = f.atom_w[j] * f.atom_p[j];
      for (std::size_t i = 0; i < n; ++i) out.push_back(f.atom_p[sample_discrete(rng, w)]);
      break;
    }
    case FSpec::Kind::histogram: {
      const double h = 1.0 / static_cast<double>(f.hist_heights.size());
      // bin mass under G is height * int_bin p dp; within a bin the density
      // is linear in p, so invert (p^2 - lo^2)/(hi^2 - lo^2)
      std::vector<double> w(f.hist_heights.size());
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double lo = static_cast<double>(j) * h, hi = lo + h;
        w[j] = f.hist_heights[j] * 0.5 * (hi * hi - lo * lo);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = sample_discrete(rng, w);
        const double lo = static_cast<double>(j) * h, hi = lo + h;
        const double u = rng.next_open();
        out.push_back(std::sqrt(lo * lo + u * (hi * hi - lo * lo)));
      }
      break;
    }
  }
  return out;
}

}  // namespace aobs
