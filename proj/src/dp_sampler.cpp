#include "aobs/dp_sampler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aobs/distributions.hpp"
#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"

namespace aobs {

void PriorConfig::validate() const {
  if (truncation < 2) fail(errc::non_positive_parameter, "truncation level must be >= 2");
  if (!(base_var > 0.0) || !(list_var > 0.0))
    fail(errc::non_positive_scale, "prior variances must be > 0");
  if (!(conc_shape > 0.0) || !(conc_rate > 0.0))
    fail(errc::non_positive_parameter, "concentration Gamma(a,b) needs a, b > 0");
}

void ChainConfig::validate() const {
  if (iterations < 1) fail(errc::non_positive_parameter, "need >= 1 iteration");
  if (burn_in < 0 || burn_in >= iterations)
    fail(errc::non_positive_parameter, "burn-in must sit in [0, iterations)");
  if (thin < 1) fail(errc::non_positive_parameter, "thinning must be >= 1");
  for (double a : alpha_grid)
    if (a < 0.0 || a >= 1.0) fail(errc::alpha_out_of_range, "alpha grid entries in [0,1)");
  for (double q : q_levels)
    if (!(q > 0.0 && q < 1.0)) fail(errc::invalid_probability, "quantile levels in (0,1)");
}

void ChainState::check_consistent(const CaptureDataset& data) const {
  const int m = data.size();
  const int T = data.lists();
  const int K = classes();
  if (static_cast<int>(label.size()) != m || static_cast<int>(beta.size()) != T ||
      static_cast<int>(gamma_obs.size()) != m * T)
    fail(errc::fixture_shape_mismatch, "chain state shapes disagree with dataset");
  std::int64_t total = 0;
  for (int h = 0; h < K; ++h) total += obs_count[h] + unobs_count[h];
  if (total != population)
    fail(errc::fixture_shape_mismatch, "class counts do not add up to the population");
}

namespace {

void rebuild_weights(ChainState& st) {
  const int K = static_cast<int>(st.stick.size());
  double carry = 1.0;
  for (int h = 0; h < K; ++h) {
    st.weight[h] = st.stick[h] * carry;
    carry *= (1.0 - st.stick[h]);
  }
}

void refresh_obs_counts(ChainState& st) {
  std::fill(st.obs_count.begin(), st.obs_count.end(), 0);
  for (int z : st.label) ++st.obs_count[z];
}

// interior sticks stay strictly below 1 so log(1 - stick) is finite
double draw_stick(Rng& rng, double a, double b) {
  return std::min(sample_beta(rng, a, b), 1.0 - 1e-12);
}

}  // namespace

ChainState init_chain(Rng& rng, const CaptureDataset& data, const PriorConfig& prior) {
  prior.validate();
  const int m = data.size();
  const int T = data.lists();
  const int K = prior.truncation;

  ChainState st;
  st.conc = sample_gamma(rng, prior.conc_shape, prior.conc_rate);
  st.stick.resize(K);
  for (int h = 0; h + 1 < K; ++h) st.stick[h] = draw_stick(rng, 1.0, st.conc);
  st.stick[K - 1] = 1.0;
  st.weight.resize(K);
  rebuild_weights(st);

  st.theta_star.resize(K);
  for (double& th : st.theta_star)
    th = sample_normal(rng, prior.base_mean, std::sqrt(prior.base_var));
  st.beta.resize(T);
  for (double& b : st.beta) b = sample_normal(rng, prior.list_mean, std::sqrt(prior.list_var));

  st.label.resize(m);
  for (int& z : st.label) z = static_cast<int>(rng.next_u64() % static_cast<unsigned>(K));
  st.obs_count.assign(K, 0);
  refresh_obs_counts(st);

  st.gamma_obs.assign(static_cast<std::size_t>(m) * T, 0.0);
  for (int i = 0; i < m; ++i) {
    const auto& hist = data.histories()[static_cast<std::size_t>(i)];
    for (int t = 0; t < T; ++t) {
      const double mean = st.theta_star[st.label[i]] + st.beta[t];
      const Side side = hist.on_list(t) ? Side::right_of : Side::left_of;
      st.gamma_obs[static_cast<std::size_t>(i) * T + t] =
          sample_truncated_normal(rng, mean, 1.0, side, 0.0);
    }
  }

  st.unobs_count.assign(K, 0);
  st.unobs_gamma_sum.assign(static_cast<std::size_t>(T) * K, 0.0);
  st.population = m;
  return st;
}

void step_labels_observed(Rng& rng, ChainState& st, const CaptureDataset& data) {
  const int m = data.size();
  const int T = data.lists();
  const int K = st.classes();
  const double beta_sum = std::accumulate(st.beta.begin(), st.beta.end(), 0.0);

  // shared per-class part of the log weight:
  // log nu_h - T theta_h^2/2 - theta_h sum(beta)
  std::vector<double> base(K);
  for (int h = 0; h < K; ++h) {
    const double th = st.theta_star[h];
    base[h] = std::log(st.weight[h]) - 0.5 * T * th * th - th * beta_sum;
  }
  std::vector<double> logw(K), prob(K);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int t = 0; t < T; ++t) s += st.gamma_obs[static_cast<std::size_t>(i) * T + t];
    double mx = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < K; ++h) {
      logw[h] = base[h] + st.theta_star[h] * s;
      mx = std::max(mx, logw[h]);
    }
    if (!std::isfinite(mx))
      fail(errc::degenerate_weights, "all class weights vanished for an observed unit");
    double total = 0.0;
    for (int h = 0; h < K; ++h) {
      prob[h] = std::exp(logw[h] - mx);
      total += prob[h];
    }
    double u = rng.next_double() * total;
    int pick = K - 1;
    for (int h = 0; h < K; ++h) {
      u -= prob[h];
      if (u < 0.0) {
        pick = h;
        break;
      }
    }
    st.label[i] = pick;
  }
  refresh_obs_counts(st);
}

void step_utilities_observed(Rng& rng, ChainState& st, const CaptureDataset& data) {
  const int m = data.size();
  const int T = data.lists();
  for (int i = 0; i < m; ++i) {
    const auto& hist = data.histories()[static_cast<std::size_t>(i)];
    const double th = st.theta_star[st.label[i]];
    for (int t = 0; t < T; ++t) {
      const Side side = hist.on_list(t) ? Side::right_of : Side::left_of;
      st.gamma_obs[static_cast<std::size_t>(i) * T + t] =
          sample_truncated_normal(rng, th + st.beta[t], 1.0, side, 0.0);
    }
  }
}

void step_effects(Rng& rng, ChainState& st, const PriorConfig& prior) {
  const int T = st.lists_latent();
  const int K = st.classes();
  const int m = static_cast<int>(st.label.size());
  const double n_total = static_cast<double>(st.population);

  // sums over observed utilities
  std::vector<double> sum_t(T, 0.0);        // sum_i gamma_it
  std::vector<double> sum_class(K, 0.0);    // sum_{i in h} sum_t gamma_it
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (int t = 0; t < T; ++t) {
      const double g = st.gamma_obs[static_cast<std::size_t>(i) * T + t];
      sum_t[t] += g;
      row += g;
    }
    sum_class[st.label[i]] += row;
  }

  const int dim = T + K;
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd lin(dim);
  for (int t = 0; t < T; ++t) {
    prec(t, t) = 1.0 / prior.list_var + n_total;
    double g0_t = 0.0;
    for (int h = 0; h < K; ++h) g0_t += st.unobs_gamma_sum[static_cast<std::size_t>(t) * K + h];
    lin(t) = prior.list_mean / prior.list_var + sum_t[t] + g0_t;
  }
  for (int h = 0; h < K; ++h) {
    const double c_h = static_cast<double>(st.obs_count[h] + st.unobs_count[h]);
    prec(T + h, T + h) = 1.0 / prior.base_var + T * c_h;
    for (int t = 0; t < T; ++t) {
      prec(t, T + h) = c_h;
      prec(T + h, t) = c_h;
    }
    double g0_h = 0.0;
    for (int t = 0; t < T; ++t) g0_h += st.unobs_gamma_sum[static_cast<std::size_t>(t) * K + h];
    lin(T + h) = prior.base_mean / prior.base_var + sum_class[h] + g0_h;
  }

  const Eigen::VectorXd draw = sample_mvn_from_precision(rng, prec, lin);
  for (int t = 0; t < T; ++t) st.beta[t] = draw(t);
  for (int h = 0; h < K; ++h) st.theta_star[h] = draw(T + h);
}

void step_sticks(Rng& rng, ChainState& st) {
  const int K = st.classes();
  std::vector<std::int64_t> c(K);
  for (int h = 0; h < K; ++h) c[h] = st.obs_count[h] + st.unobs_count[h];
  std::int64_t tail = 0;  // sum of counts strictly past the current slot
  for (int h = 1; h < K; ++h) tail += c[h];
  for (int h = 0; h + 1 < K; ++h) {
    st.stick[h] = draw_stick(rng, 1.0 + static_cast<double>(c[h]),
                          st.conc + static_cast<double>(tail));
    tail -= c[h + 1];
  }
  st.stick[K - 1] = 1.0;
  rebuild_weights(st);
}

void step_concentration(Rng& rng, ChainState& st, const PriorConfig& prior) {
  const int K = st.classes();
  double log_nu_last = 0.0;
  for (int h = 0; h + 1 < K; ++h) log_nu_last += std::log1p(-st.stick[h]);
  const double shape = prior.conc_shape - 1.0 + static_cast<double>(K);
  const double rate = prior.conc_rate - log_nu_last;
  st.conc = sample_gamma(rng, shape, rate);
}

std::vector<double> class_capture_probs(const ChainState& st) {
  const int K = st.classes();
  const int T = st.lists_latent();
  std::vector<double> p(K);
  for (int h = 0; h < K; ++h) {
    double miss = 1.0;
    for (int t = 0; t < T; ++t) miss *= normal_cdf(-(st.theta_star[h] + st.beta[t]));
    p[h] = 1.0 - miss;
  }
  return p;
}

void step_population(Rng& rng, ChainState& st, const CaptureDataset& data) {
  const int K = st.classes();
  const int T = st.lists_latent();
  const int m = data.size();

  std::vector<double> rho(K);
  double total_rho = 0.0;
  for (int h = 0; h < K; ++h) {
    double miss = 1.0;
    for (int t = 0; t < T; ++t) miss *= normal_cdf(-(st.theta_star[h] + st.beta[t]));
    rho[h] = st.weight[h] * miss;
    total_rho += rho[h];
  }
  if (total_rho >= 1.0) {
    // every class nearly unobservable; keep the chain finite and log it
    ++st.clamped_rho_events;
    total_rho = 1.0 - 1e-12;
  }

  const std::int64_t n0 =
      sample_negative_binomial(rng, static_cast<std::int64_t>(m), 1.0 - total_rho);
  std::fill(st.unobs_count.begin(), st.unobs_count.end(), 0);
  std::fill(st.unobs_gamma_sum.begin(), st.unobs_gamma_sum.end(), 0.0);
  if (n0 > 0) {
    const auto omega = sample_multinomial(rng, n0, rho);
    for (int h = 0; h < K; ++h) st.unobs_count[h] = omega[h];
    // unobserved units carry all-negative utilities
    for (int h = 0; h < K; ++h) {
      for (std::int64_t j = 0; j < st.unobs_count[h]; ++j) {
        for (int t = 0; t < T; ++t) {
          const double g = sample_truncated_normal(rng, st.theta_star[h] + st.beta[t], 1.0,
                                                   Side::left_of, 0.0);
          st.unobs_gamma_sum[static_cast<std::size_t>(t) * K + h] += g;
        }
      }
    }
  }
  st.population = m + n0;
}

PosteriorDraw derive_quantities(const ChainState& st, std::span<const double> alpha_grid) {
  const int K = st.classes();
  PosteriorDraw d;
  d.population = st.population;
  d.conc = st.conc;
  d.class_p = class_capture_probs(st);
  d.class_count.resize(K);
  d.class_informative.resize(K);
  d.alpha_inf = 0.0;
  d.n_lb = 0;
  for (int h = 0; h < K; ++h) {
    d.class_count[h] = st.obs_count[h] + st.unobs_count[h];
    const bool informative = st.obs_count[h] >= 1;
    d.class_informative[h] = informative;
    if (informative)
      d.n_lb += d.class_count[h];
    else if (d.class_count[h] >= 1)
      // member-less classes never enter any N_alpha, so only uninformative
      // classes that carry imputed members can make a draw unreliable
      d.alpha_inf = std::max(d.alpha_inf, d.class_p[h]);
  }
  d.n_alpha.reserve(alpha_grid.size());
  for (double a : alpha_grid) d.n_alpha.push_back(draw_n_alpha(d, a));
  return d;
}

std::int64_t draw_n_alpha(const PosteriorDraw& d, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  std::int64_t total = 0;
  for (std::size_t h = 0; h < d.class_p.size(); ++h)
    if (d.class_p[h] > alpha) total += d.class_count[h];
  return total;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(errc::empty_input, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) fail(errc::invalid_probability, "quantile level in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);
  auto gamma_k = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += (series[i] - mean) * (series[i + k] - mean);
    return s / static_cast<double>(n);
  };
  // sum autocovariances while consecutive pairs stay positive
  double acc = 0.0;
  for (std::size_t k = 1; k + 1 < n; k += 2) {
    const double pair = gamma_k(k) + gamma_k(k + 1);
    if (pair <= 0.0) break;
    acc += pair;
  }
  const double denom = var + 2.0 * acc;
  const double ess = var * static_cast<double>(n) / std::max(denom, 1e-300);
  return std::min(ess, static_cast<double>(n));
}

namespace {

ScalarSummary summarize(const std::vector<double>& v) {
  ScalarSummary s;
  if (v.empty()) return s;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
  s.mean = mean;
  s.sd = std::sqrt(var);
  s.ci_lo = empirical_quantile(v, 0.025);
  s.ci_hi = empirical_quantile(v, 0.975);
  return s;
}

}  // namespace

ChainResult run_chain(Rng rng, const CaptureDataset& data, const PriorConfig& prior,
                      const ChainConfig& cfg) {
  prior.validate();
  cfg.validate();
  ChainResult out;
  ChainState st = init_chain(rng, data, prior);
  for (int it = 0; it < cfg.iterations; ++it) {
    step_labels_observed(rng, st, data);
    step_utilities_observed(rng, st, data);
    step_effects(rng, st, prior);
    step_sticks(rng, st);
    step_concentration(rng, st, prior);
    step_population(rng, st, data);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0)
      out.draws.push_back(derive_quantities(st, cfg.alpha_grid));
  }

  ChainSummary& s = out.summary;
  s.alpha_grid = cfg.alpha_grid;
  s.q_levels = cfg.q_levels;
  s.kept_draws = static_cast<std::int64_t>(out.draws.size());
  s.clamped_rho_events = st.clamped_rho_events;

  std::vector<double> series(out.draws.size());
  for (std::size_t i = 0; i < out.draws.size(); ++i)
    series[i] = static_cast<double>(out.draws[i].population);
  s.population = summarize(series);
  s.population_ess = effective_sample_size(series);

  s.n_alpha.resize(cfg.alpha_grid.size());
  for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
    for (std::size_t i = 0; i < out.draws.size(); ++i)
      series[i] = static_cast<double>(out.draws[i].n_alpha[a]);
    s.n_alpha[a] = summarize(series);
  }

  for (std::size_t i = 0; i < out.draws.size(); ++i)
    series[i] = static_cast<double>(out.draws[i].n_lb);
  s.n_lb = summarize(series);

  std::vector<double> alpha_inf_series(out.draws.size());
  for (std::size_t i = 0; i < out.draws.size(); ++i)
    alpha_inf_series[i] = out.draws[i].alpha_inf;
  for (double q : cfg.q_levels)
    s.alpha_inf_quantiles.push_back(empirical_quantile(alpha_inf_series, q));
  return out;
}

}  // namespace aobs
