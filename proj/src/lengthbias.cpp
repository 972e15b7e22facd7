#include "aobs/lengthbias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aobs/distributions.hpp"
#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"

namespace aobs {
namespace {

// derivative of the penalized log likelihood in N; strictly decreasing
double penlik_slope(double n, double m, double log1mp) {
  return digamma(n + 1.0) - digamma(n - m + 1.0) + log1mp + m / (2.0 * n * (n - m));
}

}  // namespace

double penalized_mle_population(std::int64_t m, double p) {
  if (m < 1) fail(errc::non_positive_parameter, "observed count must be >= 1");
  if (!(p > 0.0 && p < 1.0)) fail(errc::invalid_probability, "capture probability in (0,1)");
  const double md = static_cast<double>(m);
  const double log1mp = std::log1p(-p);
  // the penalty pushes the maximizer strictly above m; bracket around m/p
  double lo = md + 1e-9 * std::max(1.0, md);
  double hi = std::max(md / p * 2.0 + 10.0, lo * 2.0);
  while (penlik_slope(hi, md, log1mp) > 0.0) hi *= 2.0;
  if (penlik_slope(lo, md, log1mp) < 0.0) return lo;
  // bisection with a Newton-style midpoint refinement at the end
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (penlik_slope(mid, md, log1mp) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-9 * std::max(1.0, lo)) break;
  }
  return 0.5 * (lo + hi);
}

EmpiricalEstimate empirical_estimator(std::span<const double> p_obs, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  EmpiricalEstimate out;
  std::size_t used = 0;
  for (double p : p_obs) {
    if (!(p > 0.0) || p > 1.0) fail(errc::invalid_probability, "observed p outside (0,1]");
    if (p > alpha) {
      out.value += 1.0 / p;
      ++used;
    }
  }
  out.empty_after_threshold = (used == 0);
  return out;
}

double histogram_estimator(std::span<const double> p_obs, double bin_width, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  if (!(bin_width > 0.0) || bin_width > 1.0 - alpha)
    fail(errc::non_positive_parameter, "bin width must sit in (0, 1-alpha]");
  const double span_len = 1.0 - alpha;
  // snap the requested width onto an integer bin count over [alpha, 1]
  const std::size_t bins =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(span_len / bin_width)));
  const double h = span_len / static_cast<double>(bins);
  std::vector<std::int64_t> counts(bins, 0);
  std::int64_t m = 0;
  for (double p : p_obs) {
    if (!(p > 0.0) || p > 1.0) fail(errc::invalid_probability, "observed p outside (0,1]");
    ++m;
    if (p <= alpha) continue;
    std::size_t j = static_cast<std::size_t>((p - alpha) / h);
    if (j >= bins) j = bins - 1;
    ++counts[j];
  }
  if (m == 0) fail(errc::empty_input, "no observed p values");
  if (alpha == 0.0 && counts[0] > 0)
    fail(errc::mass_at_zero_bin,
         "histogram bin touching p = 0 is occupied; its 1/p integral diverges");
  // estimate = sum_j c_j * int_bin p^-1 dp / h  (ghat = c_j / (m h), times m)
  double total = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    if (counts[j] == 0) continue;
    const double lo = alpha + static_cast<double>(j) * h;
    const double hi = alpha + static_cast<double>(j + 1) * h;
    total += static_cast<double>(counts[j]) * std::log(hi / lo) / h;
  }
  return total;
}

TheoreticalMse theoretical_mse(const FSpec& f, std::int64_t n, EstimatorKind kind, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  if (n < 1) fail(errc::non_positive_parameter, "population size must be >= 1");
  f.validate();
  TheoreticalMse out;
  const double nd = static_cast<double>(n);
  const double mass = f.mass_above(alpha);
  const double n_alpha = nd * mass;
  out.cor1_bound = alpha > 0.0 ? n_alpha * (1.0 / alpha - 1.0)
                               : std::numeric_limits<double>::infinity();
  if (mass <= 0.0) {
    out.note = "no mass above alpha";
    return out;
  }
  if (f.inv_p_diverges(alpha)) {
    out.infinite = true;
    out.vs_restricted = std::numeric_limits<double>::infinity();
    out.vs_total = std::numeric_limits<double>::infinity();
    out.note = "E_F(P^-1) diverges at alpha = 0";
    return out;
  }
  const double mean_inv_restricted = f.integral_inv_p(alpha) / mass;
  switch (kind) {
    case EstimatorKind::empirical:
      out.vs_restricted = n_alpha * (mean_inv_restricted - 1.0);
      break;
    case EstimatorKind::histogram: {
      const double mean_p_restricted = f.integral_p(alpha) / mass;
      out.vs_restricted = n_alpha * (mean_inv_restricted - 1.0 / mean_p_restricted);
      break;
    }
  }
  out.vs_total = out.vs_restricted + (nd - n_alpha) * (nd - n_alpha);
  return out;
}

RiskStudy risk_study(std::uint64_t seed, const FSpec& f, std::int64_t n,
                     std::span<const double> alphas, int replicates,
                     std::span<const EstimatorKind> estimators, double histogram_bin_width) {
  if (replicates < 1) fail(errc::non_positive_parameter, "need >= 1 replicate");
  if (n < 1) fail(errc::non_positive_parameter, "population size must be >= 1");
  f.validate();
  for (double a : alphas)
    if (a < 0.0 || a >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  const double h = histogram_bin_width > 0.0
                       ? histogram_bin_width
                       : std::pow(static_cast<double>(n), -0.6);

  RiskStudy study;
  study.n = n;
  study.replicates = replicates;
  for (EstimatorKind kind : estimators)
    for (double a : alphas) {
      RiskCell cell;
      cell.kind = kind;
      cell.alpha = a;
      cell.truth_total = n;
      cell.estimates.reserve(static_cast<std::size_t>(replicates));
      cell.truth_restricted.reserve(static_cast<std::size_t>(replicates));
      study.cells.push_back(std::move(cell));
    }

  std::vector<double> p(static_cast<std::size_t>(n));
  std::vector<double> p_obs;
  for (int r = 0; r < replicates; ++r) {
    Rng rng = Rng::substream(seed, /*purpose=*/3, static_cast<std::uint64_t>(r), 0);
    // population of known capture probabilities, detection by Bernoulli(p_i)
    switch (f.kind) {
      case FSpec::Kind::beta:
        for (auto& x : p) x = sample_beta(rng, f.a, f.b);
        break;
      case FSpec::Kind::atoms:
        for (auto& x : p) x = f.atom_p[sample_discrete(rng, f.atom_w)];
        break;
      case FSpec::Kind::histogram: {
        const double bw = 1.0 / static_cast<double>(f.hist_heights.size());
        for (auto& x : p) {
          const std::size_t j = sample_discrete(rng, f.hist_heights);
          x = (static_cast<double>(j) + rng.next_open()) * bw;
        }
        break;
      }
    }
    p_obs.clear();
    for (double pi : p)
      if (rng.next_double() < pi) p_obs.push_back(pi);

    std::size_t cell_idx = 0;
    for (EstimatorKind kind : estimators)
      for (double a : alphas) {
        RiskCell& cell = study.cells[cell_idx++];
        std::int64_t truth = 0;
        for (double pi : p)
          if (pi > a) ++truth;
        cell.truth_restricted.push_back(truth);
        try {
          double est;
          if (kind == EstimatorKind::empirical)
            est = empirical_estimator(p_obs, a).value;
          else
            est = histogram_estimator(p_obs, std::min(h, 1.0 - a), a);
          cell.estimates.push_back(est);
        } catch (const error&) {
          cell.estimates.push_back(std::numeric_limits<double>::quiet_NaN());
          ++cell.failed;
        }
      }
  }

  for (RiskCell& cell : study.cells) {
    double se_r = 0.0, se_t = 0.0, bias = 0.0;
    std::int64_t used = 0;
    for (std::size_t r = 0; r < cell.estimates.size(); ++r) {
      const double est = cell.estimates[r];
      if (!std::isfinite(est)) continue;
      const double dr = est - static_cast<double>(cell.truth_restricted[r]);
      const double dt = est - static_cast<double>(cell.truth_total);
      se_r += dr * dr;
      se_t += dt * dt;
      bias += dr;
      ++used;
    }
    if (used > 0) {
      cell.mse_restricted = se_r / static_cast<double>(used);
      cell.mse_total = se_t / static_cast<double>(used);
      cell.bias_restricted = bias / static_cast<double>(used);
    }
  }
  return study;
}

}  // namespace aobs
