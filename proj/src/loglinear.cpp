#include "aobs/loglinear.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"
#include "aobs/observability.hpp"
#include "aobs/quadrature.hpp"

namespace aobs {

const char* family_name(LogLinearFamily fam) {
  switch (fam) {
    case LogLinearFamily::darroch: return "darroch";
    case LogLinearFamily::indirect_poisson: return "indirect_poisson";
    case LogLinearFamily::indirect_gamma: return "indirect_gamma";
    case LogLinearFamily::homogeneous: return "homogeneous";
  }
  return "?";
}

LogLinearFamily family_by_name(const std::string& name) {
  if (name == "darroch") return LogLinearFamily::darroch;
  if (name == "indirect_poisson") return LogLinearFamily::indirect_poisson;
  if (name == "indirect_gamma") return LogLinearFamily::indirect_gamma;
  if (name == "homogeneous") return LogLinearFamily::homogeneous;
  fail(errc::config_error, "unknown log-linear family '" + name + "'");
}

double h_value(LogLinearFamily fam, int captures) {
  const double j = captures;
  switch (fam) {
    case LogLinearFamily::darroch:
      return 0.5 * j * j;
    case LogLinearFamily::indirect_poisson:
      return std::exp2(j) - 1.0;
    case LogLinearFamily::indirect_gamma:
      return -std::log(j + 3.5) + std::log(3.5);
    case LogLinearFamily::homogeneous:
      return 0.0;
  }
  return 0.0;
}

LogLinearSpec build_design(int lists, LogLinearFamily family) {
  if (lists < 1 || lists > CaptureDataset::kMaxLists)
    fail(errc::invalid_scenario_params, "list count out of range");
  LogLinearSpec spec;
  spec.lists = lists;
  spec.family = family;
  const std::uint32_t n_cells = (1u << lists) - 1u;
  const bool with_h = family != LogLinearFamily::homogeneous;
  const int p = 1 + lists + (with_h ? 1 : 0);
  spec.cells.reserve(n_cells);
  spec.design.resize(n_cells, p);
  spec.h_column = with_h ? p - 1 : -1;
  for (std::uint32_t x = 1; x <= n_cells; ++x) {
    const Eigen::Index row = static_cast<Eigen::Index>(x - 1);
    spec.cells.push_back(x);
    spec.design(row, 0) = 1.0;
    for (int t = 0; t < lists; ++t) spec.design(row, 1 + t) = (x >> t) & 1u ? 1.0 : 0.0;
    if (with_h) spec.design(row, spec.h_column) = h_value(family, std::popcount(x));
  }
  return spec;
}

LogLinearFit fit_loglinear(const LogLinearSpec& spec, const CaptureDataset& data) {
  if (data.lists() != spec.lists)
    fail(errc::fixture_shape_mismatch, "design and dataset list counts disagree");
  const Eigen::Index n = spec.design.rows();
  const Eigen::Index p = spec.design.cols();

  Eigen::VectorXd y(n);
  Eigen::Index nonzero = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    y(r) = static_cast<double>(data.count_in_cell(spec.cells[static_cast<std::size_t>(r)]));
    if (y(r) > 0) ++nonzero;
  }
  if (nonzero < p)
    fail(errc::non_convergence, "fewer occupied cells than parameters; fit cannot converge");

  // start from a least-squares fit to log(y + 1/2)
  Eigen::VectorXd eta = (y.array() + 0.5).log().matrix();
  Eigen::VectorXd coef =
      (spec.design.transpose() * spec.design)
          .ldlt()
          .solve(spec.design.transpose() * eta);

  Eigen::VectorXd mu, grad;
  Eigen::MatrixXd info;
  double loglik_prev = -std::numeric_limits<double>::infinity();
  int it = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
  for (; it < 100; ++it) {
    const Eigen::VectorXd lin = spec.design * coef;
    mu = lin.array().exp().matrix();
    if (!mu.allFinite()) fail(errc::non_convergence, "fitted means overflowed");
    grad = spec.design.transpose() * (y - mu);
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm < 1e-8) break;
    info = spec.design.transpose() * mu.asDiagonal() * spec.design;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success)
      fail(errc::singular_information, "information matrix is not positive definite");
    Eigen::VectorXd step = ldlt.solve(grad);
    // halve until the Poisson log likelihood stops decreasing
    const double loglik_here = (y.array() * lin.array()).sum() - mu.sum();
    double scale = 1.0;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd trial = coef + scale * step;
      const Eigen::VectorXd lin_t = spec.design * trial;
      const double ll = (y.array() * lin_t.array()).sum() - lin_t.array().exp().sum();
      if (std::isfinite(ll) && ll >= loglik_here - 1e-12) {
        coef = trial;
        break;
      }
      scale *= 0.5;
      if (half == 39) fail(errc::non_convergence, "step halving exhausted");
    }
    loglik_prev = loglik_here;
  }
  if (grad_norm >= 1e-8)
    fail(errc::non_convergence, "gradient stayed above tolerance after 100 passes");
  (void)loglik_prev;

  LogLinearFit fit;
  fit.family = spec.family;
  fit.lists = spec.lists;
  fit.coef = coef;
  fit.fitted = mu;
  fit.m = data.size();
  fit.iterations = it;
  fit.final_grad_norm = grad_norm;

  info = spec.design.transpose() * mu.asDiagonal() * spec.design;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success)
    fail(errc::singular_information, "information matrix is not positive definite at optimum");
  fit.cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

  // zero cell projects to exp(beta0) since h(0) = 0 for every family
  const double beta0 = coef(0);
  const double se0 = std::sqrt(std::max(0.0, fit.cov(0, 0)));
  const double md = static_cast<double>(fit.m);
  fit.n_hat = md + std::exp(beta0);
  fit.ci_lo = md + std::exp(beta0 - 1.959963984540054 * se0);
  fit.ci_hi = md + std::exp(beta0 + 1.959963984540054 * se0);
  return fit;
}

double LogLinearFit::tau() const {
  if (family == LogLinearFamily::homogeneous)
    fail(errc::invalid_scenario_params, "homogeneous fit has no heterogeneity coefficient");
  return coef(coef.size() - 1);
}

namespace {

// theta with capture_prob(theta) = alpha under the fitted logit model
double threshold_theta(const std::vector<double>& beta, double alpha) {
  double lo = -500.0, hi = 500.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (capture_prob(mid, beta, Link::logit) > alpha)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double estimate_n_alpha_parametric(const LogLinearFit& fit, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1]");
  if (alpha == 0.0) return fit.n_hat;
  if (alpha == 1.0) return 0.0;

  std::vector<double> beta(static_cast<std::size_t>(fit.lists));
  for (int t = 0; t < fit.lists; ++t) beta[static_cast<std::size_t>(t)] = fit.coef(1 + t);

  if (fit.family == LogLinearFamily::homogeneous) {
    const double p0 = capture_prob(0.0, beta, Link::logit);
    return p0 > alpha ? fit.n_hat : 0.0;
  }

  const double tau = fit.coef(fit.coef.size() - 1);
  const double theta_a = threshold_theta(beta, alpha);
  // unnormalized fitted mixing density: base(theta; tau) * prod_t (1+e^{theta+beta_t})
  const auto tilt_log = [&](double th) {
    double s = 0.0;
    for (double b : beta) s += softplus(th + b);
    return s;
  };

  double numer = 0.0, denom = 0.0;
  switch (fit.family) {
    case LogLinearFamily::darroch: {
      if (!(tau > 0.0))
        fail(errc::quadrature_failure, "fitted variance coefficient is not positive");
      const double sd = std::sqrt(tau);
      const auto f = [&](double th) {
        return normal_pdf(th / sd) / sd * std::exp(tilt_log(th));
      };
      const double lo = std::min(-14.0 * sd, theta_a - 1.0);
      const double hi = fit.lists * tau + 14.0 * sd;
      if (theta_a >= hi) return 0.0;
      denom = integrate_or_throw(f, lo, hi, 1e-9, 1e-300);
      numer = integrate_or_throw(f, std::max(theta_a, lo), hi, 1e-9, 1e-300);
      break;
    }
    case LogLinearFamily::indirect_poisson: {
      if (!(tau > 0.0))
        fail(errc::quadrature_failure, "fitted rate coefficient is not positive");
      // support theta_k = k log 2, Poisson(tau) weights; k! beats 2^(kT)
      const double log2 = std::log(2.0);
      const int k_max =
          static_cast<int>(std::ceil(tau * std::exp2(fit.lists))) + 60;
      for (int k = 0; k <= k_max; ++k) {
        const double log_w = -tau + k * std::log(tau) - std::lgamma(k + 1.0);
        const double term = std::exp(log_w + tilt_log(k * log2));
        denom += term;
        if (k * log2 > theta_a) numer += term;
      }
      break;
    }
    case LogLinearFamily::indirect_gamma: {
      if (!(tau > 0.0))
        fail(errc::quadrature_failure, "fitted shape coefficient is not positive");
      const double rate = 3.5;
      const auto f = [&](double th) {
        const double x = -th;
        if (!(x > 0.0)) return 0.0;
        const double lg = tau * std::log(rate) - std::lgamma(tau) +
                          (tau - 1.0) * std::log(x) - rate * x;
        return std::exp(lg + tilt_log(th));
      };
      const double lo = -(tau / rate + 16.0 * std::sqrt(tau) / rate + 16.0 / rate);
      if (theta_a >= 0.0) return 0.0;
      denom = integrate_or_throw(f, lo, -1e-14, 1e-9, 1e-300);
      numer = theta_a <= lo ? denom
                            : integrate_or_throw(f, theta_a, -1e-14, 1e-9, 1e-300);
      break;
    }
    case LogLinearFamily::homogeneous:
      break;  // handled above
  }
  if (!(denom > 0.0)) fail(errc::quadrature_failure, "fitted mixing mass vanished");
  const double frac = std::min(1.0, std::max(0.0, numer / denom));
  return fit.n_hat * frac;
}

}  // namespace aobs
