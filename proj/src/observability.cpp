#include "aobs/observability.hpp"

#include <cmath>
#include <vector>

#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"

namespace aobs {
namespace {

constexpr double kPLo = 1e-300;
constexpr double kPHi = 1.0 - 1.1e-16;

double clamp_prob(double p) { return p < kPLo ? kPLo : (p > kPHi ? kPHi : p); }

// log{1 - phi^-1(eta)}, computed without cancellation on either tail.
double log_one_minus_inv(Link link, double eta) {
  if (link == Link::logit) return -softplus(eta);
  return log_normal_cdf(-eta);
}

}  // namespace

double link_inv(Link link, double eta) {
  if (link == Link::logit) {
    // 1/(1+e^-eta)
    return eta > 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
  }
  return normal_cdf(eta);
}

double capture_prob(double theta, std::span<const double> beta, Link link) {
  if (beta.empty()) fail(errc::invalid_scenario_params, "capture_prob needs >= 1 list");
  double log_miss = 0.0;
  for (double b : beta) log_miss += log_one_minus_inv(link, theta + b);
  return clamp_prob(-std::expm1(log_miss));
}

double capture_prob(double theta, double beta, int lists, Link link) {
  if (lists < 1) fail(errc::invalid_scenario_params, "capture_prob needs >= 1 list");
  const double log_miss = lists * log_one_minus_inv(link, theta + beta);
  return clamp_prob(-std::expm1(log_miss));
}

double alpha_threshold_theta(double alpha, double beta, int lists) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(errc::alpha_out_of_range, "alpha must sit in (0,1)");
  if (lists < 1) fail(errc::invalid_scenario_params, "need >= 1 list");
  // (1-alpha)^(-1/T) - 1, kept accurate for alpha near 0
  const double x = std::expm1(-std::log1p(-alpha) / lists);
  return std::log(x) - beta;
}

double thm1_bound(double alpha, double eps, std::int64_t n) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(errc::alpha_out_of_range, "alpha must sit in [0,1]");
  if (!(eps >= 0.0 && eps <= 1.0)) fail(errc::invalid_probability, "eps must sit in [0,1]");
  if (n < 0) fail(errc::non_positive_parameter, "population size must be >= 0");
  return -std::expm1(static_cast<double>(n) * std::log1p(-alpha * eps));
}

double alpha_for_target(double prob_target, double eps, std::int64_t n) {
  if (!(prob_target > 0.0 && prob_target < 1.0))
    fail(errc::invalid_probability, "target probability must sit in (0,1)");
  if (!(eps > 0.0 && eps <= 1.0)) fail(errc::invalid_probability, "eps must sit in (0,1]");
  if (n < 1) fail(errc::non_positive_parameter, "population size must be >= 1");
  const double alpha = -std::expm1(std::log1p(-prob_target) / static_cast<double>(n)) / eps;
  if (alpha > 1.0)
    fail(errc::unattainable_target, "no alpha <= 1 reaches the requested detection probability");
  return alpha;
}

double theta_from_eta_logit(double eta, double beta, int lists) {
  if (lists < 1) fail(errc::invalid_scenario_params, "need >= 1 list");
  // theta = log[(1+e^eta)^(1/T) - 1] - beta via L = log(1+e^eta)
  const double L = softplus(eta);
  return std::log(std::expm1(L / lists)) - beta;
}

double induced_jacobian_logit(double eta, int lists) {
  if (lists < 1) fail(errc::invalid_scenario_params, "need >= 1 list");
  const double T = lists;
  const double L = softplus(eta);
  // d(theta)/d(eta) of the inverse map, d(eta)/d(theta) reciprocal:
  // J = (1/T) (1+e^eta)^{(1-T)/T} e^eta / {(1+e^eta)^{1/T} - 1}
  const double log_j =
      -std::log(T) + (1.0 - T) / T * L + eta - std::log(std::expm1(L / T));
  return std::exp(log_j);
}

double induced_density_logit(double eta, const std::function<double(double)>& g_density,
                             double beta, int lists) {
  const double theta = theta_from_eta_logit(eta, beta, lists);
  return induced_jacobian_logit(eta, lists) * g_density(theta);
}

}  // namespace aobs
