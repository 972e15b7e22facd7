#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace aobs {

enum class Link { probit, logit };

// phi^-1: R -> (0,1)
double link_inv(Link link, double eta);

// Capture probability p(theta) = 1 - prod_t {1 - phi^-1(theta + beta_t)}.
// Strictly increasing in theta; returned value clamped into
// [1e-300, 1 - 1.1e-16] so downstream 1/p and log(1-p) stay finite.
double capture_prob(double theta, std::span<const double> beta, Link link);
double capture_prob(double theta, double beta, int lists, Link link);

// Smallest theta with capture probability above alpha under the logit link
// with a common list effect: theta = log{(1-alpha)^(-1/T) - 1} - beta.
double alpha_threshold_theta(double alpha, double beta, int lists);

// Lower bound on the detection probability of an alpha-observable set
// carrying mixing mass eps in a population of n: 1 - (1 - alpha*eps)^n.
double thm1_bound(double alpha, double eps, std::int64_t n);

// Smallest alpha whose detection bound reaches prob_target; errors with
// UnattainableTarget when even alpha = 1 cannot reach it.
double alpha_for_target(double prob_target, double eps, std::int64_t n);

// Density of eta = log[{1 - p(theta)}^-1 - 1] ... the log-odds of the capture
// probability under the logit link with common list effect: the pushforward of
// a mixing density g through theta -> logit(p(theta)). T = 1 reduces to
// f*(eta) = g(eta - beta).
double induced_density_logit(double eta, const std::function<double(double)>& g_density,
                             double beta, int lists);

// Jacobian factor f*(eta)/g(theta(eta)) on its own; -> 1 as eta -> -inf and
// -> 1/T as eta -> +inf.
double induced_jacobian_logit(double eta, int lists);

// Inverse map eta -> theta for the same transform.
double theta_from_eta_logit(double eta, double beta, int lists);

}  // namespace aobs
