#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "aobs/rng.hpp"

namespace aobs {

double sample_normal(Rng& rng, double mean, double sd);

enum class Side { left_of, right_of };

// One-sided truncated normal. Inverse-CDF when the cut sits within 4 sd of the
// mean, exponential rejection (Robert 1995) deeper in the tail. The draw is
// strictly inside the open half-line.
double sample_truncated_normal(Rng& rng, double mean, double sd, Side side, double cut);

double sample_gamma(Rng& rng, double shape, double rate);
double sample_beta(Rng& rng, double a, double b);
double sample_exponential(Rng& rng, double rate);
std::int64_t sample_poisson(Rng& rng, double mean);

// Failures before the r-th success; s is the success probability, so the mean
// is r(1-s)/s. s = 1 collapses to 0.
std::int64_t sample_negative_binomial(Rng& rng, std::int64_t r, double s);

// Index draw proportional to non-negative weights.
std::size_t sample_discrete(Rng& rng, std::span<const double> weights);

std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t n,
                                             std::span<const double> weights);

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> conc);

double sample_student_t(Rng& rng, double dof);

// Gaussian with the given precision matrix and linear term b: covariance
// precision^-1, mean precision^-1 b. Cholesky-based; the mean solve is refined
// until the relative residual is below 1e-10.
Eigen::VectorXd sample_mvn_from_precision(Rng& rng, const Eigen::MatrixXd& precision,
                                          const Eigen::VectorXd& linear);

}  // namespace aobs
