#include "aobs/distributions.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"

namespace aobs {

double sample_normal(Rng& rng, double mean, double sd) {
  if (!(sd > 0.0)) fail(errc::non_positive_scale, "normal sd must be > 0");
  return mean + sd * normal_quantile(rng.next_open());
}

namespace {

// Standardized draw Z > a. Inverse CDF through the upper-tail representation
// keeps full accuracy for any a <= 4; beyond that the exponential envelope of
// Robert (1995) with lambda = (a + sqrt(a^2+4))/2 accepts with prob >= ~0.76.
double trunc_std_above(Rng& rng, double a) {
  if (a <= 4.0) {
    const double tail = normal_ccdf(a);
    const double z = -normal_quantile(rng.next_open() * tail);
    return z > a ? z : std::nextafter(a, std::numeric_limits<double>::infinity());
  }
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.next_open()) / lambda;
    const double d = z - lambda;
    if (std::log(rng.next_open()) <= -0.5 * d * d) return z;
  }
}

}  // namespace

double sample_truncated_normal(Rng& rng, double mean, double sd, Side side, double cut) {
  if (!(sd > 0.0)) fail(errc::non_positive_scale, "truncated normal sd must be > 0");
  if (side == Side::right_of) {
    const double a = (cut - mean) / sd;
    const double z = trunc_std_above(rng, a);
    double x = mean + sd * z;
    if (!(x > cut)) x = std::nextafter(cut, std::numeric_limits<double>::infinity());
    return x;
  }
  const double a = (mean - cut) / sd;
  const double z = trunc_std_above(rng, a);
  double x = mean - sd * z;
  if (!(x < cut)) x = std::nextafter(cut, -std::numeric_limits<double>::infinity());
  return x;
}

double sample_exponential(Rng& rng, double rate) {
  if (!(rate > 0.0)) fail(errc::non_positive_parameter, "exponential rate must be > 0");
  return -std::log(rng.next_open()) / rate;
}

// Marsaglia-Tsang squeeze for shape >= 1, boosted by u^(1/shape) below 1.
double sample_gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    fail(errc::non_positive_parameter, "gamma shape and rate must be > 0");
  if (shape < 1.0) {
    const double u = rng.next_open();
    return sample_gamma(rng, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal_quantile(rng.next_open());
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double sample_beta(Rng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) fail(errc::non_positive_parameter, "beta needs a, b > 0");
  const double x = sample_gamma(rng, a, 1.0);
  const double y = sample_gamma(rng, b, 1.0);
  return x / (x + y);
}

// Exponential arrival times: exact for every mean, O(mean) uniforms per draw.
std::int64_t sample_poisson(Rng& rng, double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    fail(errc::non_positive_parameter, "poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::int64_t count = 0;
  double t = sample_exponential(rng, 1.0);
  while (t <= mean) {
    ++count;
    t += sample_exponential(rng, 1.0);
  }
  return count;
}

std::int64_t sample_negative_binomial(Rng& rng, std::int64_t r, double s) {
  if (r <= 0) fail(errc::non_positive_parameter, "negative binomial needs r >= 1");
  if (!(s > 0.0) || s > 1.0) fail(errc::invalid_probability, "success probability in (0,1]");
  if (s == 1.0) return 0;
  // Gamma-Poisson mixture: lambda ~ Gamma(r, s/(1-s)), N ~ Poisson(lambda).
  const double lambda = sample_gamma(rng, static_cast<double>(r), s / (1.0 - s));
  return sample_poisson(rng, lambda);
}

std::size_t sample_discrete(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) fail(errc::zero_weight_vector, "weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) fail(errc::zero_weight_vector, "weight vector sums to zero");
  double u = rng.next_double() * total;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return weights.size() - 1;
}

std::vector<std::int64_t> sample_multinomial(Rng& rng, std::int64_t n,
                                             std::span<const double> weights) {
  if (n < 0) fail(errc::non_positive_parameter, "multinomial count must be >= 0");
  std::vector<double> cum(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i]))
      fail(errc::zero_weight_vector, "weights must be >= 0");
    total += weights[i];
    cum[i] = total;
  }
  if (!(total > 0.0)) fail(errc::zero_weight_vector, "weight vector sums to zero");
  std::vector<std::int64_t> counts(weights.size(), 0);
  for (std::int64_t k = 0; k < n; ++k) {
    const double u = rng.next_double() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cum.begin());
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  return counts;
}

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> conc) {
  std::vector<double> out(conc.size());
  double total = 0.0;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    out[i] = sample_gamma(rng, conc[i], 1.0);
    total += out[i];
  }
  if (!(total > 0.0)) fail(errc::zero_weight_vector, "dirichlet draw degenerated");
  for (double& x : out) x /= total;
  return out;
}

double sample_student_t(Rng& rng, double dof) {
  if (!(dof > 0.0)) fail(errc::non_positive_parameter, "t needs dof > 0");
  const double z = normal_quantile(rng.next_open());
  const double v = sample_gamma(rng, dof / 2.0, dof / 2.0);
  return z / std::sqrt(v);
}

Eigen::VectorXd sample_mvn_from_precision(Rng& rng, const Eigen::MatrixXd& precision,
                                          const Eigen::VectorXd& linear) {
  const Eigen::Index n = precision.rows();
  if (precision.cols() != n || linear.size() != n)
    fail(errc::not_positive_definite, "precision/linear dimensions disagree");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    fail(errc::not_positive_definite, "precision matrix is not positive definite");
  Eigen::VectorXd mean = llt.solve(linear);
  // one refinement pass; keeps the relative residual under 1e-10
  mean += llt.solve(linear - precision * mean);
  const double denom = std::max(1.0, linear.norm());
  if ((precision * mean - linear).norm() > 1e-10 * denom)
    fail(errc::not_positive_definite, "mean solve failed to reach required residual");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal_quantile(rng.next_open());
  // x = mean + U^-1 z with P = U^T U gives cov(x) = P^-1
  return mean + llt.matrixU().solve(z);
}

}  // namespace aobs
