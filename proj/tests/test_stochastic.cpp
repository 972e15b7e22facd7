#include <doctest.h>

#include <aobs/distributions.hpp>
#include <aobs/error.hpp>
#include <aobs/mathfn.hpp>
#include <aobs/quadrature.hpp>
#include <aobs/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class F>
Moments sample_moments(std::size_t n, F draw) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    const double d = x - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (x - mean);
  }
  return {mean, m2 / static_cast<double>(n - 1)};
}

// Kolmogorov-Smirnov statistic against a cdf given as a callable.
template <class Cdf>
double ks_statistic(std::vector<double> v, Cdf cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace

TEST_SUITE("stochastic") {

TEST_CASE("normal quantile reproduces frozen reference values") {
  CHECK(std::fabs(aobs::normal_quantile(0.5)) < 1e-12);
  CHECK(std::fabs(aobs::normal_quantile(0.975) - 1.959963984540054) < 1e-9);
  CHECK(std::fabs(aobs::normal_quantile(0.99) - 2.3263478740408408) < 1e-9);
  CHECK(std::fabs(aobs::normal_quantile(0.1) + 1.2815515655446004) < 1e-9);
  // quantile and cdf invert each other across the bulk and both tails
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-9}) {
    CHECK(std::fabs(aobs::normal_cdf(aobs::normal_quantile(p)) - p) <= 1e-11 * std::max(p, 1e-3));
  }
  // strictly monotone on a grid
  double prev = aobs::normal_quantile(1e-10);
  for (double p = 1e-4; p < 1.0; p += 1e-2) {
    const double q = aobs::normal_quantile(p);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("normal cdf keeps relative accuracy in the tails") {
  CHECK(std::fabs(aobs::normal_cdf(0.5) - 0.6914624612740131) < 1e-15);
  CHECK(std::fabs(aobs::normal_cdf(-0.5) - 0.3085375387259869) < 1e-15);
  CHECK(aobs::normal_cdf(-8.0) == doctest::Approx(6.22096057427174e-16).epsilon(1e-12));
  CHECK(aobs::normal_ccdf(8.0) == doctest::Approx(6.22096057427174e-16).epsilon(1e-12));
  CHECK(aobs::log_normal_cdf(-5.0) == doctest::Approx(-15.064998393988727).epsilon(1e-10));
  CHECK(aobs::log_normal_cdf(-40.0) == doctest::Approx(-804.6084420137539).epsilon(1e-10));
  CHECK(aobs::log_normal_cdf(3.0) == doctest::Approx(std::log(aobs::normal_cdf(3.0))).epsilon(1e-12));
}

TEST_CASE("digamma matches frozen values and the recurrence") {
  CHECK(aobs::digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
  CHECK(aobs::digamma(0.5) == doctest::Approx(-1.9635100260214235).epsilon(1e-12));
  CHECK(aobs::digamma(4.7) == doctest::Approx(1.4374238096317817).epsilon(1e-12));
  for (double x : {0.2, 1.3, 7.9, 42.0}) {
    CHECK(aobs::digamma(x + 1.0) == doctest::Approx(aobs::digamma(x) + 1.0 / x).epsilon(1e-12));
  }
}

TEST_CASE("log_sum_exp and softplus stay finite at extreme inputs") {
  const std::array<double, 2> two_zeros = {0.0, 0.0};
  CHECK(aobs::log_sum_exp(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::array<double, 2> large = {1000.0, 1000.0};
  CHECK(aobs::log_sum_exp(large) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::array<double, 3> mixed = {-1e308, 3.0, 2.0};
  CHECK(aobs::log_sum_exp(mixed) == doctest::Approx(3.0 + std::log1p(std::exp(-1.0))).epsilon(1e-14));
  CHECK(aobs::log_sum_exp({}) == -std::numeric_limits<double>::infinity());
  CHECK(aobs::softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(aobs::softplus(50.0) == doctest::Approx(50.0).epsilon(1e-15));
  CHECK(aobs::softplus(-50.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature hits exact integrals") {
  CHECK(aobs::integrate([](double x) { return x * x; }, 0.0, 1.0).value ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(aobs::integrate([](double x) { return aobs::normal_pdf(x); }, -40.0, 40.0).value ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(aobs::integrate([](double x) { return std::log(x); }, 0.0, 1.0).value ==
        doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("identical seeds give bitwise-identical streams") {
  aobs::Rng a(7, 3), b(7, 3);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  // mixed draw kinds stay synchronized too
  aobs::Rng c(99, 1), d(99, 1);
  for (int i = 0; i < 200; ++i) {
    CHECK(aobs::sample_normal(c, 0, 1) == aobs::sample_normal(d, 0, 1));
    CHECK(aobs::sample_gamma(c, 2, 1) == aobs::sample_gamma(d, 2, 1));
    CHECK(aobs::sample_beta(c, 1, 3) == aobs::sample_beta(d, 1, 3));
  }
}

TEST_CASE("substream ids are distinct and packed as documented") {
  CHECK(aobs::Rng::substream(5, 1, 2, 3).stream() ==
        ((1ull << 48) | (2ull << 16) | 3ull));
  std::vector<std::uint64_t> ids;
  for (std::uint64_t purpose : {1, 2, 3})
    for (std::uint64_t rep : {0, 1, 77})
      for (std::uint64_t chain : {0, 1})
        ids.push_back(aobs::Rng::substream(5, purpose, rep, chain).stream());
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
  // different streams give different leading output
  aobs::Rng s1 = aobs::Rng::substream(5, 1, 0, 0);
  aobs::Rng s2 = aobs::Rng::substream(5, 2, 0, 0);
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("uniform doubles respect their interval contracts") {
  aobs::Rng r(11, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = r.next_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("normal sampler moments") {
  aobs::Rng r(2024, 1);
  const Moments m01 = sample_moments(1000000, [&] { return aobs::sample_normal(r, 0, 1); });
  CHECK(std::fabs(m01.mean) < 4e-3);
  CHECK(std::fabs(m01.var - 1.0) < 0.02);
  const Moments m23 = sample_moments(1000000, [&] { return aobs::sample_normal(r, 2, 3); });
  CHECK(std::fabs(m23.mean - 2.0) < 0.012);
  CHECK(std::fabs(m23.var - 9.0) < 0.18);
  CHECK_THROWS_AS(aobs::sample_normal(r, 0, 0.0), aobs::error);
  CHECK_THROWS_AS(aobs::sample_normal(r, 0, -1.0), aobs::error);
}

TEST_CASE("one-sided truncated normal: half-line contract and moments") {
  aobs::Rng r(2024, 2);
  const Moments half = sample_moments(1000000, [&] {
    const double x = aobs::sample_truncated_normal(r, 0, 1, aobs::Side::right_of, 0.0);
    REQUIRE(x > 0.0);
    return x;
  });
  CHECK(std::fabs(half.mean - 0.7978845608028654) < 0.003);

  const Moments left = sample_moments(200000, [&] {
    const double x = aobs::sample_truncated_normal(r, 0, 1, aobs::Side::left_of, 0.0);
    REQUIRE(x < 0.0);
    return x;
  });
  CHECK(std::fabs(left.mean + 0.7978845608028654) < 0.006);

  // a cut far below the mean leaves the distribution untouched
  const Moments full = sample_moments(1000000, [&] {
    return aobs::sample_truncated_normal(r, 0, 1, aobs::Side::right_of, -1e9);
  });
  CHECK(std::fabs(full.mean) < 0.004);
  CHECK(std::fabs(full.var - 1.0) < 0.01);
}

TEST_CASE("truncated normal deep-tail draws stay in range without stalling") {
  aobs::Rng r(2024, 3);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = aobs::sample_truncated_normal(r, 0, 1, aobs::Side::right_of, 8.0);
    REQUIRE(x > 8.0);
    REQUIRE(std::isfinite(x));
    mean += x;
  }
  mean /= 100000.0;
  // E[X | X > 8] = phi(8)/Phi(-8) = 8.1209...
  CHECK(mean > 8.05);
  CHECK(mean < 8.20);
  CHECK_THROWS_AS(aobs::sample_truncated_normal(r, 0, 0.0, aobs::Side::right_of, 0.0), aobs::error);
}

TEST_CASE("beta sampler: uniform special case and mean formula") {
  aobs::Rng r(2024, 4);
  std::vector<double> u(100000);
  for (double& x : u) x = aobs::sample_beta(r, 1, 1);
  CHECK(ks_statistic(u, [](double x) { return x; }) < 0.00515);  // KS alpha=0.01 critical

  const Moments b15 = sample_moments(1000000, [&] { return aobs::sample_beta(r, 1, 5); });
  CHECK(std::fabs(b15.mean - 1.0 / 6.0) < 1.0 / 600.0);
  CHECK_THROWS_AS(aobs::sample_beta(r, 0.0, 1.0), aobs::error);
}

TEST_CASE("gamma sampler moments across shape regimes") {
  aobs::Rng r(2024, 5);
  const Moments g22 = sample_moments(1000000, [&] { return aobs::sample_gamma(r, 2, 2); });
  CHECK(std::fabs(g22.mean - 1.0) < 0.01);
  CHECK(std::fabs(g22.var - 0.5) < 0.015);
  // shape below 1 exercises the boost branch of the sampler
  const Moments g04 = sample_moments(1000000, [&] { return aobs::sample_gamma(r, 0.4, 1); });
  CHECK(std::fabs(g04.mean - 0.4) < 0.004);
  CHECK(std::fabs(g04.var - 0.4) < 0.012);
  CHECK_THROWS_AS(aobs::sample_gamma(r, -1, 1), aobs::error);
  CHECK_THROWS_AS(aobs::sample_gamma(r, 1, 0), aobs::error);
}

TEST_CASE("exponential and poisson samplers") {
  aobs::Rng r(2024, 6);
  const Moments e2 = sample_moments(1000000, [&] { return aobs::sample_exponential(r, 2.0); });
  CHECK(std::fabs(e2.mean - 0.5) < 0.005);
  const Moments p42 = sample_moments(1000000, [&] {
    return static_cast<double>(aobs::sample_poisson(r, 4.2));
  });
  CHECK(std::fabs(p42.mean - 4.2) < 0.042);
  CHECK(std::fabs(p42.var - 4.2) < 0.13);
}

TEST_CASE("negative binomial counts failures before the r-th success") {
  aobs::Rng r(2024, 7);
  for (int i = 0; i < 100; ++i) CHECK(aobs::sample_negative_binomial(r, 5, 1.0) == 0);

  double mean = 0.0;
  for (int i = 0; i < 100000; ++i)
    mean += static_cast<double>(aobs::sample_negative_binomial(r, 68, 0.85));
  mean /= 100000.0;
  CHECK(std::fabs(mean - 12.0) < 0.24);  // r(1-s)/s = 68*0.15/0.85

  // r = 1 collapses to the geometric distribution
  const int n = 100000;
  std::array<std::int64_t, 11> obs{};
  for (int i = 0; i < n; ++i) {
    const std::int64_t k = aobs::sample_negative_binomial(r, 1, 0.5);
    ++obs[std::min<std::int64_t>(k, 10)];
  }
  double chi2 = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double p = (k < 10) ? std::pow(0.5, k + 1) : std::pow(0.5, 10);
    const double expect = n * p;
    chi2 += (obs[k] - expect) * (obs[k] - expect) / expect;
  }
  CHECK(chi2 < 29.59);  // chi-square df=10 at the 0.999 level
  CHECK_THROWS_AS(aobs::sample_negative_binomial(r, 1, 0.0), aobs::error);
  CHECK_THROWS_AS(aobs::sample_negative_binomial(r, 1, 1.5), aobs::error);
}

TEST_CASE("discrete and multinomial samplers") {
  aobs::Rng r(2024, 8);
  const std::array<double, 3> point = {0.0, 0.0, 3.0};
  for (int i = 0; i < 50; ++i) CHECK(aobs::sample_discrete(r, point) == 2);
  const std::array<double, 3> zeros = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(aobs::sample_discrete(r, zeros), aobs::error);

  const std::array<double, 3> w = {1.0, 2.0, 1.0};
  CHECK(aobs::sample_multinomial(r, 0, w) == std::vector<std::int64_t>{0, 0, 0});
  const auto one_slot = aobs::sample_multinomial(r, 17, point);
  CHECK(one_slot == std::vector<std::int64_t>{0, 0, 17});

  const auto big = aobs::sample_multinomial(r, 1000000, w);
  CHECK(big[0] + big[1] + big[2] == 1000000);
  CHECK(std::fabs(big[0] / 1e6 - 0.25) < 0.003);
  CHECK(std::fabs(big[1] / 1e6 - 0.50) < 0.003);
  CHECK(std::fabs(big[2] / 1e6 - 0.25) < 0.003);
  CHECK_THROWS_AS(aobs::sample_multinomial(r, 3, zeros), aobs::error);
}

TEST_CASE("dirichlet draws live on the simplex with the right means") {
  aobs::Rng r(2024, 9);
  const std::array<double, 3> conc = {2.0, 3.0, 5.0};
  double mean0 = 0.0, mean2 = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto v = aobs::sample_dirichlet(r, conc);
    REQUIRE(std::fabs(v[0] + v[1] + v[2] - 1.0) < 1e-12);
    mean0 += v[0];
    mean2 += v[2];
  }
  CHECK(std::fabs(mean0 / 1e5 - 0.2) < 0.004);
  CHECK(std::fabs(mean2 / 1e5 - 0.5) < 0.005);
}

TEST_CASE("student t draws match frozen quartiles") {
  aobs::Rng r(2024, 10);
  std::vector<double> v(1000000);
  for (double& x : v) x = aobs::sample_student_t(r, 3.0);
  std::sort(v.begin(), v.end());
  const double med = v[v.size() / 2];
  const double q75 = v[(3 * v.size()) / 4];
  CHECK(std::fabs(med) < 0.01);
  CHECK(std::fabs(q75 - 0.7648923284043453) < 0.0153);
}

TEST_CASE("precision-parameterized gaussian sampler") {
  aobs::Rng r(2024, 11);
  SUBCASE("identity precision, zero linear term") {
    Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sumsq = Eigen::VectorXd::Zero(3);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = aobs::sample_mvn_from_precision(r, prec, b);
      sum += x;
      sumsq += x.cwiseProduct(x);
    }
    for (int k = 0; k < 3; ++k) {
      const double mean = sum[k] / n;
      CHECK(std::fabs(mean) < 0.012);
      CHECK(std::fabs(sumsq[k] / n - mean * mean - 1.0) < 0.03);
    }
  }
  SUBCASE("diagonal precision with a linear term") {
    Eigen::MatrixXd prec = 4.0 * Eigen::MatrixXd::Identity(1, 1);
    Eigen::VectorXd b(1);
    b << 8.0;
    const Moments m = sample_moments(100000, [&] {
      return aobs::sample_mvn_from_precision(r, prec, b)[0];
    });
    CHECK(std::fabs(m.mean - 2.0) < 0.006);
    CHECK(std::fabs(m.var - 0.25) < 0.005);
  }
  SUBCASE("coupled 2x2 precision reproduces the analytic covariance and mean") {
    Eigen::MatrixXd prec(2, 2);
    prec << 2, 1, 1, 2;
    Eigen::VectorXd b(2);
    b << 1, 2;  // mean = prec^-1 b = (0, 1)
    const int n = 100000;
    double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = aobs::sample_mvn_from_precision(r, prec, b);
      s0 += x[0];
      s1 += x[1];
      s00 += x[0] * x[0];
      s11 += x[1] * x[1];
      s01 += x[0] * x[1];
    }
    const double m0 = s0 / n, m1 = s1 / n;
    CHECK(std::fabs(m0 - 0.0) < 0.012);
    CHECK(std::fabs(m1 - 1.0) < 0.012);
    CHECK(std::fabs(s00 / n - m0 * m0 - 2.0 / 3.0) < 0.02);
    CHECK(std::fabs(s11 / n - m1 * m1 - 2.0 / 3.0) < 0.02);
    CHECK(std::fabs(s01 / n - m0 * m1 + 1.0 / 3.0) < 0.02);
  }
  SUBCASE("indefinite precision is rejected") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(aobs::sample_mvn_from_precision(r, bad, b), aobs::error);
  }
}

}  // TEST_SUITE
