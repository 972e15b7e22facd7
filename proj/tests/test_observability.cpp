#include <doctest.h>

#include <aobs/error.hpp>
#include <aobs/mathfn.hpp>
#include <aobs/observability.hpp>
#include <aobs/quadrature.hpp>
#include <aobs/rng.hpp>

#include <array>
#include <cmath>

TEST_SUITE("observability") {

TEST_CASE("link functions are inverse pairs onto (0,1)") {
  for (double eta : {-8.0, -2.5, 0.0, 0.7, 8.0}) {
    const double p_logit = aobs::link_inv(aobs::Link::logit, eta);
    CHECK(p_logit > 0.0);
    CHECK(p_logit < 1.0);
    CHECK(std::log(p_logit / (1.0 - p_logit)) == doctest::Approx(eta).epsilon(1e-12));
    const double p_probit = aobs::link_inv(aobs::Link::probit, eta);
    CHECK(p_probit == doctest::Approx(aobs::normal_cdf(eta)).epsilon(1e-14));
  }
}

TEST_CASE("capture probability from symmetric half-probabilities") {
  // four lists, each hit with probability 1/2
  const std::array<double, 4> beta = {0.0, 0.0, 0.0, 0.0};
  CHECK(aobs::capture_prob(0.0, beta, aobs::Link::logit) ==
        doctest::Approx(0.9375).epsilon(1e-12));
  CHECK(aobs::capture_prob(0.0, 0.0, 4, aobs::Link::logit) ==
        doctest::Approx(0.9375).epsilon(1e-12));
}

TEST_CASE("capture probability under the probit link with uneven lists") {
  const std::array<double, 2> beta = {0.5, -0.5};
  // 1 - Phi(-0.5) Phi(0.5)
  CHECK(aobs::capture_prob(0.0, beta, aobs::Link::probit) ==
        doctest::Approx(0.786657874077103).epsilon(1e-13));
}

TEST_CASE("capture probability limits and strict monotonicity") {
  const std::array<double, 3> beta = {0.2, -0.1, 0.4};
  CHECK(aobs::capture_prob(-50.0, beta, aobs::Link::logit) < 1e-12);
  CHECK(aobs::capture_prob(50.0, beta, aobs::Link::logit) > 1.0 - 1e-12);
  CHECK(aobs::capture_prob(-50.0, beta, aobs::Link::logit) > 0.0);
  CHECK(aobs::capture_prob(50.0, beta, aobs::Link::logit) < 1.0);

  // probe only where doubles resolve the increment; far outside this band the
  // probit product saturates to the clamp values
  aobs::Rng rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const double t1 = -4.0 + 7.5 * rng.next_double();
    const double dt = 1e-3 + rng.next_double();
    for (aobs::Link link : {aobs::Link::logit, aobs::Link::probit}) {
      CHECK(aobs::capture_prob(t1, beta, link) < aobs::capture_prob(t1 + dt, beta, link));
    }
  }
}

TEST_CASE("threshold solves the capture-probability equation") {
  CHECK(std::fabs(aobs::alpha_threshold_theta(0.9375, 0.0, 4)) < 1e-10);

  // round trip over a grid of alphas, betas, list counts
  for (double alpha : {0.01, 0.1, 0.45, 0.9, 0.999}) {
    for (double beta : {-1.0, 0.0, 2.0}) {
      for (int lists : {1, 2, 4, 7}) {
        const double theta = aobs::alpha_threshold_theta(alpha, beta, lists);
        CHECK(aobs::capture_prob(theta, beta, lists, aobs::Link::logit) ==
              doctest::Approx(alpha).epsilon(1e-10));
      }
    }
  }

  // monotone toward -inf as alpha -> 0
  CHECK(aobs::alpha_threshold_theta(1e-6, 0.0, 4) < aobs::alpha_threshold_theta(1e-3, 0.0, 4));
  CHECK(aobs::alpha_threshold_theta(1e-3, 0.0, 4) < aobs::alpha_threshold_theta(0.1, 0.0, 4));
  CHECK(aobs::alpha_threshold_theta(1e-12, 0.0, 4) < -20.0);

  CHECK_THROWS_AS(aobs::alpha_threshold_theta(0.0, 0.0, 4), aobs::error);
  CHECK_THROWS_AS(aobs::alpha_threshold_theta(1.0, 0.0, 4), aobs::error);
}

TEST_CASE("threshold agrees with an independent bisection root") {
  const double alpha = 0.5, beta = 1.0;
  const int lists = 2;
  double lo = -50.0, hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (aobs::capture_prob(mid, beta, lists, aobs::Link::logit) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  CHECK(aobs::alpha_threshold_theta(alpha, beta, lists) ==
        doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
}

TEST_CASE("detection bound values and monotonicity") {
  CHECK(aobs::thm1_bound(0.0, 0.5, 1000) == 0.0);
  CHECK(aobs::thm1_bound(1.0, 1.0, 1) == 1.0);
  CHECK(aobs::thm1_bound(0.05, 0.01, 2000) ==
        doctest::Approx(0.6322125478539891).epsilon(1e-12));
  CHECK(aobs::thm1_bound(0.3, 0.2, 0) == 0.0);

  // nondecreasing in each argument
  double prev = -1.0;
  for (double a : {0.0, 0.01, 0.1, 0.5, 1.0}) {
    const double v = aobs::thm1_bound(a, 0.01, 500);
    CHECK(v >= prev);
    prev = v;
  }
  prev = -1.0;
  for (double e : {0.0, 0.005, 0.05, 0.5, 1.0}) {
    const double v = aobs::thm1_bound(0.1, e, 500);
    CHECK(v >= prev);
    prev = v;
  }
  prev = -1.0;
  for (std::int64_t n : {0, 1, 10, 1000, 100000}) {
    const double v = aobs::thm1_bound(0.1, 0.01, n);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("inverting the detection bound") {
  const double a = aobs::alpha_for_target(0.5, 0.01, 1500);
  CHECK(a == doctest::Approx(0.04619913694806632).epsilon(1e-10));
  CHECK(aobs::thm1_bound(a, 0.01, 1500) == doctest::Approx(0.5).epsilon(1e-8));

  const double a95 = aobs::alpha_for_target(0.95, 0.01, 1500);
  CHECK(a95 > 0.1);
  CHECK(a95 < 0.3);
  CHECK(aobs::thm1_bound(a95, 0.01, 1500) == doctest::Approx(0.95).epsilon(1e-8));

  CHECK_THROWS_AS(aobs::alpha_for_target(0.999999, 1e-6, 10), aobs::error);
  try {
    aobs::alpha_for_target(0.999999, 1e-6, 10);
  } catch (const aobs::error& e) {
    CHECK(e.code() == aobs::errc::unattainable_target);
  }
}

TEST_CASE("induced log-odds density collapses to the mixing density at one list") {
  auto g = [](double x) { return aobs::normal_pdf(x); };
  for (double eta : {-3.0, -0.5, 0.0, 1.7, 4.0}) {
    CHECK(aobs::induced_density_logit(eta, g, 0.0, 1) ==
          doctest::Approx(g(eta)).epsilon(1e-12));
  }
  // a nonzero common list effect only shifts the argument
  for (double eta : {-2.0, 0.3}) {
    CHECK(aobs::induced_density_logit(eta, g, 1.5, 1) ==
          doctest::Approx(g(eta - 1.5)).epsilon(1e-12));
  }
}

TEST_CASE("induced log-odds density integrates to one") {
  auto g = [](double x) { return aobs::normal_pdf(x); };
  for (int lists : {2, 4}) {
    const double total = aobs::integrate(
        [&](double eta) { return aobs::induced_density_logit(eta, g, 0.0, lists); },
        -40.0, 40.0, 1e-9, 1e-12).value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("transform jacobian approaches 1 below and 1/T above") {
  // upper-limit convergence goes like exp(-eta / lists), so scale eta with T
  for (int lists : {1, 2, 4, 7}) {
    CHECK(aobs::induced_jacobian_logit(-30.0, lists) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(aobs::induced_jacobian_logit(20.0 * lists, lists) ==
          doctest::Approx(1.0 / lists).epsilon(1e-6));
  }
  // at |eta| = 20 the ratio f*(eta)/g(theta(eta)) sits within 10% of its limits
  CHECK(aobs::induced_jacobian_logit(-20.0, 4) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(aobs::induced_jacobian_logit(20.0, 4) == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("log-odds transform inverts cleanly") {
  for (double eta : {-12.0, -2.0, 0.0, 3.3, 12.0}) {
    for (int lists : {1, 3, 6}) {
      const double theta = aobs::theta_from_eta_logit(eta, 0.4, lists);
      const double p = aobs::capture_prob(theta, 0.4, lists, aobs::Link::logit);
      CHECK(std::log(p / (1.0 - p)) == doctest::Approx(eta).epsilon(1e-8));
    }
  }
}

}  // TEST_SUITE
