#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include <doctest.h>

#include "aobs/capture_data.hpp"
#include "aobs/error.hpp"
#include "aobs/loglinear.hpp"
#include "aobs/rng.hpp"
#include "aobs/scenario.hpp"

TEST_SUITE_BEGIN("loglinear");

namespace {

std::string data_dir() {
  if (const char* d = std::getenv("AOBS_DATA_DIR")) return d;
  return AOBS_DATA_DIR;
}

aobs::CaptureDataset hares() { return aobs::load_hares(data_dir() + "/hares.csv"); }

aobs::CaptureDataset from_cells(int lists, const std::vector<std::pair<std::uint32_t, int>>& spec) {
  std::vector<aobs::CaptureHistory> rows;
  for (const auto& [bits, count] : spec)
    for (int i = 0; i < count; ++i) rows.push_back({bits, lists});
  return aobs::CaptureDataset(lists, std::move(rows));
}

template <class Fn>
aobs::errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const aobs::error& e) {
    return e.code();
  }
  REQUIRE(false);
  return aobs::errc::empty_input;
}

}  // namespace

TEST_CASE("heterogeneity columns take their defining values") {
  using F = aobs::LogLinearFamily;
  for (F fam : {F::darroch, F::indirect_poisson, F::indirect_gamma, F::homogeneous})
    CHECK(aobs::h_value(fam, 0) == doctest::Approx(0.0).epsilon(1e-15));

  CHECK(aobs::h_value(F::darroch, 1) == doctest::Approx(0.5));
  CHECK(aobs::h_value(F::darroch, 3) == doctest::Approx(4.5));
  CHECK(aobs::h_value(F::indirect_poisson, 1) == doctest::Approx(1.0));
  CHECK(aobs::h_value(F::indirect_poisson, 2) == doctest::Approx(3.0));
  CHECK(aobs::h_value(F::indirect_poisson, 3) == doctest::Approx(7.0));
  CHECK(aobs::h_value(F::indirect_gamma, 1) ==
        doctest::Approx(-0.25131442828090605).epsilon(1e-12));
  CHECK(aobs::h_value(F::indirect_gamma, 2) ==
        doctest::Approx(-0.45198512374305727).epsilon(1e-12));
  CHECK(aobs::h_value(F::homogeneous, 5) == 0.0);

  for (F fam : {F::darroch, F::indirect_poisson, F::indirect_gamma, F::homogeneous})
    CHECK(aobs::family_by_name(aobs::family_name(fam)) == fam);
  CHECK(code_of([] { (void)aobs::family_by_name("cauchy"); }) == aobs::errc::config_error);
}

TEST_CASE("the design enumerates observable cells with list indicators") {
  const auto spec = aobs::build_design(2, aobs::LogLinearFamily::darroch);
  CHECK(spec.cells == std::vector<std::uint32_t>{1, 2, 3});
  REQUIRE(spec.design.rows() == 3);
  REQUIRE(spec.design.cols() == 4);
  CHECK(spec.h_column == 3);
  // row per cell: intercept, list 1 flag, list 2 flag, h(captures)
  const double want[3][4] = {{1, 1, 0, 0.5}, {1, 0, 1, 0.5}, {1, 1, 1, 2.0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) CHECK(spec.design(r, c) == doctest::Approx(want[r][c]));

  const auto flat = aobs::build_design(3, aobs::LogLinearFamily::homogeneous);
  CHECK(flat.h_column == -1);
  CHECK(flat.design.cols() == 4);
  CHECK(flat.design.rows() == 7);
  CHECK(flat.cells.size() == 7);

  CHECK_THROWS_AS((void)aobs::build_design(0, aobs::LogLinearFamily::darroch), aobs::error);
  CHECK_THROWS_AS((void)aobs::build_design(21, aobs::LogLinearFamily::darroch), aobs::error);
}

TEST_CASE("a saturated two-list fit reproduces the classical closed form") {
  const auto data = from_cells(2, {{0b01, 5}, {0b10, 7}, {0b11, 3}});
  const auto spec = aobs::build_design(2, aobs::LogLinearFamily::homogeneous);
  const auto fit = aobs::fit_loglinear(spec, data);

  CHECK(fit.m == 15);
  CHECK(fit.final_grad_norm < 1e-8);
  // saturated model: fitted means equal the observed counts
  CHECK(fit.fitted(0) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(fit.fitted(1) == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(fit.fitted(2) == doctest::Approx(3.0).epsilon(1e-6));
  // zero cell extrapolates to (5 * 7) / 3
  CHECK(fit.n_hat == doctest::Approx(15.0 + 35.0 / 3.0).epsilon(1e-6));
  CHECK(fit.ci_lo < fit.n_hat);
  CHECK(fit.ci_hi > fit.n_hat);
  CHECK(fit.ci_lo >= 15.0);
  CHECK_THROWS_AS((void)fit.tau(), aobs::error);
}

TEST_CASE("every family balances the observed total on real data") {
  const auto data = hares();
  using F = aobs::LogLinearFamily;
  for (F fam : {F::darroch, F::indirect_poisson, F::indirect_gamma, F::homogeneous}) {
    const auto fit = aobs::fit_loglinear(aobs::build_design(6, fam), data);
    CHECK(fit.iterations < 100);
    CHECK(fit.final_grad_norm < 1e-8);
    // Poisson likelihood with an intercept matches the total by stationarity
    CHECK(fit.fitted.sum() == doctest::Approx(68.0).epsilon(1e-9));
    for (Eigen::Index r = 0; r < fit.fitted.size(); ++r) CHECK(fit.fitted(r) > 0.0);
    for (Eigen::Index j = 0; j < fit.cov.rows(); ++j) CHECK(fit.cov(j, j) > 0.0);
    CHECK(fit.n_hat > 68.0);
    CHECK(fit.ci_hi > fit.n_hat);
    CHECK(fit.ci_lo > 68.0);
    CHECK(fit.ci_lo < fit.n_hat);
    if (fam != F::homogeneous) CHECK(fit.tau() == doctest::Approx(fit.coef(fit.coef.size() - 1)));
  }
}

TEST_CASE("equal catchability data recovers its homogeneous truth") {
  aobs::MixingScenario sc;
  sc.kind = aobs::ScenarioKind::atoms;
  sc.means = {0.0};
  sc.weights = {1.0};
  sc.lists = 4;
  sc.list_effect = 0.0;

  aobs::Rng rng(401, 0);
  const auto pop = aobs::simulate_population(rng, sc, 10'000, aobs::Link::logit);
  const auto fit =
      aobs::fit_loglinear(aobs::build_design(4, aobs::LogLinearFamily::homogeneous),
                          pop.observed_dataset());
  // every list is a fair coin: list effects vanish, the zero cell holds N/16
  for (int t = 1; t <= 4; ++t) CHECK(std::fabs(fit.coef(t)) < 0.1);
  CHECK(std::fabs(fit.n_hat - 10'000.0) < 300.0);
  CHECK(fit.ci_lo < 10'000.0);
  CHECK(fit.ci_hi > 10'000.0);
}

TEST_CASE("matched-model intervals cover the truth at their nominal rate") {
  const auto sc = aobs::MixingScenario::preset(1);
  const auto spec = aobs::build_design(4, aobs::LogLinearFamily::darroch);
  const std::int64_t n = 2000;
  int covered = 0, failures = 0;
  const int reps = 200;
  aobs::Rng rng(402, 0);
  for (int r = 0; r < reps; ++r) {
    const auto pop = aobs::simulate_population(rng, sc, n, aobs::Link::logit);
    try {
      const auto fit = aobs::fit_loglinear(spec, pop.observed_dataset());
      if (fit.ci_lo <= static_cast<double>(n) && static_cast<double>(n) <= fit.ci_hi) ++covered;
    } catch (const aobs::error&) {
      ++failures;
    }
  }
  CHECK(failures <= 2);
  const double coverage = static_cast<double>(covered) / static_cast<double>(reps - failures);
  CHECK(coverage >= 0.88);
  CHECK(coverage <= 1.0);
}

TEST_CASE("parametric threshold counts interpolate between N-hat and zero") {
  const auto data = hares();
  using F = aobs::LogLinearFamily;
  for (F fam : {F::darroch, F::indirect_poisson, F::indirect_gamma}) {
    const auto fit = aobs::fit_loglinear(aobs::build_design(6, fam), data);
    CHECK(aobs::estimate_n_alpha_parametric(fit, 0.0) == doctest::Approx(fit.n_hat));
    CHECK(aobs::estimate_n_alpha_parametric(fit, 1.0) == 0.0);
    double prev = fit.n_hat + 1.0;
    for (double a : {0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.45, 0.7, 0.9}) {
      const double cur = aobs::estimate_n_alpha_parametric(fit, a);
      CHECK(cur >= 0.0);
      CHECK(cur <= prev * (1.0 + 1e-9));
      prev = cur;
    }
    CHECK_THROWS_AS((void)aobs::estimate_n_alpha_parametric(fit, -0.1), aobs::error);
    CHECK_THROWS_AS((void)aobs::estimate_n_alpha_parametric(fit, 1.1), aobs::error);
  }

  // homogeneous: all-or-nothing at the single capture probability
  const auto flat = aobs::fit_loglinear(aobs::build_design(6, F::homogeneous), data);
  std::vector<double> beta(6);
  for (int t = 0; t < 6; ++t) beta[static_cast<std::size_t>(t)] = flat.coef(1 + t);
  const double p0 = aobs::capture_prob(0.0, beta, aobs::Link::logit);
  CHECK(aobs::estimate_n_alpha_parametric(flat, p0 * 0.9) == doctest::Approx(flat.n_hat));
  CHECK(aobs::estimate_n_alpha_parametric(flat, std::min(0.999, p0 * 1.1)) == 0.0);
}

TEST_CASE("matched-model threshold counts land near the simulated truth") {
  const auto sc = aobs::MixingScenario::preset(1);
  const auto spec = aobs::build_design(4, aobs::LogLinearFamily::darroch);
  aobs::Rng rng(403, 0);
  std::vector<double> rel_err;
  for (int r = 0; r < 20; ++r) {
    const auto pop = aobs::simulate_population(rng, sc, 2000, aobs::Link::logit);
    const auto fit = aobs::fit_loglinear(spec, pop.observed_dataset());
    const double est = aobs::estimate_n_alpha_parametric(fit, 0.1);
    const double truth = static_cast<double>(aobs::true_n_alpha(pop, 0.1));
    rel_err.push_back(std::fabs(est - truth) / truth);
  }
  std::sort(rel_err.begin(), rel_err.end());
  const double median = 0.5 * (rel_err[9] + rel_err[10]);
  CHECK(median < 0.10);
}

TEST_CASE("underdetermined tables are rejected rather than fit") {
  // one occupied cell cannot support three parameters
  const auto lonely = from_cells(2, {{0b11, 9}});
  CHECK(code_of([&] {
          (void)aobs::fit_loglinear(
              aobs::build_design(2, aobs::LogLinearFamily::homogeneous), lonely);
        }) == aobs::errc::non_convergence);

  // the indirect families add a fourth parameter over three cells
  const auto full = from_cells(2, {{0b01, 5}, {0b10, 7}, {0b11, 3}});
  CHECK(code_of([&] {
          (void)aobs::fit_loglinear(aobs::build_design(2, aobs::LogLinearFamily::darroch),
                                    full);
        }) == aobs::errc::non_convergence);

  // design and data disagree on the number of lists
  CHECK(code_of([&] {
          (void)aobs::fit_loglinear(aobs::build_design(3, aobs::LogLinearFamily::darroch),
                                    full);
        }) == aobs::errc::fixture_shape_mismatch);
}

TEST_SUITE_END();
