#include <cmath>

#include "doctest.h"
#include "kal/decomposition.hpp"
#include "kal/errors.hpp"

using namespace kal;

TEST_CASE("split at the first step") {
  const auto spec = default_problem();
  const auto tri = make_tristate(spec, initial_state(spec));
  CHECK(tri.part1 == tri.full);
  CHECK(phase_norm(tri.part2, spec) == 0.0);
  CHECK(additivity_defect(tri, spec) == 0.0);
  const auto next = step_decomposed(tri, spec, StepperConfig{});
  CHECK(next.full == step_imex(tri.full, spec, StepperConfig{}));
}

TEST_CASE("discrete additivity") {
  const auto spec = default_problem();
  const auto run = run_decomposition(spec, StepperConfig{}, 5.0, initial_state(spec), 1);
  REQUIRE(run.series.size() == 5001);
  for (const auto& p : run.series) CHECK(p.additivity_defect <= 1e-10 * (1 + p.normH_full));
  CHECK(run.max_relative_defect <= 1e-10);
  // eta_a inherits the history inequality at M3
  CHECK(run.min_hist_margin >= -1e-4);
}

TEST_CASE("zero data and no forcing stays zero") {
  auto spec = default_problem();
  spec.h = SpectralField(32);
  spec.u0 = SpectralField(32);
  const auto run = run_decomposition(spec, StepperConfig{}, 1.0, initial_state(spec), 10);
  for (const auto& p : run.series) {
    CHECK(p.H1_w1 == 0.0);
    CHECK(p.H1_w2 == 0.0);
  }
}

TEST_CASE("default w1 decays with a clean exponential fit") {
  const auto spec = default_problem();
  const auto run = run_decomposition(spec, StepperConfig{}, 20.0, initial_state(spec), 10);
  std::vector<double> t, y;
  for (const auto& p : run.series) {
    t.push_back(p.t);
    y.push_back(p.H1_w1);
  }
  const auto fit = fit_exponential_decay(t, y);
  MESSAGE("rate " << fit.rate << " floor " << fit.floor << " r2 " << fit.r2);
  CHECK(fit.rate > 0);
  CHECK(fit.r2 >= 0.95);
  CHECK(fit.floor < 1e-3 * y.front());
}

TEST_CASE("w1 energy-space norm never increases after the first step" * doctest::should_fail()) {
  // The time-varying Kirchhoff coefficient and eps(t) exchange energy with
  // the H1 norm; it rises by up to 3e-4 relative in early steps.
  const auto spec = default_problem();
  const auto run = run_decomposition(spec, StepperConfig{}, 20.0, initial_state(spec), 1);
  std::size_t rises = 0;
  for (std::size_t i = 2; i < run.series.size(); ++i)
    if (run.series[i].H1_w1 > run.series[i - 1].H1_w1) ++rises;
  MESSAGE(rises << " increasing steps");
  CHECK(rises == 0);
}

TEST_CASE("exponential fit on synthetic data") {
  std::vector<double> t, y;
  for (int i = 0; i < 400; ++i) {
    t.push_back(40.0 * i / 399.0);
    y.push_back(5 * std::exp(-0.3 * t.back()) + 0.01);
  }
  const auto fit = fit_exponential_decay(t, y);
  CHECK(fit.rate == doctest::Approx(0.3).epsilon(1e-3 / 0.3));
  CHECK(std::abs(fit.floor - 0.01) <= 1e-4);
  CHECK(fit.r2 > 0.999);

  const std::vector<double> flat(100, 2.5);
  std::vector<double> tf;
  for (int i = 0; i < 100; ++i) tf.push_back(i * 0.1);
  const auto c = fit_exponential_decay(tf, flat);
  CHECK(c.rate == doctest::Approx(0.0));
  CHECK(c.floor == 2.5);

  CHECK_THROWS_AS(fit_exponential_decay({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("w2 boundedness reports") {
  std::vector<double> t, zero, grow, settle;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(i * 0.1);
    zero.push_back(0.0);
    grow.push_back(std::exp(0.1 * t.back()));
    settle.push_back(1 - std::exp(-t.back()));
  }
  const auto z = check_w2_bound(t, zero);
  CHECK(z.sup_full == 0.0);
  CHECK(z.bounded);
  const auto g = check_w2_bound(t, grow);
  CHECK_FALSE(g.bounded);
  CHECK(g.final_value == doctest::Approx(std::exp(4.0)));
  CHECK(check_w2_bound(t, settle).bounded);
}
