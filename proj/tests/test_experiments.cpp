#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "doctest.h"
#include "kal/experiments.hpp"

using namespace kal;

namespace {

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("KAL_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("KAL_THREADS"); }
};

ProbeSeries synthetic(std::size_t id, std::vector<double> y) {
  ProbeSeries s;
  s.id = id;
  s.radius = 1;
  for (std::size_t i = 0; i < y.size(); ++i) s.t.push_back(static_cast<double>(i));
  s.normH = std::move(y);
  return s;
}

}  // namespace

TEST_CASE("worker count and parallel_for") {
  {
    ThreadsEnv env("3");
    CHECK(worker_count() == 3);
    std::vector<int> hit(100, 0);
    parallel_for(100, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    try {
      parallel_for(10, [](std::size_t i) {
        if (i == 4 || i == 7) throw std::runtime_error("job " + std::to_string(i));
      });
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "job 4");
    }
  }
  ThreadsEnv one("1");
  CHECK(worker_count() == 1);
}

TEST_CASE("sampled initial data has the requested radius") {
  const auto spec = default_problem();
  for (double R : {1.0, 10.0}) {
    const auto s = sample_initial_state(spec, R, 42);
    CHECK(phase_norm(s, spec) == doctest::Approx(R).epsilon(1e-12));
    CHECK(s.u[31] == 0.0);
  }
  CHECK(sample_initial_state(spec, 1, 5) == sample_initial_state(spec, 1, 5));
  CHECK_FALSE(sample_initial_state(spec, 1, 5) == sample_initial_state(spec, 1, 6));
}

TEST_CASE("probe evaluation rules") {
  // enters at t = 2, leaves by more than 2% at t = 4
  const auto a = synthetic(0, {5, 3, 0.9, 1.0, 1.5, 0.5});
  const auto b = synthetic(1, {0.5, 0.4, 0.3, 0.2, 0.1, 0.1});
  const auto r = evaluate_probe({a, b}, 1.0);
  CHECK(r.entries[0].entry_time == 2.0);
  CHECK_FALSE(r.entries[0].stayed);
  CHECK(r.entries[1].entry_time == 0.0);
  CHECK(r.entries[1].stayed);
  CHECK_FALSE(r.absorbed);
  CHECK(r.max_entry_time == 2.0);

  // 1.01 is inside the 2% band
  const auto c = synthetic(2, {2, 0.9, 1.01, 0.8, 0.7, 0.6});
  CHECK(evaluate_probe({c}, 1.0).absorbed);

  const auto none = evaluate_probe({a, b}, 0.0);
  CHECK_FALSE(none.absorbed);
  CHECK_FALSE(none.max_entry_time.has_value());
  CHECK_FALSE(none.entries[1].entry_time.has_value());
}

TEST_CASE("dissipative single trajectory already inside the ball") {
  auto spec = default_problem();
  spec.h = SpectralField(32);
  NonlinearitySpec::set_zero_source(spec.nonlin);
  EnsembleSpec ens;
  ens.n_traj = 1;
  ens.radius_set = {1.0};
  ens.T_final = 2.0;
  ens.threshold_R = 1.5;
  const auto r = run_absorbing_probe(spec, StepperConfig{}, ens);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].entry_time == 0.0);
  CHECK(r.entries[0].stayed);
  CHECK(r.absorbed);
}

TEST_CASE("probe is deterministic and monotone in the threshold") {
  const auto spec = with_modes(default_problem(), 8);
  EnsembleSpec ens;
  ens.n_traj = 3;
  ens.T_final = 10.0;
  StepperConfig cfg;
  cfg.dt = 2e-3;
  ThreadsEnv env("2");
  const auto s1 = run_probe_series(spec, cfg, ens);
  const auto s2 = run_probe_series(spec, cfg, ens);
  REQUIRE(s1.size() == 6);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].normH == s2[i].normH);
  CHECK(s1[0].radius == 1.0);
  CHECK(s1[5].radius == 10.0);

  for (double R : {0.05, 0.1, 0.5, 1.0, 5.0, 50.0}) {
    const auto rep = evaluate_probe(s1, R);
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      if (!rep.entries[i].entry_time) continue;
      const auto bigger = evaluate_probe(s1, 2 * R);
      REQUIRE(bigger.entries[i].entry_time.has_value());
      CHECK(*bigger.entries[i].entry_time <= *rep.entries[i].entry_time);
    }
  }

  const auto rep = evaluate_probe(s1, INFINITY);
  double sup10 = 0;
  for (const auto& e : rep.entries)
    if (e.radius == 10.0) sup10 = std::max(sup10, e.long_time_sup);
  for (const auto& e : rep.entries)
    if (e.radius == 1.0) CHECK(e.long_time_sup <= sup10);
}

TEST_CASE("convergence study guard cases") {
  const auto spec = with_modes(default_problem(), 4);
  const auto one = run_convergence_study(spec, {1e-3}, 0.1, 1e-5);
  REQUIRE(one.size() == 1);
  CHECK_FALSE(one[0].ratio.has_value());
  CHECK(one[0].valid);

  const auto same = run_convergence_study(spec, {1e-4}, 0.1, 1e-4);
  CHECK_FALSE(same[0].valid);
  CHECK(same[0].error < 1e-4);

  CHECK_THROWS_AS(run_convergence_study(spec, {1e-3, 2e-3}, 0.1, 1e-5), std::invalid_argument);
}

TEST_CASE("convergence ratios at K = 8") {
  const auto spec = with_modes(default_problem(), 8);
  const auto rows = run_convergence_study(spec, {4e-3, 2e-3, 1e-3}, 1.0, 1e-5);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) {
    REQUIRE(rows[i].ratio.has_value());
    CHECK(*rows[i].ratio >= 1.7);
    CHECK(*rows[i].ratio <= 2.3);
  }
}
