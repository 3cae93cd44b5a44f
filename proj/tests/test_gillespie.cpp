#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "twostrain/gillespie.hpp"
#include "twostrain/stats.hpp"

using namespace twostrain;

namespace {

const ModelParams kThm2{1.5, 1.0, 1.2, 1.0, 5000};

StopRule kappa_stop() {
  StopRule s;
  s.stop_on_kappa = true;
  return s;
}

StopRule one_event() {
  StopRule s;
  s.max_events = 1;
  s.stop_on_kappa = false;
  return s;
}

}  // namespace

TEST_SUITE("gillespie") {
  TEST_CASE("stop rule validation") {
    StopRule s;
    CHECK_NOTHROW(s.validate());
    s.max_events = 0;
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    s = {};
    s.max_time = 0.0;
    CHECK_THROWS_AS(s.validate(), PreconditionError);
  }

  TEST_CASE("invalid initial state is rejected") {
    CHECK_THROWS_AS(simulate_competition(kThm2, {4000, 2000}, 1, kappa_stop()), PreconditionError);
    CHECK_THROWS_AS(simulate_competition(kThm2, {-1, 2}, 1, kappa_stop()), PreconditionError);
  }

  TEST_CASE("determinism: same seed gives a bit-identical trajectory") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 300};
    const auto a = simulate_competition(p, {100, 100}, 42, kappa_stop(), 1);
    const auto b = simulate_competition(p, {100, 100}, 42, kappa_stop(), 1);
    REQUIRE(a.trajectory.has_value());
    CHECK(*a.trajectory == *b.trajectory);
    CHECK(a.sample == b.sample);
    const auto c = simulate_competition(p, {100, 100}, 43, kappa_stop(), 1);
    CHECK_FALSE(*a.trajectory == *c.trajectory);
  }

  TEST_CASE("trajectory: increasing times and unit steps") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 200};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto run = simulate_competition(p, {60, 60}, seed, kappa_stop(), 1);
      const auto& pts = run.trajectory->points;
      REQUIRE(pts.front() == TrajectoryPoint{0.0, 60, 60});
      REQUIRE(pts.size() == run.sample.events + 1);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        REQUIRE(pts[i].t > pts[i - 1].t);
        REQUIRE(std::abs(pts[i].x1 - pts[i - 1].x1) + std::abs(pts[i].x2 - pts[i - 1].x2) == 1);
      }
      REQUIRE(pts.back().x2 == 0);
      REQUIRE(pts.back().t == run.sample.kappa.time);
    }
  }

  TEST_CASE("trajectory thinning keeps exact extinction time and endpoints") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 200};
    const auto full = simulate_competition(p, {60, 60}, 9, kappa_stop(), 1);
    const auto thin = simulate_competition(p, {60, 60}, 9, kappa_stop(), 7);
    CHECK(full.sample == thin.sample);
    const auto& t = thin.trajectory->points;
    CHECK(t.front() == full.trajectory->points.front());
    CHECK(t.back() == full.trajectory->points.back());
    CHECK(t.size() <= full.trajectory->points.size() / 7 + 2);
  }

  TEST_CASE("strain 2 absent: kappa = 0") {
    const auto run = simulate_competition(kThm2, {1500, 0}, 5, kappa_stop());
    CHECK(run.sample.kappa == HittingTime{0.0, false});
    CHECK(run.sample.events == 0);
  }

  TEST_CASE("absorbing state: nothing happens") {
    StopRule s;
    s.stop_on_kappa = false;
    const auto run = simulate_competition(kThm2, {0, 0}, 5, s);
    CHECK(run.sample.events == 0);
    CHECK_FALSE(run.sample.kappa.censored);
    CHECK_FALSE(run.sample.tau.censored);
  }

  TEST_CASE("caps censor, never truncate silently") {
    StopRule s;
    s.max_events = 50;
    const auto run = simulate_competition(kThm2, {1500, 1500}, 3, s);
    CHECK(run.sample.events == 50);
    CHECK(run.sample.kappa.censored);
    CHECK(run.sample.tau.censored);
    CHECK(run.sample.kappa.time == run.final_time);

    StopRule st;
    st.max_time = 0.5;
    const auto r2 = simulate_competition(kThm2, {1500, 1500}, 3, st);
    CHECK(r2.sample.kappa.censored);
    CHECK(r2.sample.kappa.time == 0.5);
    CHECK(r2.final_time == 0.5);
  }

  TEST_CASE("exactness: next-event frequencies match the rate table (chi-square)") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 10};
    const ChainState s{3, 2};
    const RateQuad q = transition_rates(p, s);
    const std::array<double, 4> prob{q.up1 / q.total(), q.down1 / q.total(), q.up2 / q.total(), q.down2 / q.total()};
    std::array<double, 4> counts{};
    const int draws = 40000;
    SampleSet holding;
    for (int i = 0; i < draws; ++i) {
      const auto run = simulate_competition(p, s, derive_seed(77, static_cast<std::uint64_t>(i)), one_event());
      const ChainState f = run.final_state;
      if (f.x1 == 4) counts[0] += 1;
      else if (f.x1 == 2) counts[1] += 1;
      else if (f.x2 == 3) counts[2] += 1;
      else if (f.x2 == 1) counts[3] += 1;
      holding.values.push_back(run.final_time);
    }
    double chi2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double e = prob[k] * draws;
      chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    // 3 degrees of freedom, upper 0.001 point.
    CHECK(chi2 < 16.27);

    // Holding times are Exp(total rate).
    const double d = ks_distance(holding, ExponentialLaw{1.0 / q.total()});
    CHECK(d < ks_critical_value(holding.values.size(), 0.001));
  }

  TEST_CASE("linear BD: pure death is Exp(mu)") {
    StopRule s;
    SampleSet t;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const BdRun r = simulate_linear_bd(0.0, 1.0, 1, derive_seed(5, i), s);
      REQUIRE_FALSE(r.extinction.censored);
      REQUIRE(r.events == 1);
      t.values.push_back(r.extinction.time);
    }
    const auto st = summary_stats(t);
    CHECK(std::abs(st.mean - 1.0) < 0.03);
    CHECK(ks_distance(t, ExponentialLaw{1.0}) < ks_critical_value(10000, 0.001));
  }

  TEST_CASE("linear BD: subcritical chain matches the closed-form CDF") {
    StopRule s;
    SampleSet t;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      t.values.push_back(simulate_linear_bd(0.8, 1.0, 100, derive_seed(6, i), s).extinction.time);
    }
    CHECK(ks_distance(t, BdParams{0.8, 1.0, 100}) <= 0.02);
  }

  TEST_CASE("linear BD: determinism, censoring and preconditions") {
    StopRule s;
    const BdRun a = simulate_linear_bd(0.8, 1.0, 50, 123, s);
    const BdRun b = simulate_linear_bd(0.8, 1.0, 50, 123, s);
    CHECK(a.extinction == b.extinction);
    CHECK(a.events == b.events);
    s.max_events = 3;
    const BdRun c = simulate_linear_bd(0.8, 1.0, 50, 123, s);
    CHECK(c.extinction.censored);
    CHECK(c.events == 3);
    CHECK(simulate_linear_bd(0.8, 1.0, 0, 1, StopRule{}).extinction == HittingTime{0.0, false});
    CHECK_THROWS_AS(simulate_linear_bd(-0.1, 1.0, 1, 1, StopRule{}), PreconditionError);
    CHECK_THROWS_AS(simulate_linear_bd(0.5, 0.0, 1, 1, StopRule{}), PreconditionError);
    CHECK_THROWS_AS(simulate_linear_bd(0.5, 1.0, -1, 1, StopRule{}), PreconditionError);
  }

  TEST_CASE("batch: schedule independence and consistency with single runs") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 400};
    const auto serial = sample_extinction_times(p, {120, 120}, 99, 12, kappa_stop(), 1);
    const auto parallel = sample_extinction_times(p, {120, 120}, 99, 12, kappa_stop(), 4);
    CHECK(serial == parallel);
    const auto one = sample_extinction_times(p, {120, 120}, 99, 1, kappa_stop(), 1);
    const auto direct = simulate_competition(p, {120, 120}, derive_seed(99, 0), kappa_stop());
    CHECK(one.front() == direct.sample);
    CHECK(serial.front() == direct.sample);
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].seed == derive_seed(99, i));
    CHECK_THROWS_AS(sample_extinction_times(p, {120, 120}, 99, 0, kappa_stop(), 1), PreconditionError);
  }

  TEST_CASE("kappa mean at N = 5000 is near the predicted 31.83") {
    // 200 replicates; standard error about 6.4 / sqrt(200) = 0.45.
    const auto s = sample_extinction_times(kThm2, {1500, 1500}, 2024, 200, kappa_stop(), 0);
    const auto st = summary_stats(kappa_samples(s));
    CHECK(st.censored == 0);
    CHECK(std::abs(st.mean - 31.826432760419975) < 1.5);
  }

  TEST_CASE("domination coupling: ordering at every event") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 500};
    StopRule s;
    s.stop_on_kappa = false;
    s.max_time = 40.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const CoupledRun run = simulate_coupled_domination(p, {100, 100}, 200, 200, seed, s);
      CHECK(run.order_violations == 0);
      CHECK(count_order_violations(run.path) == 0);
      // Every event plus t = 0, plus the censoring instant if max_time cut the run.
      CHECK(run.path.size() == run.events + 1 + (run.path.back().t == s.max_time ? 1 : 0));
    }
  }

  TEST_CASE("domination coupling: degenerate equal rates and absorbing lower chain") {
    StopRule s;
    s.stop_on_kappa = false;
    s.max_time = 30.0;
    const ModelParams eq{1.3, 1.0, 1.3, 1.0, 300};
    const CoupledRun a = simulate_coupled_domination(eq, {50, 50}, 100, 100, 4, s);
    CHECK(a.order_violations == 0);
    // Equal rates and equal starts: lower and upper move together.
    for (const auto& pt : a.path) REQUIRE(pt.lower == pt.upper);

    const ModelParams p{1.5, 1.0, 1.2, 1.0, 300};
    const CoupledRun b = simulate_coupled_domination(p, {50, 50}, 0, 100, 4, s);
    CHECK(b.order_violations == 0);
    for (const auto& pt : b.path) REQUIRE(pt.lower == 0);
  }

  TEST_CASE("domination coupling: preconditions") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 300};
    CHECK_THROWS_AS(simulate_coupled_domination(p, {50, 50}, 101, 200, 1, StopRule{}), PreconditionError);
    CHECK_THROWS_AS(simulate_coupled_domination(p, {50, 50}, 0, 99, 1, StopRule{}), PreconditionError);
    CHECK_THROWS_AS(simulate_coupled_domination({1.5, 1.0, 1.2, 0.9, 300}, {50, 50}, 0, 100, 1, StopRule{}),
                    PreconditionError);
    CHECK_THROWS_AS(simulate_coupled_domination({1.2, 1.0, 1.5, 1.0, 300}, {50, 50}, 0, 100, 1, StopRule{}),
                    PreconditionError);
  }

  TEST_CASE("sandwich: rates and initial bracket") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 100000};
    const SandwichRates r = sandwich_rates(p, 0.2);
    const double band = std::pow(1e5, -0.2);
    CHECK(r.band == doctest::Approx(band).epsilon(1e-14));
    CHECK(r.lower_birth == doctest::Approx(std::max(0.0, 0.8 - 7.2 * band)));
    CHECK(r.upper_birth == doctest::Approx(0.8 + 6.0 * band));
    CHECK(r.death == 1.0);
    CHECK(r.lower0 == 3468);  // floor(5623.41 - 2154.43)
    CHECK(r.upper0 == 7778);  // ceil(5623.41 + 2154.43)
    CHECK_THROWS_AS(sandwich_rates(p, 0.0), PreconditionError);
    CHECK_THROWS_AS(sandwich_rates(p, 0.25), PreconditionError);
  }

  TEST_CASE("sandwich: ordering holds while inside the window") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 100000};
    StopRule s;
    s.stop_on_kappa = false;
    // At this N the upper chain is supercritical (N^-eps is not small), so
    // the horizon stays short.
    s.max_time = 3.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const CoupledRun run = simulate_bd_sandwich(p, {33333, 5623}, 0.1, seed, s, 50);
      CHECK(run.order_violations == 0);
      if (!run.window_exited) CHECK(count_order_violations(run.path) == 0);
    }
  }

  TEST_CASE("sandwich: W started at 0 and preconditions") {
    const ModelParams p{1.5, 1.0, 1.2, 1.0, 100000};
    StopRule s;
    s.stop_on_kappa = false;
    s.max_time = 1.0;
    const CoupledRun run = simulate_bd_sandwich(p, {33333, 5623}, 0.1, 8, s, 1, 0);
    CHECK(run.order_violations == 0);
    CHECK(run.lower_extinction == HittingTime{0.0, false});
    for (const auto& pt : run.path) REQUIRE(pt.lower == 0);
    CHECK_THROWS_AS(simulate_bd_sandwich(p, {33333, 5623}, 0.3, 1, s), PreconditionError);
    CHECK_THROWS_AS(simulate_bd_sandwich(p, {33333, 5623}, 0.0, 1, s), PreconditionError);
    CHECK_THROWS_AS(simulate_bd_sandwich(p, {80000, 5623}, 0.1, 1, s), PreconditionError);
    CHECK_THROWS_AS(simulate_bd_sandwich(p, {33333, 20000}, 0.1, 1, s), PreconditionError);
  }
}
