#include "twostrain/gillespie.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twostrain/parallel.hpp"

namespace twostrain {

void StopRule::validate() const {
  detail::require(max_events >= 1, "StopRule: max_events must be >= 1");
  detail::require(max_time > 0.0, "StopRule: max_time must be > 0");
}

namespace detail {

void validate_competition_inputs(const ModelParams& params, const ChainState& init, const StopRule& stop) {
  params.validate();
  stop.validate();
  detail::require(init.valid_for(params.n), "initial state (" + std::to_string(init.x1) + ", " +
                                                std::to_string(init.x2) + ") invalid for n = " +
                                                std::to_string(params.n));
}

}  // namespace detail

CompetitionRun simulate_competition(const ModelParams& params, const ChainState& init, std::uint64_t seed,
                                    const StopRule& stop, std::optional<std::uint64_t> record_stride) {
  detail::validate_competition_inputs(params, init, stop);
  SplitMix64 rng(seed);
  CompetitionRun run;

  detail::CompetitionOutcome outcome;
  if (record_stride) {
    detail::require(*record_stride >= 1, "simulate_competition: record stride must be >= 1");
    Trajectory traj;
    traj.stride = *record_stride;
    std::uint64_t count = 0;
    const std::uint64_t stride = *record_stride;
    TrajectoryPoint last{};
    outcome = detail::run_competition(params, init, rng, stop, [&](double t, const ChainState& s) {
      last = {t, s.x1, s.x2};
      if (count++ % stride == 0) traj.points.push_back(last);
    });
    // The last event instant is always kept, whatever the stride.
    if (!(traj.points.back() == last)) traj.points.push_back(last);
    run.trajectory = std::move(traj);
  } else {
    outcome = detail::run_competition(params, init, rng, stop, [](double, const ChainState&) {});
  }

  run.sample = {outcome.kappa, outcome.tau, outcome.events, seed};
  run.final_state = outcome.state;
  run.final_time = outcome.time;
  return run;
}

BdRun simulate_linear_bd(double lambda, double mu, std::int64_t y0, std::uint64_t seed, const StopRule& stop) {
  detail::require(std::isfinite(lambda) && lambda >= 0.0, "simulate_linear_bd: lambda must be >= 0");
  detail::require(std::isfinite(mu) && mu > 0.0, "simulate_linear_bd: mu must be > 0");
  detail::require(y0 >= 0, "simulate_linear_bd: y0 must be >= 0");
  stop.validate();

  SplitMix64 rng(seed);
  const double birth_fraction = lambda / (lambda + mu);
  std::int64_t y = y0;
  double t = 0.0;
  std::uint64_t events = 0;
  while (y > 0) {
    if (events >= stop.max_events) return {{t, true}, events};
    const double dt = rng.exponential((lambda + mu) * static_cast<double>(y));
    if (t + dt > stop.max_time) return {{stop.max_time, true}, events};
    t += dt;
    y += rng.uniform() < birth_fraction ? 1 : -1;
    ++events;
  }
  return {{t, false}, events};
}

std::vector<ExtinctionSample> sample_extinction_times(const ModelParams& params, const ChainState& init,
                                                      std::uint64_t master_seed, std::size_t replicates,
                                                      const StopRule& stop, unsigned workers) {
  detail::require(replicates >= 1, "sample_extinction_times: replicates must be >= 1");
  detail::validate_competition_inputs(params, init, stop);
  std::vector<ExtinctionSample> out(replicates);
  parallel_for(replicates, workers, [&](std::size_t i) {
    out[i] = simulate_competition(params, init, derive_seed(master_seed, i), stop).sample;
  });
  return out;
}

std::size_t count_order_violations(const std::vector<CoupledPoint>& path) {
  return static_cast<std::size_t>(std::count_if(path.begin(), path.end(), [](const CoupledPoint& p) {
    return p.lower > p.middle || p.middle > p.upper;
  }));
}

namespace {

// Bookkeeping shared by the two coupled simulators.
class CoupledRecorder {
 public:
  CoupledRecorder(CoupledRun& run, std::uint64_t stride) : run_(run), stride_(stride) {}

  void record(double t, std::int64_t lower, std::int64_t middle, std::int64_t upper, bool check) {
    if (check && (lower > middle || middle > upper)) {
      if (run_.order_violations++ == 0) run_.first_violation_time = t;
    }
    if (count_++ % stride_ == 0) run_.path.push_back({t, lower, middle, upper});
    if (run_.lower_extinction.censored && lower == 0) run_.lower_extinction = {t, false};
    if (run_.middle_extinction.censored && middle == 0) run_.middle_extinction = {t, false};
    if (run_.upper_extinction.censored && upper == 0) run_.upper_extinction = {t, false};
  }

  void finish(double t, std::int64_t lower, std::int64_t middle, std::int64_t upper) {
    if (run_.path.empty() || run_.path.back().t < t) run_.path.push_back({t, lower, middle, upper});
    for (HittingTime* h : {&run_.lower_extinction, &run_.middle_extinction, &run_.upper_extinction}) {
      if (h->censored) h->time = t;
    }
  }

 private:
  CoupledRun& run_;
  std::uint64_t stride_;
  std::uint64_t count_ = 0;
};

// Nested-threshold coupling of three simultaneous jump channels: the chain
// with rate r fires when level < r, so any two chains fire together with
// rate min(r_a, r_b).
struct ThreeRates {
  double lower, middle, upper;
  double max() const { return std::max({lower, middle, upper}); }
};

}  // namespace

CoupledRun simulate_coupled_domination(const ModelParams& params, const ChainState& init, std::int64_t lower0,
                                       std::int64_t upper0, std::uint64_t seed, const StopRule& stop,
                                       std::uint64_t record_stride) {
  detail::validate_competition_inputs(params, init, stop);
  detail::require(record_stride >= 1, "simulate_coupled_domination: record stride must be >= 1");
  detail::require(std::abs(params.mu1 - params.mu2) <= 1e-12 * std::max(params.mu1, params.mu2),
                  "simulate_coupled_domination: requires mu1 == mu2");
  detail::require(params.lambda1 >= params.lambda2, "simulate_coupled_domination: requires lambda1 >= lambda2");
  detail::require(lower0 >= 0 && upper0 <= params.n, "simulate_coupled_domination: chains must start in [0, n]");
  detail::require(lower0 <= init.total() && init.total() <= upper0,
                  "simulate_coupled_domination: requires lower0 <= X1(0) + X2(0) <= upper0");

  const double l1 = params.lambda1, l2 = params.lambda2, mu = params.mu1;
  const std::int64_t n = params.n;
  const double inv_n = 1.0 / static_cast<double>(n);
  SplitMix64 rng(seed);

  CoupledRun run;
  CoupledRecorder rec(run, record_stride);
  std::int64_t y = lower0, x1 = init.x1, x2 = init.x2, z = upper0;
  double t = 0.0;
  rec.record(t, y, x1 + x2, z, true);

  auto logistic = [inv_n, n](std::int64_t k) {
    return static_cast<double>(k) * static_cast<double>(n - k) * inv_n;
  };

  for (;;) {
    const std::int64_t s = x1 + x2;
    const double susceptible = static_cast<double>(n - s) * inv_n;
    const double up1 = l1 * static_cast<double>(x1) * susceptible;
    const double up2 = l2 * static_cast<double>(x2) * susceptible;
    const ThreeRates up{l2 * logistic(y), up1 + up2, l1 * logistic(z)};
    const ThreeRates down{mu * static_cast<double>(y), mu * static_cast<double>(s), mu * static_cast<double>(z)};
    const double up_max = up.max();
    const double total = up_max + down.max();
    if (total <= 0.0 || run.events >= stop.max_events) break;
    const double dt = rng.exponential(total);
    if (t + dt > stop.max_time) {
      t = stop.max_time;
      break;
    }
    t += dt;
    const double u = rng.uniform() * total;
    if (u < up_max) {
      if (u < up.lower) ++y;
      if (u < up.upper) ++z;
      if (u < up.middle) {
        if (rng.uniform() * up.middle < up1) {
          ++x1;
        } else {
          ++x2;
        }
      }
    } else {
      const double level = u - up_max;
      if (level < down.lower) --y;
      if (level < down.upper) --z;
      if (level < down.middle) {
        if (rng.uniform() * static_cast<double>(s) < static_cast<double>(x1)) {
          --x1;
        } else {
          --x2;
        }
      }
    }
    ++run.events;
    rec.record(t, y, x1 + x2, z, true);
  }
  rec.finish(t, y, x1 + x2, z);
  return run;
}

SandwichRates sandwich_rates(const ModelParams& params, double eps) {
  params.validate();
  detail::require(eps > 0.0 && eps < 0.25, "sandwich: eps must lie in (0, 1/4)");
  const double n = static_cast<double>(params.n);
  const double band = std::pow(n, -eps);
  const double base = params.lambda2 * params.mu1 / params.lambda1;
  SandwichRates r;
  r.lower_birth = std::max(0.0, base - 6.0 * params.lambda2 * band);
  r.upper_birth = base + 5.0 * params.lambda2 * band;
  r.death = params.mu2;
  r.lower0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::pow(n, 0.75) - std::pow(n, 2.0 / 3.0))));
  r.upper0 = static_cast<std::int64_t>(std::ceil(std::pow(n, 0.75) + std::pow(n, 2.0 / 3.0)));
  r.band = band;
  return r;
}

CoupledRun simulate_bd_sandwich(const ModelParams& params, const ChainState& init, double eps, std::uint64_t seed,
                                const StopRule& stop, std::uint64_t record_stride,
                                std::optional<std::int64_t> lower0, std::optional<std::int64_t> upper0) {
  detail::validate_competition_inputs(params, init, stop);
  detail::require(record_stride >= 1, "simulate_bd_sandwich: record stride must be >= 1");
  detail::require(params.lambda1 > params.mu1, "simulate_bd_sandwich: requires lambda1 > mu1");
  const SandwichRates rates = sandwich_rates(params, eps);

  const double n = static_cast<double>(params.n);
  const double fixed_point = (params.lambda1 - params.mu1) / params.lambda1;
  const double x1_frac = static_cast<double>(init.x1) / n;
  const double x2_frac = static_cast<double>(init.x2) / n;
  detail::require(std::abs(x1_frac - fixed_point) <= rates.band,
                  "simulate_bd_sandwich: |x1(0) - (lambda1 - mu1)/lambda1| must be <= N^-eps");
  detail::require(std::abs(x2_frac - std::pow(n, -0.25)) <= std::pow(n, -1.0 / 3.0),
                  "simulate_bd_sandwich: |x2(0) - N^-1/4| must be <= N^-1/3");

  std::int64_t w = lower0.value_or(rates.lower0);
  std::int64_t z = upper0.value_or(rates.upper0);
  detail::require(w >= 0 && w <= init.x2 && init.x2 <= z, "simulate_bd_sandwich: requires W(0) <= X2(0) <= Z(0)");

  const double l1 = params.lambda1, m1 = params.mu1, l2 = params.lambda2, m2 = params.mu2;
  const std::int64_t nn = params.n;
  const double inv_n = 1.0 / n;
  const double x1_band = 5.0 * rates.band;
  SplitMix64 rng(seed);

  CoupledRun run;
  CoupledRecorder rec(run, record_stride);
  std::int64_t x1 = init.x1, x2 = init.x2;
  double t = 0.0;

  auto in_window = [&] {
    return std::abs(static_cast<double>(x1) * inv_n - fixed_point) <= x1_band &&
           static_cast<double>(x2) * inv_n <= rates.band;
  };
  run.window_exited = !in_window();
  if (run.window_exited) run.window_exit_time = 0.0;
  rec.record(t, w, x2, z, !run.window_exited);

  for (;;) {
    if (w == 0 && x2 == 0 && z == 0) break;
    const double susceptible = static_cast<double>(nn - x1 - x2) * inv_n;
    const double x1_up = l1 * static_cast<double>(x1) * susceptible;
    const double x1_down = m1 * static_cast<double>(x1);
    const ThreeRates up{rates.lower_birth * static_cast<double>(w), l2 * static_cast<double>(x2) * susceptible,
                        rates.upper_birth * static_cast<double>(z)};
    const ThreeRates down{m2 * static_cast<double>(w), m2 * static_cast<double>(x2), m2 * static_cast<double>(z)};
    const double up_max = up.max();
    const double coupled = up_max + down.max();
    const double total = x1_up + x1_down + coupled;
    if (total <= 0.0 || run.events >= stop.max_events) break;
    const double dt = rng.exponential(total);
    if (t + dt > stop.max_time) {
      t = stop.max_time;
      break;
    }
    t += dt;
    double u = rng.uniform() * total;
    if (u < x1_up) {
      ++x1;
    } else if (u < x1_up + x1_down) {
      --x1;
    } else {
      u = std::min(u - x1_up - x1_down, std::nextafter(coupled, 0.0));
      if (u < up_max) {
        if (u < up.lower) ++w;
        if (u < up.middle) ++x2;
        if (u < up.upper) ++z;
      } else {
        const double level = u - up_max;
        if (level < down.lower) --w;
        if (level < down.middle) --x2;
        if (level < down.upper) --z;
      }
    }
    ++run.events;
    if (!run.window_exited && !in_window()) {
      run.window_exited = true;
      run.window_exit_time = t;
    }
    rec.record(t, w, x2, z, !run.window_exited);
  }
  rec.finish(t, w, x2, z);
  return run;
}

}  // namespace twostrain
