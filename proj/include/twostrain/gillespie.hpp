#pragma once

// Exact (direct-method) simulation of the competition chain, of linear
// birth-death chains, and of the two coupling constructions used to compare
// the competition chain with simpler chains path by path.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "twostrain/errors.hpp"
#include "twostrain/model.hpp"
#include "twostrain/rng.hpp"

namespace twostrain {

struct StopRule {
  std::uint64_t max_events = 1'000'000'000ULL;
  double max_time = 1e7;
  bool stop_on_kappa = true;       // halt when X2 first hits 0
  bool stop_on_absorption = true;  // halt when X1 = X2 = 0

  void validate() const;

  friend bool operator==(const StopRule&, const StopRule&) = default;
};

/// A first-passage time. When censored, `time` is the time the run stopped
/// at, i.e. a lower bound on the true hitting time.
struct HittingTime {
  double time = 0.0;
  bool censored = true;

  friend bool operator==(const HittingTime&, const HittingTime&) = default;
};

struct ExtinctionSample {
  HittingTime kappa;  // strain 2 extinct
  HittingTime tau;    // strain 1 extinct
  std::uint64_t events = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ExtinctionSample&, const ExtinctionSample&) = default;
};

struct TrajectoryPoint {
  double t;
  std::int64_t x1;
  std::int64_t x2;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Event-instant states. With stride k only every k-th event is kept; the
/// initial and final states are always present.
struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::uint64_t stride = 1;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct CompetitionRun {
  ExtinctionSample sample;
  std::optional<Trajectory> trajectory;
  ChainState final_state;
  double final_time = 0.0;
};

/// Exact simulation of the competition chain. `record_stride` enables
/// trajectory recording. Deterministic in (params, init, seed, stop).
CompetitionRun simulate_competition(const ModelParams& params, const ChainState& init, std::uint64_t seed,
                                    const StopRule& stop, std::optional<std::uint64_t> record_stride = {});

struct BdRun {
  HittingTime extinction;
  std::uint64_t events = 0;
};

/// Linear birth-death chain with per-head birth `lambda` and death `mu`.
BdRun simulate_linear_bd(double lambda, double mu, std::int64_t y0, std::uint64_t seed, const StopRule& stop);

/// Batch of competition runs; replicate i uses derive_seed(master_seed, i).
/// Output order is by replicate index for any worker count (0 = all cores).
std::vector<ExtinctionSample> sample_extinction_times(const ModelParams& params, const ChainState& init,
                                                      std::uint64_t master_seed, std::size_t replicates,
                                                      const StopRule& stop, unsigned workers = 0);

struct CoupledPoint {
  double t;
  std::int64_t lower;
  std::int64_t middle;
  std::int64_t upper;
};

/// Three chains on one probability space. Orderings lower <= middle <= upper
/// are checked after every event by the simulator itself; `path` holds
/// every stride-th event for independent inspection.
struct CoupledRun {
  std::vector<CoupledPoint> path;
  std::uint64_t events = 0;
  std::uint64_t order_violations = 0;
  std::optional<double> first_violation_time;
  HittingTime lower_extinction;
  HittingTime middle_extinction;
  HittingTime upper_extinction;
  // Sandwich only: whether strain 1 left its band around the fixed point
  // (after which the ordering is no longer guaranteed and is not counted).
  bool window_exited = false;
  std::optional<double> window_exit_time;
};

/// Total-count domination coupling. lower ~ SIS(lambda2, mu), middle =
/// X1 + X2, upper ~ SIS(lambda1, mu). Requires mu1 == mu2 == mu and
/// lambda1 >= lambda2. Chains share one event clock and jump together as
/// much as their rates allow.
CoupledRun simulate_coupled_domination(const ModelParams& params, const ChainState& init, std::int64_t lower0,
                                       std::int64_t upper0, std::uint64_t seed, const StopRule& stop,
                                       std::uint64_t record_stride = 1);

struct SandwichRates {
  double lower_birth;  // lambda2 mu1 / lambda1 - 6 lambda2 N^-eps, floored at 0
  double upper_birth;  // lambda2 mu1 / lambda1 + 5 lambda2 N^-eps
  double death;        // mu2
  std::int64_t lower0;  // floor(N^3/4 - N^2/3)
  std::int64_t upper0;  // ceil(N^3/4 + N^2/3)
  double band;          // N^-eps
};

SandwichRates sandwich_rates(const ModelParams& params, double eps);

/// Final-phase coupling W <= X2 <= Z of strain 2 between two linear
/// birth-death chains, valid while X1 stays within 5 N^-eps of its fixed
/// point and x2 <= N^-eps. The initial state must satisfy
/// |x1 - (l1 - m1)/l1| <= N^-eps and |x2 - N^-1/4| <= N^-1/3.
/// `lower0` / `upper0` override the default W(0), Z(0).
CoupledRun simulate_bd_sandwich(const ModelParams& params, const ChainState& init, double eps, std::uint64_t seed,
                                const StopRule& stop, std::uint64_t record_stride = 1,
                                std::optional<std::int64_t> lower0 = {}, std::optional<std::int64_t> upper0 = {});

/// Counts points of a recorded coupled path violating lower <= middle <= upper.
std::size_t count_order_violations(const std::vector<CoupledPoint>& path);

namespace detail {

struct CompetitionOutcome {
  ChainState state;
  double time = 0.0;
  std::uint64_t events = 0;
  HittingTime kappa;
  HittingTime tau;
};

/// Direct-method loop. `observe(t, state)` is called at t = 0 and after
/// every event with the post-jump state.
template <class Observer>
CompetitionOutcome run_competition(const ModelParams& params, ChainState state, SplitMix64& rng, const StopRule& stop,
                                   Observer&& observe) {
  CompetitionOutcome out;
  double t = 0.0;
  std::uint64_t events = 0;
  HittingTime kappa{0.0, state.x2 != 0};
  HittingTime tau{0.0, state.x1 != 0};
  const double inv_n = 1.0 / static_cast<double>(params.n);
  const double l1 = params.lambda1, m1 = params.mu1, l2 = params.lambda2, m2 = params.mu2;
  observe(t, state);

  for (;;) {
    if (stop.stop_on_kappa && !kappa.censored) break;
    if (stop.stop_on_absorption && !kappa.censored && !tau.censored) break;
    const double s = static_cast<double>(params.n - state.x1 - state.x2) * inv_n;
    const double x1 = static_cast<double>(state.x1);
    const double x2 = static_cast<double>(state.x2);
    const double c1 = l1 * x1 * s;
    const double c2 = c1 + m1 * x1;
    const double c3 = c2 + l2 * x2 * s;
    const double down2 = m2 * x2;
    const double total = c3 + down2;
    if (total <= 0.0) break;  // absorbed
    if (events >= stop.max_events) break;
    const double dt = rng.exponential(total);
    if (t + dt > stop.max_time) {
      t = stop.max_time;
      break;
    }
    t += dt;
    const double u = rng.uniform() * total;
    if (u < c1) {
      ++state.x1;
    } else if (u < c2) {
      --state.x1;
    } else if (u < c3) {
      ++state.x2;
    } else if (down2 > 0.0) {
      --state.x2;
    } else if (c3 > c2) {  // u rounded up to total; take the last live channel
      ++state.x2;
    } else if (c2 > c1) {
      --state.x1;
    } else {
      ++state.x1;
    }
    ++events;
    if (kappa.censored && state.x2 == 0) kappa = {t, false};
    if (tau.censored && state.x1 == 0) tau = {t, false};
    observe(t, state);
  }

  if (kappa.censored) kappa.time = t;
  if (tau.censored) tau.time = t;
  out.state = state;
  out.time = t;
  out.events = events;
  out.kappa = kappa;
  out.tau = tau;
  return out;
}

void validate_competition_inputs(const ModelParams& params, const ChainState& init, const StopRule& stop);

}  // namespace detail
}  // namespace twostrain
