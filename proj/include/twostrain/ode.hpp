#pragma once

// Embedded Runge-Kutta 5(4) of Dormand and Prince with Shampine's
// fourth-order continuous extension (the "dopri5" tableau).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twostrain/errors.hpp"

namespace twostrain {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 picks a step from the derivative scale
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
};

/// Piecewise polynomial solution of an ODE over [t_begin, t_end]. Each
/// accepted step keeps the five coefficient vectors of the interpolant.
template <typename Scalar, int Dim>
class DenseSolution {
 public:
  using State = Eigen::Matrix<Scalar, Dim, 1>;

  struct Segment {
    Scalar t0;
    Scalar h;
    State r1, r2, r3, r4, r5;

    State operator()(Scalar t) const {
      const Scalar theta = (t - t0) / h;
      const Scalar theta1 = Scalar(1) - theta;
      return r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
    }
  };

  DenseSolution() = default;
  DenseSolution(Scalar t0, const State& y0) : t_begin_(t0), t_end_(t0), y_begin_(y0), y_end_(y0) {}

  Scalar t_begin() const { return t_begin_; }
  Scalar t_end() const { return t_end_; }
  const State& front() const { return y_begin_; }
  const State& back() const { return y_end_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Accepted step boundaries, t_begin first.
  std::vector<Scalar> knots() const {
    std::vector<Scalar> ts{t_begin_};
    for (const auto& s : segments_) ts.push_back(s.t0 + s.h);
    return ts;
  }

  State operator()(Scalar t) const {
    if (!(t >= t_begin_ && t <= t_end_)) {
      throw PreconditionError("DenseSolution: t = " + std::to_string(static_cast<double>(t)) +
                              " outside the integrated interval");
    }
    if (segments_.empty() || t == t_begin_) return y_begin_;
    if (t == t_end_) return y_end_;
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](Scalar v, const Segment& s) { return v < s.t0; });
    return (*std::prev(it))(t);
  }

  void push(Segment seg, const State& y_new) {
    t_end_ = seg.t0 + seg.h;
    y_end_ = y_new;
    segments_.push_back(std::move(seg));
  }

 private:
  Scalar t_begin_{0};
  Scalar t_end_{0};
  State y_begin_{State::Zero()};
  State y_end_{State::Zero()};
  std::vector<Segment> segments_;
};

namespace dopri {

// Butcher tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output.
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace dopri

/// Integrates y' = f(t, y) from t0 to t_end (t_end >= t0). `stop`, when
/// given, is evaluated after each accepted step and ends integration early
/// when it returns true.
template <typename Scalar, int Dim, class Rhs>
DenseSolution<Scalar, Dim> integrate_dopri5(
    Rhs&& f, Scalar t0, const Eigen::Matrix<Scalar, Dim, 1>& y0, Scalar t_end, const OdeOptions& opt = {},
    const std::function<bool(Scalar, const Eigen::Matrix<Scalar, Dim, 1>&)>& stop = nullptr) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;
  using namespace dopri;

  detail::require(t_end >= t0, "integrate_dopri5: t_end must be >= t0");
  detail::require(opt.rel_tol > 0.0 && opt.abs_tol >= 0.0, "integrate_dopri5: tolerances must be positive");

  DenseSolution<Scalar, Dim> sol(t0, y0);
  if (t_end == t0) return sol;

  const auto scale = [&](const State& a, const State& b) -> State {
    return (Scalar(opt.abs_tol) + Scalar(opt.rel_tol) * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  State y = y0;
  Scalar t = t0;
  State k1 = f(t, y);

  Scalar h;
  if (opt.initial_step > 0.0) {
    h = Scalar(opt.initial_step);
  } else {
    const State sk = scale(y, y);
    const Scalar dnf = sqrt((k1.array() / sk.array()).square().mean());
    const Scalar dny = sqrt((y.array() / sk.array()).square().mean());
    h = (dnf <= Scalar(1e-10) || dny <= Scalar(1e-10)) ? Scalar(1e-6) : Scalar(0.01) * dny / dnf;
    h = min(h, t_end - t0);
  }
  h = min(h, Scalar(opt.max_step));

  const Scalar safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  std::size_t steps = 0;
  bool last_rejected = false;

  while (t < t_end) {
    if (++steps > opt.max_steps) throw IntegrationError("integrate_dopri5: too many steps");
    if (t + h > t_end) h = t_end - t;
    if (h <= abs(t) * std::numeric_limits<Scalar>::epsilon() * 16 || !(h > 0)) {
      throw IntegrationError("integrate_dopri5: step size underflow at t = " + std::to_string(static_cast<double>(t)));
    }

    const State k2 = f(t + c2 * h, State(y + h * (a21 * k1)));
    const State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
    const State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 = f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const State y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const State k7 = f(t + h, y_new);

    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Scalar err_norm = sqrt((err.array() / scale(y, y_new).array()).square().mean());

    if (!std::isfinite(static_cast<double>(err_norm))) {
      h *= Scalar(0.1);
      last_rejected = true;
      continue;
    }

    if (err_norm <= Scalar(1)) {
      typename DenseSolution<Scalar, Dim>::Segment seg;
      const State ydiff = y_new - y;
      const State bspl = h * k1 - ydiff;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = ydiff;
      seg.r3 = bspl;
      seg.r4 = ydiff - h * k7 - bspl;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const Scalar t_new = (t_end - (t + h) <= abs(t_end) * std::numeric_limits<Scalar>::epsilon() * 4) ? t_end : t + h;
      seg.h = t_new - t;
      sol.push(std::move(seg), y_new);
      t = t_new;
      y = y_new;
      k1 = k7;
      if (stop && stop(t, y)) break;

      Scalar fac = err_norm == Scalar(0) ? fac_max : safety * pow(err_norm, Scalar(-0.2));
      fac = min(fac_max, max(fac_min, fac));
      if (last_rejected) fac = min(fac, Scalar(1));
      h = min(h * fac, Scalar(opt.max_step));
      last_rejected = false;
    } else {
      h *= max(fac_min, safety * pow(err_norm, Scalar(-0.2)));
      last_rejected = true;
    }
  }
  return sol;
}

/// Smallest t in [lo, hi] with g(t) <= 0, given g(lo) > 0 >= g(hi), by bisection
/// to an absolute tolerance.
template <typename Scalar, class G>
Scalar bisect_crossing(G&& g, Scalar lo, Scalar hi, Scalar tol = Scalar(1e-9)) {
  while (hi - lo > tol) {
    const Scalar mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (g(mid) <= Scalar(0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace twostrain
