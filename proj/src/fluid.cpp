#include "twostrain/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace twostrain {
namespace {

void check_fluid_state(const FluidState& x, const char* who) {
  detail::require(std::isfinite(x(0)) && std::isfinite(x(1)), std::string(who) + ": state must be finite");
  detail::require(x(0) >= 0.0 && x(1) >= 0.0 && x(0) + x(1) <= 1.0 + 1e-12,
                  std::string(who) + ": state must satisfy x1, x2 >= 0 and x1 + x2 <= 1");
}

void require_positive_coords(const FluidState& x, const char* who) {
  if (!(x(0) > 0.0 && x(1) > 0.0)) throw DomainError(std::string(who) + ": coordinates must be strictly positive");
}

// eta1 > 0 and eta2 > 0, else RegimeError.
void require_exclusion_regime(const ModelParams& p, const char* who) {
  const double eta1 = p.lambda1 - p.mu1;
  const double eta2 = p.mu2 - p.lambda2 * p.mu1 / p.lambda1;
  if (!(eta1 > 0.0 && eta2 > 0.0)) {
    throw RegimeError(std::string(who) + ": requires lambda1 > mu1 and mu2 > lambda2 mu1 / lambda1");
  }
}

double orbit_rate(const ModelParams& p) { return p.mu2 * p.lambda1 - p.mu1 * p.lambda2; }

auto rhs(const ModelParams& p) {
  return [&p](double, const FluidState& x) -> FluidState { return drift(p, x); };
}

// First t in [0, t_max] with g(x(t)) <= 0 along the solution from x0. The
// solution is extended in chunks so that slow approaches are not cut off.
template <class G>
double first_crossing(const ModelParams& p, const FluidState& x0, G&& g, double t_max, const char* who) {
  if (g(x0) <= 0.0) return 0.0;
  OdeOptions opt;
  double t_base = 0.0;
  FluidState start = x0;
  double chunk = 50.0;
  while (t_base < t_max) {
    const double t_end = std::min(chunk, t_max - t_base);
    const auto sol = integrate_dopri5<double, 2>(rhs(p), 0.0, start, t_end, opt,
                                                 [&](double, const FluidState& y) { return g(y) <= 0.0; });
    if (g(sol.back()) <= 0.0) {
      const auto& seg = sol.segments().back();
      const double hit = bisect_crossing<double>([&](double t) { return g(sol(t)); }, seg.t0, seg.t0 + seg.h);
      return t_base + hit;
    }
    t_base += t_end;
    start = sol.back();
    chunk *= 2.0;
  }
  throw IntegrationError(std::string(who) + ": no crossing before t = " + std::to_string(t_max));
}

constexpr double kCrossingHorizon = 1e6;

}  // namespace

Eigen::Matrix2d fixed_point_jacobian(const ModelParams& p) {
  const double eta1 = p.lambda1 - p.mu1;
  const double eta2 = p.mu2 - p.lambda2 * p.mu1 / p.lambda1;
  Eigen::Matrix2d j;
  j << -eta1, -eta1, 0.0, -eta2;
  return j;
}

FluidTrajectory integrate(const ModelParams& params, const FluidState& x0, double t_end, double rel_tol,
                          double abs_tol) {
  params.validate();
  check_fluid_state(x0, "integrate");
  detail::require(t_end >= 0.0 && std::isfinite(t_end), "integrate: t_end must be finite and >= 0");
  detail::require(rel_tol > 0.0 && rel_tol <= 1e-3, "integrate: rel_tol must lie in (0, 1e-3]");
  detail::require(abs_tol > 0.0, "integrate: abs_tol must be positive");
  OdeOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = abs_tol;
  return integrate_dopri5<double, 2>(rhs(params), 0.0, x0, t_end, opt);
}

double relation_residual(const ModelParams& params, const FluidState& x0, const FluidState& xt, double t) {
  require_positive_coords(x0, "relation_residual");
  require_positive_coords(xt, "relation_residual");
  const double l1 = params.lambda1, l2 = params.lambda2;
  const double now = l2 * std::log(xt(0)) - l1 * std::log(xt(1));
  const double then = l2 * std::log(x0(0)) - l1 * std::log(x0(1));
  return (now - then) - orbit_rate(params) * t;
}

double travel_time(const ModelParams& params, const FluidState& from, const FluidState& to) {
  require_positive_coords(from, "travel_time");
  require_positive_coords(to, "travel_time");
  const double denom = orbit_rate(params);
  if (std::abs(denom) <= 1e-14 * params.lambda1 * params.mu2) {
    throw DomainError("travel_time: mu2 lambda1 = mu1 lambda2, the time formula is degenerate");
  }
  const double num = params.lambda2 * std::log(to(0) / from(0)) - params.lambda1 * std::log(to(1) / from(1));
  return num / denom;
}

double logistic_closed_form(double lambda, double mu, double y0, double t) {
  detail::require(mu > 0.0 && std::isfinite(lambda) && std::isfinite(mu), "logistic_closed_form: mu must be > 0");
  if (!(lambda > mu)) throw RegimeError("logistic_closed_form: requires lambda > mu");
  detail::require(y0 > 0.0 && y0 <= 1.0, "logistic_closed_form: y0 must lie in (0, 1]");
  detail::require(t >= 0.0, "logistic_closed_form: t must be >= 0");
  const double r = lambda - mu;
  return y0 * r / (lambda * y0 + lambda * std::exp(-r * t) * (r / lambda - y0));
}

SpectralData eigen_decomposition(const ModelParams& params) {
  params.validate();
  require_exclusion_regime(params, "eigen_decomposition");
  const double l1 = params.lambda1, m1 = params.mu1, l2 = params.lambda2, m2 = params.mu2;
  SpectralData s;
  s.eta1 = l1 - m1;
  s.eta2 = m2 - l2 * m1 / l1;
  s.a = 1.0 - s.eta2 / s.eta1;
  s.L = std::min(s.eta1, s.eta2);
  s.Ltilde = std::max(s.eta1, s.eta2);
  s.L1 = (l1 + std::abs(l1 - l2)) * (s.eta1 + s.eta2) / s.eta1;
  const double abs_a = std::abs(s.a);
  s.repeated = abs_a < kRepeatedTolerance;
  s.ill_conditioned = !s.repeated && abs_a < kIllConditionedTolerance;
  if (s.repeated) {
    s.b = std::numeric_limits<double>::infinity();
    s.a1 = std::numeric_limits<double>::infinity();
  } else {
    s.b = (abs_a + 1.0) / abs_a;
    s.a1 = s.b * s.b * (l1 + m1 + l2 + m2) / (2.0 * s.eta1);
  }
  s.a2 = (l2 + m2) / (2.0 * s.eta2);
  return s;
}

EigenState to_eigen_coords(const ModelParams& params, const FluidState& x) {
  const SpectralData s = eigen_decomposition(params);
  if (s.repeated) {
    throw InapplicableError("to_eigen_coords: repeated eigenvalue (a = 0); use the original coordinates");
  }
  const double xstar = exclusion_fixed_point(params)(0);
  return {x(0) - xstar + x(1) / s.a, x(1)};
}

FluidState from_eigen_coords(const ModelParams& params, const EigenState& e) {
  const SpectralData s = eigen_decomposition(params);
  if (s.repeated) {
    throw InapplicableError("from_eigen_coords: repeated eigenvalue (a = 0); use the original coordinates");
  }
  const double xstar = exclusion_fixed_point(params)(0);
  return {e.tx1 + xstar - e.tx2 / s.a, e.tx2};
}

double decay_hypothesis_value(const ModelParams& params, const FluidState& x) {
  const SpectralData s = eigen_decomposition(params);
  const double xstar = exclusion_fixed_point(params)(0);
  if (s.repeated) return std::max(std::abs(x(0) - xstar), x(1));
  const double tx1 = x(0) - xstar + x(1) / s.a;
  return std::max(std::abs(tx1), x(1) / std::abs(s.a));
}

double decay_hypothesis_radius(const ModelParams& params) {
  const SpectralData s = eigen_decomposition(params);
  if (s.repeated) return s.eta1 / (32.0 * (params.lambda1 + params.lambda2));
  return s.L / (8.0 * s.L1);
}

DecayEnvelope decay_envelope(const ModelParams& params, const FluidState& x0, double t) {
  check_fluid_state(x0, "decay_envelope");
  detail::require(t >= 0.0, "decay_envelope: t must be >= 0");
  const SpectralData s = eigen_decomposition(params);
  const double y0 = decay_hypothesis_value(params, x0);
  const double radius = decay_hypothesis_radius(params);
  if (!(y0 <= radius)) {
    throw InapplicableError("decay_envelope: initial deviation " + std::to_string(y0) + " exceeds " +
                            std::to_string(radius));
  }
  DecayEnvelope env{};
  env.repeated = s.repeated;
  if (s.repeated) {
    env.tx1_abs_upper = 4.0 * y0 * std::exp(-s.eta1 * t / 2.0);
    const double e = std::exp(-s.eta1 * t);
    env.x2_upper = 2.0 * x0(1) * e;
    env.x2_lower = 0.5 * x0(1) * e;
  } else {
    env.tx1_abs_upper = 2.0 * y0 * std::exp(-s.L * t);
    const double e = std::exp(-s.eta2 * t);
    env.x2_upper = 2.0 * x0(1) * e;
    env.x2_lower = 0.5 * x0(1) * e;
  }
  return env;
}

double lyapunov_value(const ModelParams& params, const FluidState& x) {
  const double w = params.mu2 / params.lambda2 - params.mu1 / params.lambda1;
  detail::require(w >= 0.0, "lyapunov_value: requires R01 >= R02");
  const double d = x(0) + x(1) - 1.0 + params.mu1 / params.lambda1;
  return 0.5 * d * d + x(1) * w;
}

double burn_in_time(const ModelParams& params, const FluidState& x0) {
  check_fluid_state(x0, "burn_in_time");
  const double radius = decay_hypothesis_radius(params);
  if (!(x0(0) > 0.0)) {
    throw DomainError("burn_in_time: x1(0) = 0, the solution never approaches the exclusion fixed point");
  }
  return first_crossing(
      params, x0, [&](const FluidState& y) { return decay_hypothesis_value(params, y) - radius; },
      kCrossingHorizon, "burn_in_time");
}

double x2_crossing_time(const ModelParams& params, const FluidState& x0, double level) {
  check_fluid_state(x0, "x2_crossing_time");
  detail::require(level > 0.0, "x2_crossing_time: level must be positive");
  require_exclusion_regime(params, "x2_crossing_time");
  return first_crossing(
      params, x0, [&](const FluidState& y) { return y(1) - level; }, kCrossingHorizon, "x2_crossing_time");
}

double phase_time_tN(const ModelParams& params, std::int64_t n, const FluidState& x_t0) {
  check_fluid_state(x_t0, "phase_time_tN");
  detail::require(n >= 1, "phase_time_tN: n must be >= 1");
  const double y0 = decay_hypothesis_value(params, x_t0);
  const double radius = decay_hypothesis_radius(params);
  if (!(y0 <= radius)) {
    throw InapplicableError("phase_time_tN: starting state is outside the decay-envelope hypothesis");
  }
  return x2_crossing_time(params, x_t0, std::pow(static_cast<double>(n), -0.25));
}

Phase1Bound phase1_bound(const ModelParams& params, double t0, double delta, std::int64_t n) {
  params.validate();
  detail::require(t0 > 0.0 && std::isfinite(t0), "phase1_bound: t0 must be positive");
  detail::require(n >= 1, "phase1_bound: n must be >= 1");
  const double l1 = params.lambda1;
  const double delta_max = std::numbers::ln2 * 2.0 * t0 * (l1 + 1.0);
  detail::require(delta > 0.0 && delta <= delta_max, "phase1_bound: delta must lie in (0, log(4) t0 (lambda1 + 1)]");
  Phase1Bound b{};
  b.deviation_bound = 2.0 * delta * std::exp((5.0 * l1 + 1.0) * t0);
  b.probability_bound = 4.0 * std::exp(-delta * delta * static_cast<double>(n) / (4.0 * t0 * (l1 + 1.0)));
  b.vacuous = b.probability_bound >= 1.0;
  return b;
}

LtApproxBound lt_approx_bound(const ModelParams& params, std::int64_t n, double omega) {
  const SpectralData s = eigen_decomposition(params);
  if (s.repeated) {
    throw InapplicableError("lt_approx_bound: repeated eigenvalue (a = 0); the eigen-coordinate bound is undefined");
  }
  detail::require(n >= 1, "lt_approx_bound: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double ln2sq = std::numbers::ln2 * std::numbers::ln2;
  const double cap = 4.0 * ln2sq * nn * std::min(s.a1, s.a2) / (s.b * s.b);
  detail::require(omega > 0.0 && omega < cap,
                  "lt_approx_bound: omega must lie in (0, " + std::to_string(cap) + ")");
  LtApproxBound b{};
  b.deviation_bound = 8.0 * std::exp(s.Ltilde) * std::sqrt(omega * (s.a1 + s.a2) / nn);
  b.probability_bound = 8.0 * std::exp(-omega / 8.0);
  b.horizon = std::ceil(std::exp(omega / 8.0));
  b.vacuous = b.probability_bound >= 1.0;
  return b;
}

double eigen_deviation(const ModelParams& params, const FluidState& chain, const FluidState& fluid) {
  const EigenState c = to_eigen_coords(params, chain);
  const EigenState f = to_eigen_coords(params, fluid);
  const double a = std::abs(eigen_decomposition(params).a);
  return std::max(std::abs(c.tx1 - f.tx1), std::abs(c.tx2 - f.tx2) / a);
}

}  // namespace twostrain
