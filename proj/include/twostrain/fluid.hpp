#pragma once

// Deterministic fluid limit of the competition chain:
//   dx1/dt = l1 x1 (1 - x1 - x2) - m1 x1
//   dx2/dt = l2 x2 (1 - x1 - x2) - m2 x2
// plus its first integral, spectral data at the exclusion fixed point,
// decay envelopes, Lyapunov function, phase times and the concentration
// certificates for the chain around it.

#include <cstdint>

#include <Eigen/Dense>

#include "twostrain/errors.hpp"
#include "twostrain/model.hpp"
#include "twostrain/ode.hpp"

namespace twostrain {

template <typename Scalar>
using FluidVector = Eigen::Matrix<Scalar, 2, 1>;

/// Population fractions (x1, x2).
using FluidState = FluidVector<double>;

using FluidTrajectory = DenseSolution<double, 2>;

/// Coordinates diagonalising the linearisation at the exclusion fixed point:
/// tx1 = x1 - (l1 - m1)/l1 + x2/a, tx2 = x2.
struct EigenState {
  double tx1 = 0.0;
  double tx2 = 0.0;
};

struct SpectralData {
  double eta1 = 0.0;    // l1 - m1
  double eta2 = 0.0;    // m2 - l2 m1 / l1
  double a = 0.0;       // 1 - eta2 / eta1
  double L = 0.0;       // min(eta1, eta2)
  double Ltilde = 0.0;  // max(eta1, eta2)
  double L1 = 0.0;      // (l1 + |l1 - l2|)(eta1 + eta2) / eta1
  double b = 0.0;       // (|a| + 1) / |a|; infinite when repeated
  double a1 = 0.0;      // b^2 (l1 + m1 + l2 + m2) / (2 eta1); infinite when repeated
  double a2 = 0.0;      // (l2 + m2) / (2 eta2)
  bool repeated = false;         // |a| < kRepeatedTolerance
  bool ill_conditioned = false;  // kRepeatedTolerance <= |a| < kIllConditionedTolerance
};

inline constexpr double kRepeatedTolerance = 1e-9;
inline constexpr double kIllConditionedTolerance = 1e-3;

/// ((l1 - m1) / l1, 0).
inline FluidState exclusion_fixed_point(const ModelParams& p) { return {(p.lambda1 - p.mu1) / p.lambda1, 0.0}; }

template <class Derived>
FluidVector<typename Derived::Scalar> drift(const ModelParams& p, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar s = Scalar(1) - x(0) - x(1);
  return {Scalar(p.lambda1) * x(0) * s - Scalar(p.mu1) * x(0), Scalar(p.lambda2) * x(1) * s - Scalar(p.mu2) * x(1)};
}

/// Analytic Jacobian of the drift at x.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 2> drift_jacobian(const ModelParams& p, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar s = Scalar(1) - x(0) - x(1);
  Eigen::Matrix<Scalar, 2, 2> j;
  j << Scalar(p.lambda1) * (s - x(0)) - Scalar(p.mu1), -Scalar(p.lambda1) * x(0),  //
      -Scalar(p.lambda2) * x(1), Scalar(p.lambda2) * (s - x(1)) - Scalar(p.mu2);
  return j;
}

/// Jacobian at the exclusion fixed point: [[-eta1, -eta1], [0, -eta2]].
Eigen::Matrix2d fixed_point_jacobian(const ModelParams& p);

/// Dense adaptive Dormand-Prince solution on [0, t_end].
FluidTrajectory integrate(const ModelParams& params, const FluidState& x0, double t_end, double rel_tol = 1e-9,
                          double abs_tol = 1e-12);

/// log[x1(t)^l2 / x2(t)^l1] - log[x1(0)^l2 / x2(0)^l1] - (m2 l1 - m1 l2) t,
/// identically zero along exact solutions.
double relation_residual(const ModelParams& params, const FluidState& x0, const FluidState& xt, double t);

/// Time the fluid solution takes from `from` to `to`, assuming both lie on
/// one orbit.
double travel_time(const ModelParams& params, const FluidState& from, const FluidState& to);

/// Closed-form solution of the supercritical logistic ODE y' = l y (1 - y) - m y.
double logistic_closed_form(double lambda, double mu, double y0, double t);

SpectralData eigen_decomposition(const ModelParams& params);

EigenState to_eigen_coords(const ModelParams& params, const FluidState& x);
FluidState from_eigen_coords(const ModelParams& params, const EigenState& e);

/// Size of the deviation from the fixed point that the decay envelopes are stated in:
/// max(|tx1|, tx2/|a|) for distinct eigenvalues, max(|x1 - x*|, x2) when repeated.
double decay_hypothesis_value(const ModelParams& params, const FluidState& x);

/// Largest admissible decay_hypothesis_value: L / (8 L1), or
/// (l1 - m1) / (32 (l1 + l2)) when repeated.
double decay_hypothesis_radius(const ModelParams& params);

struct DecayEnvelope {
  double tx1_abs_upper;  // |tx1(t)|, or |x1(t) - x*| when repeated
  double x2_upper;
  double x2_lower;
  bool repeated;
};

/// Exponential envelopes around the solution started at x0. Throws
/// InapplicableError when x0 violates the hypothesis.
DecayEnvelope decay_envelope(const ModelParams& params, const FluidState& x0, double t);

double lyapunov_value(const ModelParams& params, const FluidState& x);

/// First time the solution from x0 enters the region where the decay envelopes apply.
double burn_in_time(const ModelParams& params, const FluidState& x0);

/// First time the solution from x0 has x2 <= level (0 if already there).
double x2_crossing_time(const ModelParams& params, const FluidState& x0, double level);

/// Time from x_t0 (inside the hypothesis region) until x2 first falls to N^-1/4.
double phase_time_tN(const ModelParams& params, std::int64_t n, const FluidState& x_t0);

struct Phase1Bound {
  double deviation_bound;
  double probability_bound;
  bool vacuous;  // probability_bound >= 1
};

/// Fixed-horizon concentration: sup_{t <= t0} |x_N - x|_1 stays below
/// 2 delta e^{(5 l1 + 1) t0} up to probability 4 e^{-delta^2 N / 4 t0 (l1 + 1)}.
Phase1Bound phase1_bound(const ModelParams& params, double t0, double delta, std::int64_t n);

struct LtApproxBound {
  double deviation_bound;
  double probability_bound;
  double horizon;  // ceil(e^{omega/8})
  bool vacuous;
};

/// Long-horizon concentration in eigen-coordinates near the fixed point.
LtApproxBound lt_approx_bound(const ModelParams& params, std::int64_t n, double omega);

/// max(|tx1_N - tx1|, |tx2_N - tx2| / |a|), the deviation controlled by lt_approx_bound.
double eigen_deviation(const ModelParams& params, const FluidState& chain, const FluidState& fluid);

}  // namespace twostrain
