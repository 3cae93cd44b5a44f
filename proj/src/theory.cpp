#include "twostrain/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twostrain/fluid.hpp"

namespace twostrain {
namespace {

void check_fractions(double alpha, double beta, const char* who) {
  detail::require(alpha > 0.0 && beta > 0.0 && alpha + beta <= 1.0,
                  std::string(who) + ": requires alpha, beta > 0 and alpha + beta <= 1");
}

bool is_one(double v) { return std::abs(v - 1.0) <= 1e-12; }

}  // namespace

GumbelPrediction predict_kappa_thm2(const ModelParams& params, double alpha, double beta) {
  params.validate();
  check_fractions(alpha, beta, "predict_kappa_thm2");
  const auto [r01, r02] = reproductive_ratios(params);
  if (!(r01 > r02 && r01 > 1.0)) throw RegimeError("predict_kappa_thm2: requires R01 > R02 and R01 > 1");
  const double rho = r02 / r01;
  const double nn = static_cast<double>(params.n);

  GumbelPrediction out;
  out.regime = classify_regime(params);
  out.law.scale = 1.0 / (params.mu2 * (1.0 - rho));
  const double first = nn * beta * (1.0 - rho);
  const double second = (1.0 - 1.0 / r01) / alpha;
  if (!(first > 0.0 && second > 0.0)) throw DomainError("predict_kappa_thm2: nonpositive logarithm argument");
  out.law.location = out.law.scale * (std::log(first) + (r02 * params.mu2 / (r01 * params.mu1)) * std::log(second));

  if (!out.regime.well_separated) {
    out.notes.push_back("(R01 - R02) / (R01 - 1) is below " + std::to_string(kWellSeparatedMin) +
                        "; finite-N accuracy may be poor");
  }
  if (out.regime.tag == RegimeTag::NearCritical) {
    out.notes.push_back("parameters are near-critical; predict_kappa_nearcrit is the sharper law");
  }
  return out;
}

GumbelPrediction predict_kappa_nearcrit(const ModelParams& params, double alpha, double beta) {
  params.validate();
  check_fractions(alpha, beta, "predict_kappa_nearcrit");
  if (!(is_one(params.mu1) && is_one(params.mu2))) throw RegimeError("predict_kappa_nearcrit: requires mu1 = mu2 = 1");
  const double l1 = params.lambda1, l2 = params.lambda2;
  if (!(l1 > l2 && l2 > 1.0)) throw RegimeError("predict_kappa_nearcrit: requires lambda1 > lambda2 > 1");
  const double nn = static_cast<double>(params.n);

  GumbelPrediction out;
  out.regime = classify_regime(params);
  out.law.scale = l1 / (l1 - l2);
  const double arg = nn * (l1 - 1.0) * (l1 - l2) * beta / (l1 * l1 * alpha);
  if (!(arg > 0.0)) throw DomainError("predict_kappa_nearcrit: nonpositive logarithm argument");
  out.law.location = out.law.scale * std::log(arg);

  if (!out.regime.statistic) {
    out.notes.push_back("near-critical statistic is not computable at this N");
  } else if (*out.regime.statistic < kNearCriticalStatisticMin) {
    out.notes.push_back("near-critical statistic " + std::to_string(*out.regime.statistic) + " is below " +
                        std::to_string(kNearCriticalStatisticMin));
  }
  return out;
}

ExponentialPrediction predict_tau_supercritical(double lambda, double mu, std::int64_t n) {
  detail::require(std::isfinite(lambda) && mu > 0.0 && std::isfinite(mu), "predict_tau_supercritical: bad rates");
  detail::require(n >= 1, "predict_tau_supercritical: n must be >= 1");
  if (!(lambda > mu)) throw RegimeError("predict_tau_supercritical: requires lambda > mu");
  const double nn = static_cast<double>(n);
  ExponentialPrediction out;
  out.v = std::log(lambda / mu) - 1.0 + mu / lambda;
  out.log_mean = 0.5 * std::log(2.0 * std::numbers::pi / nn) + std::log(lambda) - 2.0 * std::log(lambda - mu) + nn * out.v;
  out.law.mean = std::exp(out.log_mean);
  if (std::isinf(out.law.mean)) out.notes.push_back("mean overflows double precision; use log_mean");
  return out;
}

GumbelPrediction predict_sis_subcritical(double lambda, double mu, std::int64_t n, double alpha) {
  detail::require(std::isfinite(lambda) && lambda >= 0.0 && mu > 0.0 && std::isfinite(mu),
                  "predict_sis_subcritical: bad rates");
  detail::require(n >= 1, "predict_sis_subcritical: n must be >= 1");
  detail::require(alpha > 0.0 && alpha <= 1.0, "predict_sis_subcritical: alpha must lie in (0, 1]");
  if (!(lambda < mu)) throw RegimeError("predict_sis_subcritical: requires lambda < mu");
  const double nn = static_cast<double>(n);
  GumbelPrediction out;
  out.regime.tag = RegimeTag::SubcriticalDominant;
  out.law.scale = 1.0 / (mu - lambda);
  out.law.location = out.law.scale * (std::log(alpha) + std::log(nn) + std::log1p(-lambda / mu) -
                                      std::log1p(lambda * alpha / (mu - lambda)));
  if (alpha * nn < 1.0) out.notes.push_back("alpha < 1/N: fewer than one initial infective");
  return out;
}

PhaseBreakdown phase_breakdown(const ModelParams& params, double alpha, double beta) {
  params.validate();
  check_fractions(alpha, beta, "phase_breakdown");
  const auto [r01, r02] = reproductive_ratios(params);
  if (!(r01 > r02 && r01 > 1.0)) throw RegimeError("phase_breakdown: requires R01 > R02 and R01 > 1");
  const double nn = static_cast<double>(params.n);

  const FluidState x0{alpha, beta};
  PhaseBreakdown out;
  out.t0 = burn_in_time(params, x0);
  out.t_cross = x2_crossing_time(params, x0, std::pow(nn, -0.25));
  // When x2 reaches N^-1/4 before the decay region is entered, the
  // intermediate phase is empty.
  const double t_mid = std::min(out.t0, out.t_cross);
  const FluidTrajectory path = integrate(params, x0, out.t_cross);
  const FluidState x_mid = path(t_mid);
  const FluidState x_end = path.back();
  out.burn_in = t_mid > 0.0 ? travel_time(params, x0, x_mid) : 0.0;
  out.intermediate = out.t_cross > t_mid ? travel_time(params, x_mid, x_end) : 0.0;
  out.burn_in = std::max(0.0, out.burn_in);
  out.intermediate = std::max(0.0, out.intermediate);

  // Endgame: linear birth-death chain with birth l2 m1 / l1, death m2, from N^{3/4}.
  const double r = params.mu2 - params.lambda2 * params.mu1 / params.lambda1;
  out.final_law.scale = 1.0 / r;
  out.final_law.location = (0.75 * std::log(nn) + std::log(r) - std::log(params.mu2)) / r;
  out.total_law.scale = out.final_law.scale;
  out.total_law.location = out.burn_in + out.intermediate + out.final_law.location;
  return out;
}

}  // namespace twostrain
