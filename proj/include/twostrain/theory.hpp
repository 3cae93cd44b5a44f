#pragma once

// Extinction-time predictors as explicit laws, each carrying notes on how
// well its hypotheses are met at the given finite N.

#include <cstdint>
#include <string>
#include <vector>

#include "twostrain/bdchain.hpp"
#include "twostrain/laws.hpp"
#include "twostrain/model.hpp"

namespace twostrain {

struct GumbelPrediction {
  GumbelLaw law;
  Regime regime;
  std::vector<std::string> notes;
};

struct ExponentialPrediction {
  ExponentialLaw law;  // mean may overflow to inf for large N; see log_mean
  double v = 0.0;      // log(lambda/mu) - 1 + mu/lambda
  double log_mean = 0.0;
  std::vector<std::string> notes;
};

/// Weaker-strain extinction time kappa_N from (alpha N, beta N) when
/// R01 > R02 and R01 > 1: (kappa_N - location) / scale is asymptotically
/// standard Gumbel with scale = 1 / (mu2 (1 - R02/R01)).
GumbelPrediction predict_kappa_thm2(const ModelParams& params, double alpha, double beta);

/// Near-critical version (mu1 = mu2 = 1, lambda1 > lambda2 > 1):
/// scale = lambda1 / (lambda1 - lambda2).
GumbelPrediction predict_kappa_nearcrit(const ModelParams& params, double alpha, double beta);

/// Single-strain supercritical SIS extinction time: approximately
/// exponential with mean sqrt(2 pi / N) lambda / (lambda - mu)^2 e^{N v}.
ExponentialPrediction predict_tau_supercritical(double lambda, double mu, std::int64_t n);

/// Single-strain subcritical SIS extinction time from alpha N infectives.
GumbelPrediction predict_sis_subcritical(double lambda, double mu, std::int64_t n, double alpha);

struct PhaseBreakdown {
  double burn_in = 0.0;       // fluid time from (alpha, beta) into the decay region
  double intermediate = 0.0;  // fluid time from there until x2 = N^-1/4
  double t0 = 0.0;            // burn_in_time of the starting point
  double t_cross = 0.0;       // first time x2 = N^-1/4
  GumbelLaw final_law;        // birth-death endgame from N^{3/4}
  GumbelLaw total_law;
};

PhaseBreakdown phase_breakdown(const ModelParams& params, double alpha, double beta);

}  // namespace twostrain
