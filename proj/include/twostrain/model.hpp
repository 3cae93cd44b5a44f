#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "twostrain/errors.hpp"

namespace twostrain {

/// Per-capita rates of the two-strain SIS competition chain and the
/// population size. Strain 1 is the one expected to win.
struct ModelParams {
  double lambda1 = 1.0;  // infection rate, strain 1
  double mu1 = 1.0;      // recovery rate, strain 1
  double lambda2 = 1.0;  // infection rate, strain 2
  double mu2 = 1.0;      // recovery rate, strain 2
  std::int64_t n = 1;    // population size

  /// Throws PreconditionError unless all rates are positive and finite and n >= 1.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Infective counts (X1, X2).
struct ChainState {
  std::int64_t x1 = 0;
  std::int64_t x2 = 0;

  std::int64_t total() const { return x1 + x2; }
  bool valid_for(std::int64_t n) const { return x1 >= 0 && x2 >= 0 && x1 + x2 <= n; }

  friend bool operator==(const ChainState&, const ChainState&) = default;
};

/// Event rates out of a state: X1+1, X1-1, X2+1, X2-1.
struct RateQuad {
  double up1 = 0.0;
  double down1 = 0.0;
  double up2 = 0.0;
  double down2 = 0.0;

  double total() const { return up1 + down1 + up2 + down2; }
};

enum class RegimeTag { TheoremTwo, NearCritical, EqualStrength, WeakDominant, SubcriticalDominant };

std::string_view to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag = RegimeTag::TheoremTwo;
  // N (l1-l2)^3 / (l1-1) / log log(N (l1-l2)^2); only when computable.
  std::optional<double> statistic;
  // (R01 - R02) / (R01 - 1); only when R01 != 1.
  std::optional<double> separation;
  bool well_separated = false;
  bool near_critical_applicable = false;
};

/// Advisory cutoffs for classify_regime.
inline constexpr double kNearCriticalStatisticMin = 10.0;
inline constexpr double kWellSeparatedMin = 10.0;
// Largest relative gap (l1 - l2) / l1 still labelled near-critical.
inline constexpr double kNearCriticalMaxRelativeGap = 0.1;

struct ReproductiveRatios {
  double r01;
  double r02;
};

ReproductiveRatios reproductive_ratios(const ModelParams& params);

/// Rates of the four transitions. The susceptible fraction is formed as
/// (N - X1 - X2) / N so that it is exactly zero at full occupancy.
RateQuad transition_rates(const ModelParams& params, const ChainState& state);

/// Near-criticality statistic, or nullopt when mu1 != 1, mu2 != 1,
/// lambda1 <= lambda2 or the double logarithm is not positive.
std::optional<double> near_critical_statistic(const ModelParams& params);

Regime classify_regime(const ModelParams& params);

/// Zeeman's competitive-exclusion criterion for dx_i/dt = x_i (b_i - sum_j a_ij x_j):
/// true iff species 1 is globally attractive on the interior.
bool zeeman_check(const Eigen::Ref<const Eigen::VectorXd>& b, const Eigen::Ref<const Eigen::MatrixXd>& a);

/// The Lotka-Volterra coefficients (b, a) of the competition ODE: b_i = l_i - m_i, a_ij = l_i.
std::pair<Eigen::Vector2d, Eigen::Matrix2d> lotka_volterra_coefficients(const ModelParams& params);

}  // namespace twostrain
