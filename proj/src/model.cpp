#include "twostrain/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twostrain {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void ModelParams::validate() const {
  detail::require(positive_finite(lambda1) && positive_finite(mu1) && positive_finite(lambda2) &&
                      positive_finite(mu2),
                  "ModelParams: all rates must be strictly positive and finite");
  detail::require(n >= 1, "ModelParams: n must be >= 1");
}

std::string_view to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::TheoremTwo: return "TheoremTwo";
    case RegimeTag::NearCritical: return "NearCritical";
    case RegimeTag::EqualStrength: return "EqualStrength";
    case RegimeTag::WeakDominant: return "WeakDominant";
    case RegimeTag::SubcriticalDominant: return "SubcriticalDominant";
  }
  return "Unknown";
}

ReproductiveRatios reproductive_ratios(const ModelParams& params) {
  params.validate();
  return {params.lambda1 / params.mu1, params.lambda2 / params.mu2};
}

RateQuad transition_rates(const ModelParams& params, const ChainState& state) {
  if (!state.valid_for(params.n)) {
    throw PreconditionError("transition_rates: state (" + std::to_string(state.x1) + ", " +
                            std::to_string(state.x2) + ") invalid for n = " + std::to_string(params.n));
  }
  const double n = static_cast<double>(params.n);
  const double susceptible = static_cast<double>(params.n - state.x1 - state.x2) / n;
  const double x1 = static_cast<double>(state.x1);
  const double x2 = static_cast<double>(state.x2);
  return {params.lambda1 * x1 * susceptible, params.mu1 * x1, params.lambda2 * x2 * susceptible,
          params.mu2 * x2};
}

std::optional<double> near_critical_statistic(const ModelParams& params) {
  if (params.mu1 != 1.0 || params.mu2 != 1.0) return std::nullopt;
  if (!(params.lambda1 > params.lambda2) || !(params.lambda1 > 1.0)) return std::nullopt;
  const double n = static_cast<double>(params.n);
  const double gap = params.lambda1 - params.lambda2;
  const double inner = std::log(n * gap * gap);
  if (!(inner > 0.0)) return std::nullopt;
  const double loglog = std::log(inner);
  if (!(loglog > 0.0)) return std::nullopt;
  return n * gap * gap * gap / (params.lambda1 - 1.0) / loglog;
}

Regime classify_regime(const ModelParams& params) {
  const auto [r01, r02] = reproductive_ratios(params);
  Regime regime;
  regime.statistic = near_critical_statistic(params);
  if (r01 != 1.0) regime.separation = (r01 - r02) / (r01 - 1.0);

  const double scale = std::max(std::abs(r01), std::abs(r02));
  if (std::abs(r01 - r02) <= 1e-12 * scale) {
    regime.tag = RegimeTag::EqualStrength;
    return regime;
  }
  if (r02 > r01) {
    regime.tag = r02 > 1.0 ? RegimeTag::WeakDominant : RegimeTag::SubcriticalDominant;
    return regime;
  }
  if (r01 <= 1.0) {
    regime.tag = RegimeTag::SubcriticalDominant;
    return regime;
  }

  regime.well_separated = regime.separation && *regime.separation >= kWellSeparatedMin;
  const bool eligible = params.mu1 == 1.0 && params.mu2 == 1.0 && params.lambda2 > 1.0;
  regime.near_critical_applicable =
      eligible && regime.statistic && *regime.statistic >= kNearCriticalStatisticMin;
  const double relative_gap = (params.lambda1 - params.lambda2) / params.lambda1;
  regime.tag = regime.near_critical_applicable && relative_gap <= kNearCriticalMaxRelativeGap
                   ? RegimeTag::NearCritical
                   : RegimeTag::TheoremTwo;
  return regime;
}

bool zeeman_check(const Eigen::Ref<const Eigen::VectorXd>& b, const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const Eigen::Index k = b.size();
  detail::require(k >= 1 && a.rows() == k && a.cols() == k, "zeeman_check: need k >= 1 and a k x k matrix");
  detail::require((b.array() > 0.0).all() && (a.array() > 0.0).all(),
                  "zeeman_check: all growth rates and competition coefficients must be positive");
  for (Eigen::Index j = 0; j < k; ++j) {
    const double capacity = b(j) / a(j, j);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i < j && !(capacity < b(i) / a(i, j))) return false;
      if (i > j && !(capacity > b(i) / a(i, j))) return false;
    }
  }
  return true;
}

std::pair<Eigen::Vector2d, Eigen::Matrix2d> lotka_volterra_coefficients(const ModelParams& params) {
  params.validate();
  Eigen::Vector2d b(params.lambda1 - params.mu1, params.lambda2 - params.mu2);
  Eigen::Matrix2d a;
  a << params.lambda1, params.lambda1, params.lambda2, params.lambda2;
  return {b, a};
}

}  // namespace twostrain
