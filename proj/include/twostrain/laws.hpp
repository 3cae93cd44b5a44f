#pragma once

// Location-scale Gumbel and exponential laws used for every extinction-time
// prediction.

#include <cmath>
#include <numbers>

#include "twostrain/errors.hpp"
#include "twostrain/rng.hpp"

namespace twostrain {

/// Euler-Mascheroni constant, 20 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

struct GumbelLaw {
  double location = 0.0;
  double scale = 1.0;

  void validate() const {
    detail::require(std::isfinite(location), "GumbelLaw: location must be finite");
    detail::require(scale > 0.0 && std::isfinite(scale), "GumbelLaw: scale must be positive and finite");
  }

  friend bool operator==(const GumbelLaw&, const GumbelLaw&) = default;
};

struct ExponentialLaw {
  double mean = 1.0;

  void validate() const {
    detail::require(mean > 0.0 && std::isfinite(mean), "ExponentialLaw: mean must be positive and finite");
  }

  friend bool operator==(const ExponentialLaw&, const ExponentialLaw&) = default;
};

inline GumbelLaw standard_gumbel() { return {0.0, 1.0}; }

inline double cdf(const GumbelLaw& law, double t) {
  law.validate();
  return std::exp(-std::exp(-(t - law.location) / law.scale));
}

/// Exact inverse of cdf on (0, 1).
inline double quantile(const GumbelLaw& law, double p) {
  law.validate();
  detail::require(p > 0.0 && p < 1.0, "quantile: p must lie in (0, 1)");
  return law.location - law.scale * std::log(-std::log(p));
}

inline double mean(const GumbelLaw& law) {
  law.validate();
  return law.location + kEulerGamma * law.scale;
}

inline double variance(const GumbelLaw& law) {
  law.validate();
  return std::numbers::pi * std::numbers::pi * law.scale * law.scale / 6.0;
}

inline double cdf(const ExponentialLaw& law, double t) {
  law.validate();
  return t <= 0.0 ? 0.0 : -std::expm1(-t / law.mean);
}

inline double quantile(const ExponentialLaw& law, double p) {
  law.validate();
  detail::require(p >= 0.0 && p < 1.0, "quantile: p must lie in [0, 1)");
  return -law.mean * std::log1p(-p);
}

inline double mean(const ExponentialLaw& law) {
  law.validate();
  return law.mean;
}

inline double variance(const ExponentialLaw& law) {
  law.validate();
  return law.mean * law.mean;
}

/// Inverse-CDF draw.
inline double sample(const GumbelLaw& law, SplitMix64& rng) {
  law.validate();
  double u = rng.uniform();
  while (u == 0.0) u = rng.uniform();
  return law.location - law.scale * std::log(-std::log(u));
}

inline double sample(const ExponentialLaw& law, SplitMix64& rng) { return rng.exponential(1.0 / law.mean); }

}  // namespace twostrain
