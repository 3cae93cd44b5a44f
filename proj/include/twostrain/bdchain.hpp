#pragma once

// Extinction law of the subcritical linear birth-death chain (per-head birth
// lambda, death mu > lambda) and its Gumbel limit for large initial counts.

#include <cstdint>
#include <optional>
#include <string>

#include "twostrain/laws.hpp"

namespace twostrain {

struct BdParams {
  double lambda = 0.0;
  double mu = 1.0;
  std::int64_t y0 = 1;

  /// Throws RegimeError when mu - lambda < kBdCriticalGap and
  /// PreconditionError for negative or non-finite inputs.
  void validate() const;

  friend bool operator==(const BdParams&, const BdParams&) = default;
};

inline constexpr double kBdCriticalGap = 1e-12;

/// P(T <= t) for the extinction time T started from y0.
double bd_extinction_cdf(const BdParams& p, double t);

/// Inverse of bd_extinction_cdf, by solving for e^{-(mu - lambda) t}.
double bd_extinction_quantile(const BdParams& p, double prob);

struct BdGumbelLimit {
  GumbelLaw law;
  // Set when y0 (mu - lambda) is small, so the limit is a poor description.
  std::optional<std::string> note;
};

/// location = (log y0 + log(mu - lambda) - log mu) / (mu - lambda), scale = 1 / (mu - lambda).
BdGumbelLimit bd_gumbel_limit(const BdParams& p);

/// y0 (mu - lambda) below which bd_gumbel_limit attaches a note.
inline constexpr double kBdGumbelApplicableMin = 10.0;

}  // namespace twostrain
