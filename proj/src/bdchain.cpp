#include "twostrain/bdchain.hpp"

#include <cmath>
#include <limits>

namespace twostrain {

void BdParams::validate() const {
  detail::require(std::isfinite(lambda) && lambda >= 0.0, "BdParams: lambda must be finite and >= 0");
  detail::require(std::isfinite(mu) && mu > 0.0, "BdParams: mu must be finite and > 0");
  detail::require(y0 >= 0, "BdParams: y0 must be >= 0");
  if (!(mu - lambda >= kBdCriticalGap)) {
    throw RegimeError("BdParams: the extinction law needs mu - lambda >= 1e-12 (subcritical chain)");
  }
}

double bd_extinction_cdf(const BdParams& p, double t) {
  p.validate();
  detail::require(t >= 0.0, "bd_extinction_cdf: t must be >= 0");
  if (p.y0 == 0) return 1.0;
  if (std::isinf(t)) return 1.0;
  const double r = p.mu - p.lambda;
  const double e = std::exp(-r * t);
  // One lineage survives to t with probability r e / (mu - lambda e).
  const double survive = r * e / (p.mu - p.lambda * e);
  return std::exp(static_cast<double>(p.y0) * std::log1p(-survive));
}

double bd_extinction_quantile(const BdParams& p, double prob) {
  p.validate();
  detail::require(prob >= 0.0 && prob < 1.0, "bd_extinction_quantile: prob must lie in [0, 1)");
  if (p.y0 == 0 || prob == 0.0) return 0.0;
  const double r = p.mu - p.lambda;
  // Per-lineage survival s = 1 - prob^{1/y0}; solve s = r e / (mu - lambda e) for e.
  const double s = -std::expm1(std::log(prob) / static_cast<double>(p.y0));
  const double e = s * p.mu / (r + p.lambda * s);
  return -std::log(e) / r;
}

BdGumbelLimit bd_gumbel_limit(const BdParams& p) {
  p.validate();
  detail::require(p.y0 >= 1, "bd_gumbel_limit: y0 must be >= 1");
  const double r = p.mu - p.lambda;
  BdGumbelLimit out;
  out.law.scale = 1.0 / r;
  out.law.location = (std::log(static_cast<double>(p.y0)) + std::log(r) - std::log(p.mu)) / r;
  const double size = static_cast<double>(p.y0) * r;
  if (size < kBdGumbelApplicableMin) {
    out.note = "y0 (mu - lambda) = " + std::to_string(size) + " is small; the Gumbel limit needs it large";
  }
  return out;
}

}  // namespace twostrain
