#include "twostrain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace twostrain {

void SampleSet::validate() const {
  for (double v : values) detail::require(std::isfinite(v), "SampleSet: values must be finite");
}

SampleSet SampleSet::from_hitting_times(const std::vector<HittingTime>& times) {
  SampleSet s;
  s.values.reserve(times.size());
  for (const auto& h : times) {
    if (h.censored) {
      ++s.censored_count;
    } else {
      s.values.push_back(h.time);
    }
  }
  return s;
}

SampleSet kappa_samples(const std::vector<ExtinctionSample>& samples) {
  std::vector<HittingTime> k;
  k.reserve(samples.size());
  for (const auto& s : samples) k.push_back(s.kappa);
  return SampleSet::from_hitting_times(k);
}

SampleSet tau_samples(const std::vector<ExtinctionSample>& samples) {
  std::vector<HittingTime> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.tau);
  return SampleSet::from_hitting_times(t);
}

double ks_distance(const SampleSet& samples, const std::function<double(double)>& cdf) {
  samples.validate();
  if (samples.values.empty()) throw PreconditionError("ks_distance: no uncensored samples");
  std::vector<double> x = samples.values;
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    // Ties form one jump.
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / m), std::abs(static_cast<double>(j) / m - f)});
    i = j;
  }
  return d;
}

double ks_distance(const SampleSet& samples, const GumbelLaw& law) {
  law.validate();
  return ks_distance(samples, [&](double t) { return cdf(law, t); });
}

double ks_distance(const SampleSet& samples, const ExponentialLaw& law) {
  law.validate();
  return ks_distance(samples, [&](double t) { return cdf(law, t); });
}

double ks_distance(const SampleSet& samples, const BdParams& law) {
  law.validate();
  return ks_distance(samples, [&](double t) { return t < 0.0 ? 0.0 : bd_extinction_cdf(law, t); });
}

double ks_critical_value(std::size_t m, double level) {
  detail::require(m >= 1, "ks_critical_value: m must be >= 1");
  detail::require(level > 0.0 && level < 1.0, "ks_critical_value: level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(m));
}

SummaryStats summary_stats(const SampleSet& samples) {
  samples.validate();
  const std::size_t m = samples.values.size();
  detail::require(m >= 2, "summary_stats: need at least 2 uncensored samples");
  SummaryStats s;
  s.count = m;
  s.censored = samples.censored_count;
  // Two-pass for accuracy.
  double sum = 0.0;
  for (double v : samples.values) sum += v;
  s.mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (double v : samples.values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(m - 1);
  const double half = 1.96 * std::sqrt(s.variance / static_cast<double>(m));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

GumbelLaw gumbel_fit_moments(const SampleSet& samples) {
  const SummaryStats s = summary_stats(samples);
  if (!(s.variance > 0.0)) throw DomainError("gumbel_fit_moments: sample has zero variance");
  GumbelLaw law;
  law.scale = std::sqrt(s.variance) * std::sqrt(6.0) / std::numbers::pi;
  law.location = s.mean - kEulerGamma * law.scale;
  return law;
}

SampleSet standardize(const SampleSet& samples, const GumbelLaw& law) {
  law.validate();
  SampleSet out;
  out.censored_count = samples.censored_count;
  out.values.reserve(samples.values.size());
  for (double v : samples.values) out.values.push_back((v - law.location) / law.scale);
  return out;
}

}  // namespace twostrain
