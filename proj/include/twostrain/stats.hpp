#pragma once

// Distributional checks of simulated extinction times against predicted laws.

#include <cstddef>
#include <functional>
#include <vector>

#include "twostrain/bdchain.hpp"
#include "twostrain/gillespie.hpp"
#include "twostrain/laws.hpp"

namespace twostrain {

/// Uncensored times plus the number of censored ones left out.
struct SampleSet {
  std::vector<double> values;
  std::size_t censored_count = 0;

  /// Throws PreconditionError on non-finite values.
  void validate() const;

  static SampleSet from_hitting_times(const std::vector<HittingTime>& times);

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

SampleSet kappa_samples(const std::vector<ExtinctionSample>& samples);
SampleSet tau_samples(const std::vector<ExtinctionSample>& samples);

/// sup_t |F_hat(t) - F(t)|, evaluated on both sides of every jump.
double ks_distance(const SampleSet& samples, const std::function<double(double)>& cdf);
double ks_distance(const SampleSet& samples, const GumbelLaw& law);
double ks_distance(const SampleSet& samples, const ExponentialLaw& law);
double ks_distance(const SampleSet& samples, const BdParams& law);

/// Asymptotic Kolmogorov critical value sqrt(-log(level / 2) / 2) / sqrt(m).
double ks_critical_value(std::size_t m, double level);

/// Method of moments: scale = std sqrt(6) / pi, location = mean - gamma scale.
GumbelLaw gumbel_fit_moments(const SampleSet& samples);

/// z_i = (x_i - location) / scale; censored count carried over.
SampleSet standardize(const SampleSet& samples, const GumbelLaw& law);

struct SummaryStats {
  std::size_t count = 0;
  std::size_t censored = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double ci_low = 0.0;    // mean -/+ 1.96 std / sqrt(count)
  double ci_high = 0.0;
};

SummaryStats summary_stats(const SampleSet& samples);

}  // namespace twostrain
