#pragma once

// Config-driven batch runs: simulate, predict, fluid diagnostics and
// verification verdicts, persisted as CSV and JSON.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twostrain/gillespie.hpp"
#include "twostrain/laws.hpp"
#include "twostrain/model.hpp"

namespace twostrain {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Predictor { Thm2, NearCrit, SisSub, TauSuper };

std::string_view to_string(Predictor p);
Predictor predictor_from_string(std::string_view s);

/// Either fractions (alpha, beta), scaled by each N and floored, or fixed counts.
struct InitialCondition {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::int64_t> x1;
  std::optional<std::int64_t> x2;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct Tolerances {
  double ks_max = 0.08;
  double mean_abs_err_max = 0.15;  // in units of the predicted scale

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct OutputNames {
  std::string samples_prefix = "samples";  // <prefix>_N<n>.csv
  std::string summary = "summary.json";
  std::string report = "report.json";
  std::string prediction = "prediction.json";
  std::string fluid = "fluid.json";
  std::string fluid_trajectory = "fluid_trajectory.csv";

  friend bool operator==(const OutputNames&, const OutputNames&) = default;
};

struct FluidSettings {
  double t_end = 100.0;
  std::int64_t points = 501;
  double omega = 32.0;

  friend bool operator==(const FluidSettings&, const FluidSettings&) = default;
};

struct ExperimentConfig {
  ModelParams params;  // params.n is ignored; see n_values
  std::vector<std::int64_t> n_values;
  InitialCondition initial;
  std::uint64_t replicates = 1;
  std::uint64_t master_seed = 0;
  StopRule stop;
  Predictor predictor = Predictor::Thm2;
  OutputNames output;
  Tolerances tolerances;
  FluidSettings fluid;

  /// Throws ConfigError.
  void validate() const;

  ModelParams params_for(std::int64_t n) const;
  ChainState initial_state(std::int64_t n) const;
  double alpha_for(std::int64_t n) const;
  double beta_for(std::int64_t n) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a JSON document; unknown keys anywhere are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Complete JSON form (all defaults spelled out); parse_config inverts it.
std::string config_to_json(const ExperimentConfig& config);

/// 17 significant digits, '.' separator, independent of locale.
std::string format_double(double v);

inline constexpr std::string_view kSamplesHeader = "replicate,seed,kappa,kappa_censored,tau,tau_censored,events";

std::string samples_csv(const std::vector<ExtinctionSample>& samples);

std::filesystem::path samples_path(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                   std::int64_t n);

struct BatchResult {
  std::int64_t n = 0;
  std::vector<ExtinctionSample> samples;
  std::filesystem::path csv;
};

/// Simulates every N, writes one CSV per N and the summary JSON. Output
/// files are opened before any simulation so unwritable paths fail early.
std::vector<BatchResult> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                        unsigned workers = 0);

struct VerificationRow {
  std::int64_t n = 0;
  std::size_t m_effective = 0;
  std::size_t censored = 0;
  std::optional<double> ks;
  std::optional<double> ks_critical_99;
  std::optional<double> fitted_location;
  std::optional<double> fitted_scale;
  std::optional<double> predicted_location;
  std::optional<double> predicted_scale;
  std::optional<double> predicted_mean;
  std::optional<double> sample_mean;
  std::optional<double> mean_error;  // |sample mean - predicted mean| / scale
  bool pass = false;
  std::vector<std::string> reasons;  // why FAIL, plus advisory notes
};

struct VerificationReport {
  std::vector<VerificationRow> rows;
  std::uint64_t master_seed = 0;
  bool pass() const;
};

/// PASS per N iff ks <= ks_max and mean_error <= mean_abs_err_max. An
/// inapplicable predictor yields FAIL with a "regime" reason and no
/// simulation. Throws when every replicate of some N is censored.
VerificationReport verify(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned workers = 0);

/// Predictions per N written to output.prediction.
void write_predictions(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Fluid trajectory CSV and spectral / phase / certificate JSON.
void write_fluid_report(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace twostrain
