#include "twostrain/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "twostrain/bdchain.hpp"
#include "twostrain/fluid.hpp"
#include "twostrain/parallel.hpp"
#include "twostrain/stats.hpp"
#include "twostrain/theory.hpp"

namespace twostrain {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVersion = "1.0.0";

// ---- config parsing ----

void check_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

const Json& required(const Json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key \"" + key + "\"");
  return *it;
}

double as_double(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::int64_t as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw ConfigError(where + ": integer out of range");
  }
  return v.get<std::int64_t>();
}

std::uint64_t as_uint(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected a non-negative integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto i = v.get<std::int64_t>();
  if (i < 0) throw ConfigError(where + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(i);
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

template <class F>
void optional_field(const Json& obj, const char* key, const std::string& where, F&& assign) {
  auto it = obj.find(key);
  if (it != obj.end()) assign(*it, where + "." + key);
}

ExperimentConfig from_json(const Json& j) {
  check_keys(j, "config",
             {"model", "n_values", "initial", "replicates", "master_seed", "stop", "predictor", "output",
              "tolerances", "fluid"});
  ExperimentConfig c;

  const Json& m = required(j, "config", "model");
  check_keys(m, "model", {"lambda1", "mu1", "lambda2", "mu2"});
  c.params.lambda1 = as_double(required(m, "model", "lambda1"), "model.lambda1");
  c.params.mu1 = as_double(required(m, "model", "mu1"), "model.mu1");
  c.params.lambda2 = as_double(required(m, "model", "lambda2"), "model.lambda2");
  c.params.mu2 = as_double(required(m, "model", "mu2"), "model.mu2");

  const Json& ns = required(j, "config", "n_values");
  if (!ns.is_array()) throw ConfigError("n_values: expected an array");
  for (std::size_t i = 0; i < ns.size(); ++i) c.n_values.push_back(as_int(ns[i], "n_values[" + std::to_string(i) + "]"));

  const Json& init = required(j, "config", "initial");
  check_keys(init, "initial", {"alpha", "beta", "x1", "x2"});
  optional_field(init, "alpha", "initial", [&](const Json& v, const std::string& w) { c.initial.alpha = as_double(v, w); });
  optional_field(init, "beta", "initial", [&](const Json& v, const std::string& w) { c.initial.beta = as_double(v, w); });
  optional_field(init, "x1", "initial", [&](const Json& v, const std::string& w) { c.initial.x1 = as_int(v, w); });
  optional_field(init, "x2", "initial", [&](const Json& v, const std::string& w) { c.initial.x2 = as_int(v, w); });

  c.replicates = as_uint(required(j, "config", "replicates"), "replicates");
  c.master_seed = as_uint(required(j, "config", "master_seed"), "master_seed");
  try {
    c.predictor = predictor_from_string(as_string(required(j, "config", "predictor"), "predictor"));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }

  if (auto it = j.find("stop"); it != j.end()) {
    check_keys(*it, "stop", {"max_events", "max_time", "stop_on_kappa", "stop_on_absorption"});
    optional_field(*it, "max_events", "stop", [&](const Json& v, const std::string& w) { c.stop.max_events = as_uint(v, w); });
    optional_field(*it, "max_time", "stop", [&](const Json& v, const std::string& w) { c.stop.max_time = as_double(v, w); });
    optional_field(*it, "stop_on_kappa", "stop", [&](const Json& v, const std::string& w) { c.stop.stop_on_kappa = as_bool(v, w); });
    optional_field(*it, "stop_on_absorption", "stop",
                   [&](const Json& v, const std::string& w) { c.stop.stop_on_absorption = as_bool(v, w); });
  }
  if (auto it = j.find("output"); it != j.end()) {
    check_keys(*it, "output", {"samples_prefix", "summary", "report", "prediction", "fluid", "fluid_trajectory"});
    auto& o = c.output;
    optional_field(*it, "samples_prefix", "output", [&](const Json& v, const std::string& w) { o.samples_prefix = as_string(v, w); });
    optional_field(*it, "summary", "output", [&](const Json& v, const std::string& w) { o.summary = as_string(v, w); });
    optional_field(*it, "report", "output", [&](const Json& v, const std::string& w) { o.report = as_string(v, w); });
    optional_field(*it, "prediction", "output", [&](const Json& v, const std::string& w) { o.prediction = as_string(v, w); });
    optional_field(*it, "fluid", "output", [&](const Json& v, const std::string& w) { o.fluid = as_string(v, w); });
    optional_field(*it, "fluid_trajectory", "output",
                   [&](const Json& v, const std::string& w) { o.fluid_trajectory = as_string(v, w); });
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    check_keys(*it, "tolerances", {"ks_max", "mean_abs_err_max"});
    optional_field(*it, "ks_max", "tolerances", [&](const Json& v, const std::string& w) { c.tolerances.ks_max = as_double(v, w); });
    optional_field(*it, "mean_abs_err_max", "tolerances",
                   [&](const Json& v, const std::string& w) { c.tolerances.mean_abs_err_max = as_double(v, w); });
  }
  if (auto it = j.find("fluid"); it != j.end()) {
    check_keys(*it, "fluid", {"t_end", "points", "omega"});
    optional_field(*it, "t_end", "fluid", [&](const Json& v, const std::string& w) { c.fluid.t_end = as_double(v, w); });
    optional_field(*it, "points", "fluid", [&](const Json& v, const std::string& w) { c.fluid.points = as_int(v, w); });
    optional_field(*it, "omega", "fluid", [&](const Json& v, const std::string& w) { c.fluid.omega = as_double(v, w); });
  }
  c.validate();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["model"] = {{"lambda1", c.params.lambda1}, {"mu1", c.params.mu1}, {"lambda2", c.params.lambda2}, {"mu2", c.params.mu2}};
  j["n_values"] = c.n_values;
  Json init = Json::object();
  if (c.initial.alpha) init["alpha"] = *c.initial.alpha;
  if (c.initial.beta) init["beta"] = *c.initial.beta;
  if (c.initial.x1) init["x1"] = *c.initial.x1;
  if (c.initial.x2) init["x2"] = *c.initial.x2;
  j["initial"] = init;
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["stop"] = {{"max_events", c.stop.max_events},
               {"max_time", c.stop.max_time},
               {"stop_on_kappa", c.stop.stop_on_kappa},
               {"stop_on_absorption", c.stop.stop_on_absorption}};
  j["predictor"] = std::string(to_string(c.predictor));
  j["output"] = {{"samples_prefix", c.output.samples_prefix}, {"summary", c.output.summary},
                 {"report", c.output.report},                 {"prediction", c.output.prediction},
                 {"fluid", c.output.fluid},                   {"fluid_trajectory", c.output.fluid_trajectory}};
  j["tolerances"] = {{"ks_max", c.tolerances.ks_max}, {"mean_abs_err_max", c.tolerances.mean_abs_err_max}};
  j["fluid"] = {{"t_end", c.fluid.t_end}, {"points", c.fluid.points}, {"omega", c.fluid.omega}};
  return j;
}

// ---- output helpers ----

Json opt(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json environment(unsigned workers) {
  Json env;
  env["version"] = kVersion;
  env["compiler"] = __VERSION__;
  env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  env["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  env["prng"] = "splitmix64";
  env["workers"] = workers == 0 ? default_workers() : workers;
  return env;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_out_dir(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());
}

// Opens (and truncates) every file a run will write, before any simulation.
void probe_outputs(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) open_output(p);
}

enum class Observable { Kappa, Tau };

Observable observable_for(Predictor p) {
  return (p == Predictor::SisSub || p == Predictor::TauSuper) ? Observable::Tau : Observable::Kappa;
}

struct LawChoice {
  std::optional<GumbelLaw> gumbel;
  std::optional<ExponentialLaw> exponential;
  std::vector<std::string> notes;
  Json regime;
};

Json regime_json(const Regime& r) {
  Json j;
  j["tag"] = std::string(to_string(r.tag));
  j["statistic"] = opt(r.statistic);
  j["separation"] = opt(r.separation);
  j["well_separated"] = r.well_separated;
  j["near_critical_applicable"] = r.near_critical_applicable;
  return j;
}

// Throws RegimeError / DomainError when the predictor does not apply.
LawChoice predict_for(const ExperimentConfig& c, std::int64_t n) {
  const ModelParams p = c.params_for(n);
  LawChoice out;
  switch (c.predictor) {
    case Predictor::Thm2: {
      auto g = predict_kappa_thm2(p, c.alpha_for(n), c.beta_for(n));
      out.gumbel = g.law;
      out.notes = g.notes;
      out.regime = regime_json(g.regime);
      break;
    }
    case Predictor::NearCrit: {
      auto g = predict_kappa_nearcrit(p, c.alpha_for(n), c.beta_for(n));
      out.gumbel = g.law;
      out.notes = g.notes;
      out.regime = regime_json(g.regime);
      break;
    }
    case Predictor::SisSub: {
      auto g = predict_sis_subcritical(p.lambda1, p.mu1, n, c.alpha_for(n));
      out.gumbel = g.law;
      out.notes = g.notes;
      out.regime = regime_json(g.regime);
      break;
    }
    case Predictor::TauSuper: {
      auto e = predict_tau_supercritical(p.lambda1, p.mu1, n);
      if (std::isinf(e.law.mean)) throw DomainError("predicted mean overflows double precision");
      out.exponential = e.law;
      out.notes = e.notes;
      out.regime = Json::object();
      break;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Predictor p) {
  switch (p) {
    case Predictor::Thm2: return "thm2";
    case Predictor::NearCrit: return "nearcrit";
    case Predictor::SisSub: return "sis_sub";
    case Predictor::TauSuper: return "tau_super";
  }
  return "thm2";
}

Predictor predictor_from_string(std::string_view s) {
  if (s == "thm2") return Predictor::Thm2;
  if (s == "nearcrit") return Predictor::NearCrit;
  if (s == "sis_sub") return Predictor::SisSub;
  if (s == "tau_super") return Predictor::TauSuper;
  throw PreconditionError("predictor must be one of thm2, nearcrit, sis_sub, tau_super; got \"" + std::string(s) + "\"");
}

void ExperimentConfig::validate() const {
  try {
    ModelParams probe = params;
    probe.n = 1;
    probe.validate();
    stop.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (n_values.empty()) throw ConfigError("n_values: at least one N is required");
  for (auto n : n_values) {
    if (n < 1) throw ConfigError("n_values: every N must be >= 1");
  }
  if (replicates < 1) throw ConfigError("replicates must be >= 1");

  const bool fractions = initial.alpha || initial.beta;
  const bool counts = initial.x1 || initial.x2;
  if (fractions == counts) throw ConfigError("initial: give either alpha and beta, or x1 and x2");
  if (fractions) {
    if (!(initial.alpha && initial.beta)) throw ConfigError("initial: alpha and beta must both be given");
    const double a = *initial.alpha, b = *initial.beta;
    if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0)) throw ConfigError("initial: need alpha, beta >= 0 and alpha + beta <= 1");
  } else {
    if (!(initial.x1 && initial.x2)) throw ConfigError("initial: x1 and x2 must both be given");
    for (auto n : n_values) {
      if (!ChainState{*initial.x1, *initial.x2}.valid_for(n)) {
        throw ConfigError("initial: counts are not a valid state for N = " + std::to_string(n));
      }
    }
  }

  if (observable_for(predictor) == Observable::Tau) {
    if (stop.stop_on_kappa) {
      throw ConfigError("predictor " + std::string(to_string(predictor)) + " needs stop.stop_on_kappa = false");
    }
    const bool single = fractions ? *initial.beta == 0.0 : *initial.x2 == 0;
    if (!single) throw ConfigError("predictor " + std::string(to_string(predictor)) + " is single-strain: beta / x2 must be 0");
  }

  if (!(tolerances.ks_max > 0.0 && tolerances.ks_max <= 1.0)) throw ConfigError("tolerances.ks_max must lie in (0, 1]");
  if (!(tolerances.mean_abs_err_max > 0.0)) throw ConfigError("tolerances.mean_abs_err_max must be positive");
  if (!(fluid.t_end > 0.0 && std::isfinite(fluid.t_end))) throw ConfigError("fluid.t_end must be positive");
  if (fluid.points < 2) throw ConfigError("fluid.points must be >= 2");
  if (!(fluid.omega > 0.0)) throw ConfigError("fluid.omega must be positive");
  for (const auto* name : {&output.samples_prefix, &output.summary, &output.report, &output.prediction, &output.fluid,
                           &output.fluid_trajectory}) {
    if (name->empty()) throw ConfigError("output: file names must be non-empty");
  }
}

ModelParams ExperimentConfig::params_for(std::int64_t n) const {
  ModelParams p = params;
  p.n = n;
  return p;
}

ChainState ExperimentConfig::initial_state(std::int64_t n) const {
  if (initial.x1) return {*initial.x1, *initial.x2};
  const double nn = static_cast<double>(n);
  return {static_cast<std::int64_t>(std::floor(*initial.alpha * nn)),
          static_cast<std::int64_t>(std::floor(*initial.beta * nn))};
}

double ExperimentConfig::alpha_for(std::int64_t n) const {
  return initial.alpha ? *initial.alpha : static_cast<double>(*initial.x1) / static_cast<double>(n);
}

double ExperimentConfig::beta_for(std::int64_t n) const {
  return initial.beta ? *initial.beta : static_cast<double>(*initial.x2) / static_cast<double>(n);
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(2); }

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string samples_csv(const std::vector<ExtinctionSample>& samples) {
  std::string out(kSamplesHeader);
  out += '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    out += std::to_string(i);
    out += ',';
    out += std::to_string(s.seed);
    out += ',';
    out += format_double(s.kappa.time);
    out += s.kappa.censored ? ",1," : ",0,";
    out += format_double(s.tau.time);
    out += s.tau.censored ? ",1," : ",0,";
    out += std::to_string(s.events);
    out += '\n';
  }
  return out;
}

fs::path samples_path(const ExperimentConfig& config, const fs::path& out_dir, std::int64_t n) {
  return out_dir / (config.output.samples_prefix + "_N" + std::to_string(n) + ".csv");
}

std::vector<BatchResult> run_experiment(const ExperimentConfig& config, const fs::path& out_dir, unsigned workers) {
  config.validate();
  prepare_out_dir(out_dir);
  std::vector<fs::path> paths;
  for (auto n : config.n_values) paths.push_back(samples_path(config, out_dir, n));
  paths.push_back(out_dir / config.output.summary);
  probe_outputs(paths);

  std::vector<BatchResult> results;
  Json per_n = Json::array();
  for (auto n : config.n_values) {
    BatchResult r;
    r.n = n;
    r.csv = samples_path(config, out_dir, n);
    r.samples = sample_extinction_times(config.params_for(n), config.initial_state(n), config.master_seed,
                                        config.replicates, config.stop, workers);
    write_text(r.csv, samples_csv(r.samples));

    Json row;
    row["n"] = n;
    row["csv"] = r.csv.filename().string();
    const ChainState init = config.initial_state(n);
    row["initial_state"] = {init.x1, init.x2};
    for (auto [name, set] : {std::pair{"kappa", kappa_samples(r.samples)}, std::pair{"tau", tau_samples(r.samples)}}) {
      Json s;
      s["uncensored"] = set.values.size();
      s["censored"] = set.censored_count;
      if (set.values.size() >= 2) {
        const auto st = summary_stats(set);
        s["mean"] = num(st.mean);
        s["variance"] = num(st.variance);
        s["mean_ci_95"] = {num(st.ci_low), num(st.ci_high)};
      }
      row[name] = s;
    }
    std::uint64_t events = 0;
    for (const auto& s : r.samples) events += s.events;
    row["total_events"] = events;
    per_n.push_back(row);
    results.push_back(std::move(r));
  }

  Json summary;
  summary["config"] = to_json(config);
  summary["results"] = per_n;
  summary["environment"] = environment(workers);
  write_text(out_dir / config.output.summary, summary.dump(2) + "\n");
  return results;
}

bool VerificationReport::pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
}

VerificationReport verify(const ExperimentConfig& config, const fs::path& out_dir, unsigned workers) {
  config.validate();
  prepare_out_dir(out_dir);
  std::vector<fs::path> paths;
  for (auto n : config.n_values) paths.push_back(samples_path(config, out_dir, n));
  paths.push_back(out_dir / config.output.report);
  probe_outputs(paths);

  VerificationReport report;
  report.master_seed = config.master_seed;
  Json rows = Json::array();

  for (auto n : config.n_values) {
    VerificationRow row;
    row.n = n;
    Json extra;

    std::optional<LawChoice> law;
    try {
      law = predict_for(config, n);
    } catch (const RegimeError& e) {
      row.reasons.push_back(std::string("regime: ") + e.what());
    } catch (const DomainError& e) {
      row.reasons.push_back(std::string("regime: ") + e.what());
    } catch (const PreconditionError& e) {
      row.reasons.push_back(std::string("regime: ") + e.what());
    }

    if (law) {
      const auto samples = sample_extinction_times(config.params_for(n), config.initial_state(n), config.master_seed,
                                                   config.replicates, config.stop, workers);
      write_text(samples_path(config, out_dir, n), samples_csv(samples));
      const SampleSet set = observable_for(config.predictor) == Observable::Kappa ? kappa_samples(samples)
                                                                                  : tau_samples(samples);
      if (set.values.empty()) {
        throw std::runtime_error("verify: all " + std::to_string(samples.size()) + " replicates censored at N = " +
                                 std::to_string(n));
      }
      row.m_effective = set.values.size();
      row.censored = set.censored_count;
      row.ks_critical_99 = ks_critical_value(set.values.size(), 0.01);
      double sum = 0.0;
      for (double v : set.values) sum += v;
      row.sample_mean = sum / static_cast<double>(set.values.size());

      double scale = 1.0;
      if (law->gumbel) {
        const GumbelLaw g = *law->gumbel;
        row.ks = ks_distance(standardize(set, g), standard_gumbel());
        row.predicted_location = g.location;
        row.predicted_scale = g.scale;
        row.predicted_mean = mean(g);
        scale = g.scale;
      } else {
        const ExponentialLaw e = *law->exponential;
        // Shape check only: the asymptotic mean is matched separately below.
        SampleSet z = set;
        for (double& v : z.values) v /= *row.sample_mean;
        row.ks = ks_distance(z, ExponentialLaw{1.0});
        row.predicted_scale = e.mean;
        row.predicted_mean = e.mean;
        scale = e.mean;
      }
      try {
        const GumbelLaw fit = gumbel_fit_moments(set);
        row.fitted_location = fit.location;
        row.fitted_scale = fit.scale;
      } catch (const std::exception&) {
        row.reasons.push_back("note: moment fit unavailable (fewer than 2 samples or zero variance)");
      }
      row.mean_error = std::abs(*row.sample_mean - *row.predicted_mean) / scale;

      const bool ks_ok = *row.ks <= config.tolerances.ks_max;
      const bool mean_ok = *row.mean_error <= config.tolerances.mean_abs_err_max;
      row.pass = ks_ok && mean_ok;
      if (!ks_ok) row.reasons.push_back("ks: " + format_double(*row.ks) + " > " + format_double(config.tolerances.ks_max));
      if (!mean_ok) {
        row.reasons.push_back("mean: error " + format_double(*row.mean_error) + " scale units > " +
                              format_double(config.tolerances.mean_abs_err_max));
      }
      if (set.censored_count > 0) {
        row.reasons.push_back("note: " + std::to_string(set.censored_count) + " censored replicates excluded");
      }
      for (const auto& note : law->notes) row.reasons.push_back("note: " + note);
      extra["regime"] = law->regime;
    }

    Json r;
    r["n"] = row.n;
    r["m_effective"] = row.m_effective;
    r["censored"] = row.censored;
    r["ks"] = opt(row.ks);
    r["ks_critical_99"] = opt(row.ks_critical_99);
    r["fitted_location"] = opt(row.fitted_location);
    r["fitted_scale"] = opt(row.fitted_scale);
    r["predicted_location"] = opt(row.predicted_location);
    r["predicted_scale"] = opt(row.predicted_scale);
    r["predicted_mean"] = opt(row.predicted_mean);
    r["sample_mean"] = opt(row.sample_mean);
    r["mean_error"] = opt(row.mean_error);
    r["verdict"] = row.pass ? "PASS" : "FAIL";
    r["reasons"] = row.reasons;
    if (extra.contains("regime")) r["regime"] = extra["regime"];
    rows.push_back(r);
    report.rows.push_back(std::move(row));
  }

  Json out;
  out["config"] = to_json(config);
  out["predictor"] = std::string(to_string(config.predictor));
  out["rows"] = rows;
  out["verdict"] = report.pass() ? "PASS" : "FAIL";
  out["ks_threshold_note"] = "ks_critical_99 is the asymptotic Kolmogorov value at level 0.01";
  out["environment"] = environment(workers);
  write_text(out_dir / config.output.report, out.dump(2) + "\n");
  return report;
}

void write_predictions(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  prepare_out_dir(out_dir);
  const fs::path path = out_dir / config.output.prediction;
  probe_outputs({path});

  Json preds = Json::array();
  for (auto n : config.n_values) {
    Json p;
    p["n"] = n;
    p["predictor"] = std::string(to_string(config.predictor));
    try {
      const LawChoice law = predict_for(config, n);
      if (law.gumbel) {
        p["law"] = "gumbel";
        p["location"] = num(law.gumbel->location);
        p["scale"] = num(law.gumbel->scale);
        p["mean"] = num(mean(*law.gumbel));
        p["variance"] = num(variance(*law.gumbel));
      } else {
        const auto e = predict_tau_supercritical(config.params.lambda1, config.params.mu1, n);
        p["law"] = "exponential";
        p["mean"] = num(e.law.mean);
        p["log_mean"] = num(e.log_mean);
        p["v"] = num(e.v);
      }
      p["regime"] = law.regime;
      p["notes"] = law.notes;
    } catch (const RegimeError& e) {
      p["error"] = std::string("regime: ") + e.what();
    } catch (const DomainError& e) {
      p["error"] = std::string("domain: ") + e.what();
    }
    if (config.predictor == Predictor::Thm2) {
      try {
        const auto pb = phase_breakdown(config.params_for(n), config.alpha_for(n), config.beta_for(n));
        p["phase_breakdown"] = {{"burn_in", num(pb.burn_in)},
                                {"intermediate", num(pb.intermediate)},
                                {"t0", num(pb.t0)},
                                {"t_cross", num(pb.t_cross)},
                                {"final_location", num(pb.final_law.location)},
                                {"final_scale", num(pb.final_law.scale)},
                                {"total_location", num(pb.total_law.location)},
                                {"total_scale", num(pb.total_law.scale)}};
      } catch (const std::domain_error& e) {
        p["phase_breakdown"] = {{"error", e.what()}};
      }
    }
    preds.push_back(p);
  }
  Json out;
  out["config"] = to_json(config);
  out["predictions"] = preds;
  out["environment"] = environment(1);
  write_text(path, out.dump(2) + "\n");
}

void write_fluid_report(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  prepare_out_dir(out_dir);
  const fs::path json_path = out_dir / config.output.fluid;
  const fs::path csv_path = out_dir / config.output.fluid_trajectory;
  probe_outputs({json_path, csv_path});

  const std::int64_t n0 = config.n_values.front();
  const ModelParams p = config.params_for(n0);
  const FluidState x0{config.alpha_for(n0), config.beta_for(n0)};
  const FluidTrajectory path = integrate(p, x0, config.fluid.t_end);

  const auto [r01, r02] = reproductive_ratios(p);
  const bool lyapunov_ok = r01 >= r02;
  std::string csv = "t,x1,x2,lyapunov,relation_residual\n";
  for (std::int64_t k = 0; k < config.fluid.points; ++k) {
    const double t = config.fluid.t_end * static_cast<double>(k) / static_cast<double>(config.fluid.points - 1);
    const FluidState x = path(t);
    csv += format_double(t) + ',' + format_double(x(0)) + ',' + format_double(x(1)) + ',';
    csv += lyapunov_ok ? format_double(lyapunov_value(p, x)) : std::string("nan");
    csv += ',';
    csv += (x(0) > 0.0 && x(1) > 0.0 && x0(0) > 0.0 && x0(1) > 0.0) ? format_double(relation_residual(p, x0, x, t))
                                                                       : std::string("nan");
    csv += '\n';
  }
  write_text(csv_path, csv);

  Json out;
  out["config"] = to_json(config);
  out["x0"] = {x0(0), x0(1)};
  out["x_end"] = {path.back()(0), path.back()(1)};
  try {
    const SpectralData s = eigen_decomposition(p);
    out["spectral"] = {{"eta1", s.eta1},     {"eta2", s.eta2}, {"a", s.a},   {"L", s.L},
                       {"Ltilde", s.Ltilde}, {"L1", s.L1},     {"b", num(s.b)}, {"a1", num(s.a1)},
                       {"a2", s.a2},         {"repeated", s.repeated},   {"ill_conditioned", s.ill_conditioned}};
    out["decay_hypothesis_radius"] = decay_hypothesis_radius(p);
    double t0 = 0.0;
    try {
      t0 = burn_in_time(p, x0);
      out["burn_in_time"] = t0;
    } catch (const std::exception& e) {
      out["burn_in_time"] = {{"error", e.what()}};
    }
    Json per_n = Json::array();
    for (auto n : config.n_values) {
      Json row;
      row["n"] = n;
      const ModelParams pn = config.params_for(n);
      try {
        const FluidState xt0 = integrate(pn, x0, t0).back();
        row["phase_time_tN"] = phase_time_tN(pn, n, xt0);
      } catch (const std::exception& e) {
        row["phase_time_tN"] = {{"error", e.what()}};
      }
      try {
        row["x2_crossing_time"] = x2_crossing_time(pn, x0, std::pow(static_cast<double>(n), -0.25));
      } catch (const std::exception& e) {
        row["x2_crossing_time"] = {{"error", e.what()}};
      }
      try {
        const auto b = lt_approx_bound(pn, n, config.fluid.omega);
        row["lt_approx_bound"] = {{"omega", config.fluid.omega},
                                  {"deviation_bound", num(b.deviation_bound)},
                                  {"probability_bound", num(b.probability_bound)},
                                  {"horizon", num(b.horizon)},
                                  {"vacuous", b.vacuous}};
      } catch (const std::exception& e) {
        row["lt_approx_bound"] = {{"error", e.what()}};
      }
      per_n.push_back(row);
    }
    out["per_n"] = per_n;
  } catch (const RegimeError& e) {
    out["spectral"] = {{"error", e.what()}};
  }
  out["environment"] = environment(1);
  write_text(json_path, out.dump(2) + "\n");
}

}  // namespace twostrain
