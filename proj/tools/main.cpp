// twostrain simulate|predict|fluid|verify --config <path> --out <dir> [--workers k] [--seed s]

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "twostrain/errors.hpp"
#include "twostrain/experiment.hpp"

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2, kRuntime = 3;

struct Options {
  std::string config;
  std::string out;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "experiment JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory")->required();
  sub->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "override master_seed");
}

int run(const std::string& cmd, const Options& o) {
  twostrain::ExperimentConfig config = twostrain::load_config(o.config);
  if (o.seed) config.master_seed = *o.seed;

  if (cmd == "simulate") {
    const auto res = twostrain::run_experiment(config, o.out, o.workers);
    for (const auto& r : res) std::cout << "N=" << r.n << " -> " << r.csv.string() << '\n';
    return kOk;
  }
  if (cmd == "predict") {
    twostrain::write_predictions(config, o.out);
    return kOk;
  }
  if (cmd == "fluid") {
    twostrain::write_fluid_report(config, o.out);
    return kOk;
  }
  const auto report = twostrain::verify(config, o.out, o.workers);
  for (const auto& row : report.rows) {
    std::cout << "N=" << row.n << ' ' << (row.pass ? "PASS" : "FAIL");
    if (row.ks) std::cout << " ks=" << twostrain::format_double(*row.ks);
    if (row.mean_error) std::cout << " mean_err=" << twostrain::format_double(*row.mean_error);
    std::cout << '\n';
    for (const auto& why : row.reasons) std::cout << "  " << why << '\n';
  }
  std::cout << (report.pass() ? "PASS" : "FAIL") << '\n';
  return report.pass() ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-strain SIS competition: exact simulation and analytic checks"};
  app.require_subcommand(1);
  Options opts;
  for (const char* name : {"simulate", "predict", "fluid", "verify"}) {
    add_common(app.add_subcommand(name), opts);
  }
  app.get_subcommand("simulate")->description("simulate every N and write samples CSV plus summary JSON");
  app.get_subcommand("predict")->description("write predicted laws; no simulation");
  app.get_subcommand("fluid")->description("integrate the fluid limit; phase times and certificates");
  app.get_subcommand("verify")->description("simulate and test against the predicted law");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, opts);
  } catch (const twostrain::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const twostrain::PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
