#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rouleau/errors.hpp"
#include "rouleau/output.hpp"
#include "rouleau/pipeline.hpp"
#include "rouleau/scenario.hpp"
#include "rouleau/verify.hpp"

using namespace rouleau;

int main(int argc, char** argv) {
  CLI::App app{"rouleau: coagulation of rouleaux, gelation and self-similar diagnostics"};
  app.require_subcommand(1);

  int threads = 1;
  bool deterministic = true;
  double tau_max = 0.0, trunc_R = 0.0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic,!--no-deterministic", deterministic,
                  "take ensemble seeds from the scenario (default on)");
    sub->add_option("--tau-max", tau_max, "override the self-similar horizon")->check(CLI::PositiveNumber);
    sub->add_option("--truncation-R", trunc_R, "override the kernel truncation R")->check(CLI::PositiveNumber);
  };

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
  run->add_option("scenario", scenario_path, "scenario TOML file")->required();
  common(run);

  std::string suite, json_out;
  auto* ver = app.add_subcommand("verify", "run acceptance checks");
  ver->add_option("suite", suite, "oracles | localization | laplace | all")->required();
  ver->add_option("--json", json_out, "also write the table as JSON");
  common(ver);

  std::string dir;
  auto* rep = app.add_subcommand("report", "summarize an output directory");
  rep->add_option("output_dir", dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      Scenario s = load_scenario(scenario_path);
      if (tau_max > 0) override_tau_max(s, tau_max);
      if (trunc_R > 0) override_truncation(s, trunc_R);
      RunOptions ro;
      ro.threads = threads;
      ro.deterministic = deterministic;
      run_scenario(s, ro, std::cerr);
      return 0;
    }
    if (*ver) {
      suite_criteria(suite);  // reject unknown suites before any work
      VerifyOptions vo;
      vo.threads = threads;
      if (tau_max > 0) vo.tau_max = tau_max;
      if (trunc_R > 0) vo.R = trunc_R;
      Verifier v(vo, &std::cerr);
      auto rows = v.run_suite(suite);
      print_table(rows, std::cout);
      if (!json_out.empty()) write_json(json_out, rows_json(rows));
      for (const auto& r : rows)
        if (!r.pass) return 1;
      return 0;
    }
    if (*rep) {
      report(dir, std::cout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
