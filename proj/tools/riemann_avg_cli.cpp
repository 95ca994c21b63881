#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "riemann_avg/experiments.hpp"
#include "riemann_avg/selftest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Riemannian averaged SGD experiment driver"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* run = app.add_subcommand("run", "execute a JSON experiment config");
  run->add_option("config", config_path, "path to the config file")->required();
  run->add_option("--workers", workers, "replicate worker threads");

  std::string csv_dir;
  auto* report = app.add_subcommand("report", "aggregate per-replicate CSV output");
  report->add_option("dir", csv_dir, "directory holding run output")->required();

  auto* selftest = app.add_subcommand("selftest", "run the property suites");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return ravg::cmd_run(config_path, workers);
  if (report->parsed()) return ravg::cmd_report(csv_dir);
  if (selftest->parsed()) return ravg::run_selftest(std::cout) == 0 ? 0 : 1;
  return 1;
}
