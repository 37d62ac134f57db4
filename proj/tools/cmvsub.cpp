// cmvsub: spectral-type sweeps for CMV operators.
//
//   cmvsub classify --config PATH [--theta N] [--jobs K] [--force]
//   cmvsub trace --config PATH --theta VALUE [--force]
//   cmvsub selftest
//
// Relative output paths are resolved against $CMVSUB_OUTPUT_DIR when set.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "cmvsub/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CMV subordinacy toolkit"};
  app.require_subcommand(1);

  std::string cfg_path;
  long theta_count = 0;
  int jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  bool force = false;
  auto* cls = app.add_subcommand("classify", "classify a theta grid");
  cls->add_option("--config", cfg_path, "JSON run configuration")->required();
  cls->add_option("--theta", theta_count, "grid size override")->check(CLI::PositiveNumber);
  cls->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  cls->add_flag("--force", force, "overwrite existing outputs");

  double theta = 0;
  auto* trc = app.add_subcommand("trace", "radial trace at one angle");
  trc->add_option("--config", cfg_path, "JSON run configuration")->required();
  trc->add_option("--theta", theta, "angle in [0, 2pi)")->required();
  trc->add_flag("--force", force, "overwrite existing outputs");

  bool flip = false;
  auto* st = app.add_subcommand("selftest", "run the embedded invariant checks");
  st->add_flag("--debug-flip-szego-sign", flip, "fault injection: flip a sign in S")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : cmv::kExitConfig;
  }

  if (st->parsed()) return cmv::run_selftest({flip}, std::cout);

  cmv::RunConfig cfg;
  try {
    cfg = cmv::load_config(cfg_path);
  } catch (const cmv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cmv::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cmv::kExitConfig;
  }

  cmv::RunOptions opt;
  opt.output_dir = cmv::output_dir_from_env();
  opt.jobs = jobs;
  opt.force = force;
  if (theta_count > 0) opt.theta_count = theta_count;
  if (cls->parsed()) return cmv::run_classify(cfg, opt, std::cerr);
  return cmv::run_trace(cfg, theta, opt, std::cerr);
}
