#pragma once
// Batch drivers behind the command-line tool.

#include <iosfwd>
#include <optional>
#include <string>

#include "cmvsub/config.hpp"

namespace cmv {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // selftest check failed
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;

constexpr const char* kOutputDirEnv = "CMVSUB_OUTPUT_DIR";

struct RunOptions {
  std::string output_dir;            // empty: current directory
  int jobs = 1;
  bool force = false;
  std::optional<long> theta_count;   // overrides theta_grid
};

// Output directory from the environment, if set.
std::string output_dir_from_env();

// Exit code; diagnostics go to `err`.
int run_classify(const RunConfig& c, const RunOptions& o, std::ostream& err);
int run_trace(const RunConfig& c, double theta, const RunOptions& o, std::ostream& err);

struct SelftestOptions {
  bool flip_szego_sign = false;  // negative control: corrupts S before the determinant check
};
int run_selftest(const SelftestOptions& o, std::ostream& out);

}  // namespace cmv
