#pragma once
// Run configuration for the command-line front end.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmvsub/classify.hpp"

namespace cmv {

// Invalid or malformed configuration; `field` names the offending key path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field.empty() ? msg : field + ": " + msg), field(std::move(field)) {}
  std::string field;
};

struct RunConfig {
  CoefficientSource model = free_source();
  std::variant<long, std::vector<double>> theta_grid = 64L;
  std::vector<double> r_schedule = geometric_schedule(20);
  TruncationParams truncation;
  double eps_re = 1e-3;
  double div_threshold = 1e4;
  long transfer_n = 4096;
  std::string report = "verdicts.jsonl";
  std::string csv = "verdicts.csv";
  std::string trace = "trace.csv";
  std::string trace_jsonl = "trace.jsonl";
  std::int64_t seed = 0;
  std::string canonical;  // normalized JSON text, hashed for provenance

  std::vector<double> thetas() const;
  ClassifyParams params() const;
  std::string hash() const;  // first 16 hex digits of SHA-256(canonical)
};

// Strict schema: unknown keys are errors; "model" is required.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace cmv
