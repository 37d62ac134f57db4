#include "cmvsub/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace cmv {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const RunOptions& o, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || o.output_dir.empty()) return path;
  return fs::path(o.output_dir) / path;
}

// Refuses to clobber unless forced; returns false with a message.
bool writable(const std::vector<fs::path>& paths, bool force, std::ostream& err) {
  for (const auto& p : paths)
    if (fs::exists(p) && !force) {
      err << "error: output '" << p.string() << "' exists (use --force to overwrite)\n";
      return false;
    }
  return true;
}

// Written in full to a buffer first, then truncated onto disk.
bool write_file(const fs::path& p, const std::string& body, std::ostream& err) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << body;
  if (!f) {
    err << "error: cannot write '" << p.string() << "'\n";
    return false;
  }
  return true;
}

}  // namespace

std::string output_dir_from_env() {
  const char* d = std::getenv(kOutputDirEnv);
  return d ? std::string(d) : std::string();
}

int run_classify(const RunConfig& c, const RunOptions& o, std::ostream& err) {
  const fs::path report = resolve(o, c.report), csv = resolve(o, c.csv);
  if (!writable({report, csv}, o.force, err)) return kExitConfig;
  std::vector<double> th;
  if (o.theta_count) {
    if (*o.theta_count < 1) {
      err << "error: --theta must be >= 1\n";
      return kExitConfig;
    }
    for (long j = 0; j < *o.theta_count; ++j) th.push_back(2 * std::numbers::pi * double(j) / double(*o.theta_count));
  } else {
    th = c.thetas();
  }
  std::vector<SpectralClassification> v;
  try {
    v = classify_thetas(c.model, th, c.params(), o.jobs);
  } catch (const BackendError& e) {
    err << "numerical backend failure: " << e.what() << '\n';
    return kExitBackend;
  } catch (const OutOfRangeError& e) {
    err << "error: model: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string h = c.hash();
  std::ostringstream js, cs;
  write_jsonl(v, js, h);
  write_csv(v, cs, h);
  if (!write_file(report, js.str(), err) || !write_file(csv, cs.str(), err)) return kExitConfig;
  return kExitOk;
}

int run_trace(const RunConfig& c, double theta, const RunOptions& o, std::ostream& err) {
  if (!(theta >= 0 && theta < 2 * std::numbers::pi)) {
    err << "error: --theta must lie in [0, 2pi)\n";
    return kExitConfig;
  }
  const fs::path csv = resolve(o, c.trace), jl = resolve(o, c.trace_jsonl);
  if (!writable({csv, jl}, o.force, err)) return kExitConfig;
  std::ostringstream cs, js;
  try {
    RadialTrace t = radial_scan(c.model, theta, c.r_schedule, c.truncation);
    SpectralClassification v = classify_point(c.model, theta, c.params());
    write_csv(t, cs);
    auto prec = cs.precision(17);
    cs << "# theta: " << theta << '\n'
       << "# verdict: " << to_string(v.verdict) << '\n'
       << "# confidence: " << to_string(v.confidence) << '\n'
       << "# note: " << v.evidence.note << '\n'
       << "# config_hash: " << c.hash() << '\n';
    cs.precision(prec);
    write_jsonl(t, js);
  } catch (const BackendError& e) {
    err << "numerical backend failure: " << e.what() << '\n';
    return kExitBackend;
  } catch (const OutOfRangeError& e) {
    err << "error: model: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!write_file(csv, cs.str(), err) || !write_file(jl, js.str(), err)) return kExitConfig;
  return kExitOk;
}

}  // namespace cmv
