#include "cmvsub/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cmv {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<long>();
}

cplx complex_value(const json& j, const std::string& field) {
  if (j.is_number()) return number(j, field);
  if (j.is_array() && j.size() == 2) return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
  throw ConfigError(field, "expected a number or a [re, im] pair");
}

CoefficientSource parse_model(const json& m, std::int64_t seed, json& canon) {
  if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string())
    throw ConfigError("model.kind", "required string (explicit, constant, random_iid, quasi_periodic)");
  const std::string kind = m["kind"];
  canon = {{"kind", kind}};
  auto inside = [](cplx a, const std::string& f) {
    if (!(std::abs(a) < 1)) throw ConfigError(f, "|alpha| must be < 1");
    return a;
  };
  if (kind == "constant") {
    only_keys(m, "model", {"kind", "alpha"});
    if (!m.contains("alpha")) throw ConfigError("model.alpha", "required");
    cplx a = inside(complex_value(m["alpha"], "model.alpha"), "model.alpha");
    canon["alpha"] = {a.real(), a.imag()};
    return Constant{a};
  }
  if (kind == "explicit") {
    only_keys(m, "model", {"kind", "alpha", "base"});
    if (!m.contains("alpha") || !m["alpha"].is_array() || m["alpha"].empty())
      throw ConfigError("model.alpha", "required non-empty list");
    Explicit e;
    e.base = m.contains("base") ? integer(m["base"], "model.base") : 0;
    canon["base"] = e.base;
    canon["alpha"] = json::array();
    for (std::size_t k = 0; k < m["alpha"].size(); ++k) {
      std::string f = "model.alpha[" + std::to_string(k) + "]";
      cplx a = inside(complex_value(m["alpha"][k], f), f);
      e.values.push_back(a);
      canon["alpha"].push_back({a.real(), a.imag()});
    }
    return e;
  }
  if (kind == "random_iid") {
    only_keys(m, "model", {"kind", "seed", "radius"});
    RandomIID r;
    r.seed = std::uint64_t(m.contains("seed") ? integer(m["seed"], "model.seed") : seed);
    r.radius = m.contains("radius") ? number(m["radius"], "model.radius") : 0.5;
    if (!(r.radius >= 0 && r.radius < 1)) throw ConfigError("model.radius", "must lie in [0, 1)");
    canon["seed"] = r.seed;
    canon["radius"] = r.radius;
    return r;
  }
  if (kind == "quasi_periodic") {
    only_keys(m, "model", {"kind", "lambda", "beta", "phase"});
    QuasiPeriodic q;
    if (!m.contains("lambda")) throw ConfigError("model.lambda", "required");
    if (!m.contains("beta")) throw ConfigError("model.beta", "required");
    q.lambda = number(m["lambda"], "model.lambda");
    q.beta = number(m["beta"], "model.beta");
    q.phase = m.contains("phase") ? number(m["phase"], "model.phase") : 0.0;
    if (!(q.lambda >= 0 && q.lambda < 1)) throw ConfigError("model.lambda", "must lie in [0, 1)");
    canon["lambda"] = q.lambda;
    canon["beta"] = q.beta;
    canon["phase"] = q.phase;
    return q;
  }
  throw ConfigError("model.kind", "unknown kind '" + kind + "'");
}

std::string path_string(const json& j, const std::string& field) {
  if (!j.is_string() || j.get<std::string>().empty()) throw ConfigError(field, "expected a non-empty string");
  return j;
}

}  // namespace

std::vector<double> RunConfig::thetas() const {
  if (auto n = std::get_if<long>(&theta_grid)) {
    std::vector<double> t(*n);
    for (long j = 0; j < *n; ++j) t[j] = 2 * std::numbers::pi * double(j) / double(*n);
    return t;
  }
  return std::get<std::vector<double>>(theta_grid);
}

ClassifyParams RunConfig::params() const {
  ClassifyParams p;
  p.r_schedule = r_schedule;
  p.trunc = truncation;
  p.eps_re = eps_re;
  p.div_threshold = div_threshold;
  p.transfer_n = transfer_n;
  return p;
}

std::string RunConfig::hash() const {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string h;
  for (unsigned i = 0; i < 8 && i < len; ++i) {
    h += hex[md[i] >> 4];
    h += hex[md[i] & 15];
  }
  return h;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                              e.what());
  }
  only_keys(j, "", {"model", "theta_grid", "r_schedule", "truncation", "thresholds", "outputs", "seed"});
  if (!j.contains("model")) throw ConfigError("model", "required");

  RunConfig c;
  json canon;
  if (j.contains("seed")) c.seed = integer(j["seed"], "seed");
  canon["seed"] = c.seed;
  c.model = parse_model(j["model"], c.seed, canon["model"]);

  if (j.contains("theta_grid")) {
    const json& g = j["theta_grid"];
    if (g.is_number_integer()) {
      long n = g;
      if (n < 1) throw ConfigError("theta_grid", "count must be >= 1");
      c.theta_grid = n;
    } else if (g.is_array() && !g.empty()) {
      std::vector<double> t;
      for (std::size_t k = 0; k < g.size(); ++k) {
        double v = number(g[k], "theta_grid[" + std::to_string(k) + "]");
        if (!(v >= 0 && v < 2 * std::numbers::pi))
          throw ConfigError("theta_grid[" + std::to_string(k) + "]", "must lie in [0, 2pi)");
        t.push_back(v);
      }
      c.theta_grid = t;
    } else {
      throw ConfigError("theta_grid", "expected a positive integer or a non-empty list");
    }
  }
  if (auto n = std::get_if<long>(&c.theta_grid))
    canon["theta_grid"] = *n;
  else
    canon["theta_grid"] = std::get<std::vector<double>>(c.theta_grid);

  if (j.contains("r_schedule")) {
    const json& r = j["r_schedule"];
    if (r.is_object()) {
      only_keys(r, "r_schedule", {"geometric"});
      if (!r.contains("geometric")) throw ConfigError("r_schedule.geometric", "required");
      long k = integer(r["geometric"], "r_schedule.geometric");
      if (k < 1 || k > 40) throw ConfigError("r_schedule.geometric", "must lie in [1, 40]");
      c.r_schedule = geometric_schedule(int(k));
    } else if (r.is_array() && !r.empty()) {
      c.r_schedule.clear();
      for (std::size_t k = 0; k < r.size(); ++k) {
        std::string f = "r_schedule[" + std::to_string(k) + "]";
        double v = number(r[k], f);
        if (!(v >= 0 && v < 1)) throw ConfigError(f, "must lie in [0, 1)");
        if (!c.r_schedule.empty() && !(v > c.r_schedule.back())) throw ConfigError(f, "schedule must increase");
        c.r_schedule.push_back(v);
      }
    } else {
      throw ConfigError("r_schedule", "expected {\"geometric\": k} or a non-empty list");
    }
  }
  canon["r_schedule"] = c.r_schedule;

  if (j.contains("truncation")) {
    const json& t = j["truncation"];
    only_keys(t, "truncation", {"N_init", "N_max", "tol"});
    if (t.contains("N_init")) c.truncation.N_init = integer(t["N_init"], "truncation.N_init");
    if (t.contains("N_max")) c.truncation.N_max = integer(t["N_max"], "truncation.N_max");
    if (t.contains("tol")) c.truncation.tol = number(t["tol"], "truncation.tol");
  }
  if (c.truncation.N_init < 8) throw ConfigError("truncation.N_init", "must be >= 8");
  if (c.truncation.N_max < c.truncation.N_init) throw ConfigError("truncation.N_max", "must be >= truncation.N_init");
  if (c.truncation.N_max > (1L << 20)) throw ConfigError("truncation.N_max", "must be <= 1048576");
  if (!(c.truncation.tol > 0)) throw ConfigError("truncation.tol", "must be positive");
  canon["truncation"] = {{"N_init", c.truncation.N_init}, {"N_max", c.truncation.N_max}, {"tol", c.truncation.tol}};

  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    only_keys(t, "thresholds", {"eps_re", "div_threshold", "transfer_n"});
    if (t.contains("eps_re")) c.eps_re = number(t["eps_re"], "thresholds.eps_re");
    if (t.contains("div_threshold")) c.div_threshold = number(t["div_threshold"], "thresholds.div_threshold");
    if (t.contains("transfer_n")) c.transfer_n = integer(t["transfer_n"], "thresholds.transfer_n");
  }
  if (!(c.eps_re > 0)) throw ConfigError("thresholds.eps_re", "must be positive");
  if (!(c.div_threshold > c.eps_re)) throw ConfigError("thresholds.div_threshold", "must exceed eps_re");
  if (c.transfer_n < 32) throw ConfigError("thresholds.transfer_n", "must be >= 32");
  canon["thresholds"] = {{"eps_re", c.eps_re}, {"div_threshold", c.div_threshold}, {"transfer_n", c.transfer_n}};

  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    only_keys(o, "outputs", {"report", "csv", "trace", "trace_jsonl"});
    if (o.contains("report")) c.report = path_string(o["report"], "outputs.report");
    if (o.contains("csv")) c.csv = path_string(o["csv"], "outputs.csv");
    if (o.contains("trace")) c.trace = path_string(o["trace"], "outputs.trace");
    if (o.contains("trace_jsonl")) c.trace_jsonl = path_string(o["trace_jsonl"], "outputs.trace_jsonl");
  }
  // output paths do not change results, so they stay out of the hash
  c.canonical = canon.dump();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cmv
