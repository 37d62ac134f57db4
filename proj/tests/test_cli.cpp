#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmvsub/runner.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cmv;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    static std::atomic<int> n{0};
    dir = fs::temp_directory_path() / ("cmvsub-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& body) const {
    std::ofstream(dir / name) << body;
    return dir / name;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  // runs the tool with the output directory pointed here; returns the exit status
  int run(const std::string& args, const std::string& log = "log.txt") const {
    std::string cmd = std::string(kOutputDirEnv) + "='" + dir.string() + "' '" + CMVSUB_CLI + "' " + args + " >'" +
                      (dir / log).string() + "' 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

const char* kFree = R"({"model": {"kind": "constant", "alpha": 0}, "theta_grid": 16,
                        "r_schedule": {"geometric": 10}})";

}  // namespace

TEST_CASE("config: schema and diagnostics") {
  RunConfig c = parse_config(kFree);
  CHECK(c.thetas().size() == 16);
  CHECK(c.r_schedule.size() == 10);
  CHECK(c.truncation.N_max == 4096);

  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field + "|" + e.what();
    }
    return std::string("no error");
  };
  CHECK(field_of(R"({"theta_grid": 8})").rfind("model|", 0) == 0);
  CHECK(field_of(R"({"model": {"kind": "constant", "alpha": 0}, "truncation": {"N_init": 512, "N_max": 128}})")
            .rfind("truncation.N_max|", 0) == 0);
  CHECK(field_of(R"({"model": {"kind": "constant", "alpha": [0.9, 0.9]}})").rfind("model.alpha|", 0) == 0);
  CHECK(field_of(R"({"model": {"kind": "constant", "alpha": 0}, "colour": 1})").find("colour") != std::string::npos);
  CHECK(field_of(R"({"model": {"kind": "wavelet"}})").rfind("model", 0) == 0);
  CHECK(field_of(R"({"model": {"kind": "constant", "alpha": 0}, "theta_grid": 0})").rfind("theta_grid|", 0) == 0);
  std::string bad = field_of("{\"model\": {\"kind\": \"constant\",\n \"alpha\": }}");
  CHECK(bad.find("line 2") != std::string::npos);

  auto q = parse_config(R"({"model": {"kind": "quasi_periodic", "lambda": 0.5, "beta": 0.618}, "theta_grid": [0.1, 2]})");
  CHECK(q.thetas() == std::vector<double>{0.1, 2.0});
  auto e = parse_config(R"({"model": {"kind": "explicit", "base": -1, "alpha": [0.1, [0, 0.2], 0.3]}})");
  CHECK(e.model.alpha(0) == cplx{0, 0.2});
}

TEST_CASE("config hash ignores layout and output paths, not content") {
  auto a = parse_config(kFree);
  auto b = parse_config(R"({ "r_schedule": {"geometric": 10},"theta_grid":16,
      "model": {"alpha": 0.0, "kind": "constant"}, "outputs": {"report": "elsewhere.jsonl"} })");
  auto c = parse_config(R"({"model": {"kind": "constant", "alpha": 0.1}, "theta_grid": 16, "r_schedule": {"geometric": 10}})");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("cli classify: free case end to end") {
  Scratch s;
  auto cfg = s.write("free.json", kFree);
  REQUIRE(s.run("classify --config '" + cfg.string() + "' --jobs 2") == 0);
  auto js = lines(s.read("verdicts.jsonl"));
  REQUIRE(js.size() == 16);
  const std::string h = parse_config(kFree).hash();
  for (const auto& l : js) {
    auto o = nlohmann::json::parse(l);
    CHECK(o["verdict"] == "AC");
    CHECK(o["config_hash"] == h);
  }
  auto cs = lines(s.read("verdicts.csv"));
  REQUIRE(cs.size() == 17);
  CHECK(cs[0] == "theta,verdict,ReF_limit,lyap_plus,lyap_minus,confidence,config_hash");

  // no clobbering without --force; files untouched
  const std::string before = s.read("verdicts.jsonl");
  CHECK(s.run("classify --config '" + cfg.string() + "' --theta 4", "log2.txt") == 2);
  CHECK(s.read("log2.txt").find("--force") != std::string::npos);
  CHECK(s.read("verdicts.jsonl") == before);
  CHECK(s.run("classify --config '" + cfg.string() + "' --force --jobs 1") == 0);
  CHECK(s.read("verdicts.jsonl") == before);
  CHECK(s.run("classify --config '" + cfg.string() + "' --force --theta 4") == 0);
  CHECK(lines(s.read("verdicts.jsonl")).size() == 4);
}

TEST_CASE("cli: configuration errors exit 2") {
  Scratch s;
  auto nomodel = s.write("nomodel.json", R"({"theta_grid": 8})");
  CHECK(s.run("classify --config '" + nomodel.string() + "'") == 2);
  CHECK(s.read("log.txt").find("model") != std::string::npos);
  auto trunc = s.write("trunc.json", R"({"model": {"kind": "constant", "alpha": 0}, "truncation": {"N_init": 512, "N_max": 64}})");
  CHECK(s.run("classify --config '" + trunc.string() + "'") == 2);
  CHECK(s.read("log.txt").find("truncation.N_max") != std::string::npos);
  CHECK(s.run("classify --config '" + (s.dir / "missing.json").string() + "'") == 2);
  auto ok = s.write("ok.json", kFree);
  CHECK(s.run("classify --config '" + ok.string() + "' --theta 0") == 2);
  CHECK(s.run("classify") == 2);
  CHECK(s.run("trace --config '" + ok.string() + "' --theta 7") == 2);
  CHECK(!fs::exists(s.dir / "verdicts.jsonl"));
}

TEST_CASE("cli trace: free case and gap footer") {
  Scratch s;
  auto cfg = s.write("free.json", kFree);
  REQUIRE(s.run("trace --config '" + cfg.string() + "' --theta 1") == 0);
  auto t = lines(s.read("trace.csv"));
  REQUIRE(t.size() > 10);
  CHECK(t[0] == "theta,r,ReF,ImF,ReFplus,ImFplus,ReMminus,ImMminus,N,converged");
  // every converged row has Re F = 1; rows the N <= 4096 budget cannot resolve carry converged = 0
  int rows = 0, good = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k][0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream is(t[k]);
    for (std::string x; std::getline(is, x, ',');) f.push_back(x);
    REQUIRE(f.size() == 10);
    const bool conv = f[9] == "1";
    if (std::stod(f[1]) <= 0.99) CHECK(conv);
    if (conv) {
      CHECK(std::abs(std::stod(f[2]) - 1.0) < 1e-6);
      ++good;
    }
    ++rows;
  }
  CHECK(rows == 10);
  CHECK(good >= 6);
  CHECK(s.run("trace --config '" + cfg.string() + "' --theta 1") == 2);

  auto gap = s.write("gap.json", R"({"model": {"kind": "constant", "alpha": 0.5},
      "outputs": {"trace": "gap.csv", "trace_jsonl": "gap.jsonl"}})");
  REQUIRE(s.run("trace --config '" + gap.string() + "' --theta 0") == 0);
  const std::string g = s.read("gap.csv");
  CHECK(g.find("# verdict: Gap") != std::string::npos);
  CHECK(g.find("# config_hash: " + load_config(gap.string()).hash()) != std::string::npos);
  CHECK(!lines(s.read("gap.jsonl")).empty());
}

TEST_CASE("cli selftest and its negative control") {
  Scratch s;
  CHECK(s.run("selftest") == 0);
  for (const auto& l : lines(s.read("log.txt"))) CHECK(l.rfind("PASS ", 0) == 0);
  CHECK(s.run("selftest --debug-flip-szego-sign") == 1);
  CHECK(s.read("log.txt").find("FAIL determinant") != std::string::npos);
}

TEST_CASE("cli: results do not depend on --jobs") {
  Scratch s;
  auto cfg = s.write("c.json", R"({"model": {"kind": "constant", "alpha": 0.5}, "theta_grid": 24,
      "r_schedule": {"geometric": 14}})");
  REQUIRE(s.run("classify --config '" + cfg.string() + "' --jobs 1") == 0);
  const std::string a = s.read("verdicts.jsonl"), ac = s.read("verdicts.csv");
  REQUIRE(s.run("classify --config '" + cfg.string() + "' --jobs 8 --force") == 0);
  CHECK(s.read("verdicts.jsonl") == a);
  CHECK(s.read("verdicts.csv") == ac);
}
