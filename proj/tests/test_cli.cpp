#include <doctest.h>

#include <stdexcept>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using namespace softsweep::cli;

namespace {

const char* kDesk = R"(seed: 11
regime:
  variant: 2
  lambda_Aa: 0.5
  lambda_aA: 0.5
ecology:
  f_A: 2
  f_a: 5
  D_A: 1
  D_a: 1
  C: {AA: 1, Aa: 1, aA: 2, aa: 1}
  K: [200, 400]
experiment:
  replicates: 6
)";

const char* kOde = R"(regime:
  variant: 4
  lambda_Aa: 0.05
  lambda_aA: 0.321
ecology:
  f_A: 5
  f_a: 5
  rho_A: 3.92
  rho_a: 2.6
  C: {AA: 1, Aa: 5, aA: 2, aa: 1}
experiment:
  ode:
    t_end: 50
    samples: 11
    initial: [[1, 1]]
)";

const char* kOracle = R"(seed: 3
regime:
  variant: 2
ecology:
  f_A: 2
  f_a: 5
  D_A: 1
  D_a: 1
  C: {AA: 1, Aa: 1, aA: 2, aa: 1}
experiment:
  replicates: 40
  oracle:
    slope_N: 200
    logistic_K: 50
    logistic_horizon: 5
)";

struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() / ("softsweep_cli_" + std::to_string(std::rand()) + "_" +
                                         std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "softsweep");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::map<std::string, std::string> run_dir(const std::string& cmd, const std::string& config, const fs::path& dir,
                                           std::vector<std::string> extra = {}) {
  std::vector<std::string> args{cmd, "--config", config, "--out-dir", dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  REQUIRE(invoke(args) == 0);
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("same config and seed give byte-identical output, independent of workers") {
  Scratch s;
  const std::string desk = s.write("desk.yaml", kDesk);
  const std::string ode = s.write("ode.yaml", kOde);
  const std::string oracle = s.write("oracle.yaml", kOracle);
  const std::pair<const char*, std::string> cases[] = {
      {"sweep", desk}, {"spectrum", desk}, {"duration", desk}, {"ode", ode}, {"oracle", oracle}};
  for (const auto& [cmd, cfg] : cases) {
    CAPTURE(cmd);
    const auto a = run_dir(cmd, cfg, s.root / (std::string(cmd) + "_a"));
    const auto b = run_dir(cmd, cfg, s.root / (std::string(cmd) + "_b"));
    const auto c = run_dir(cmd, cfg, s.root / (std::string(cmd) + "_c"), {"--workers", "3"});
    CHECK_FALSE(a.empty());
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("sweep records") {
  Scratch s;
  const std::string desk = s.write("desk.yaml", kDesk);
  const auto files = run_dir("sweep", desk, s.root / "out");
  REQUIRE(files.count("sweep.jsonl"));
  std::istringstream in(files.at("sweep.jsonl"));
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  REQUIRE(records.size() == 1 + 2 * 6);
  CHECK(records[0]["record"] == "header");
  CHECK(records[0]["seed"] == 11);
  for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i]["record"] == "replicate");

  const auto other = run_dir("sweep", desk, s.root / "seeded", {"--seed", "12"});
  CHECK(other.at("sweep.jsonl") != files.at("sweep.jsonl"));
}

TEST_CASE("zero replicates give header-only output") {
  Scratch s;
  const std::string desk = s.write("desk.yaml", kDesk);
  for (const char* cmd : {"sweep", "spectrum", "duration"}) {
    CAPTURE(cmd);
    const fs::path dir = s.root / cmd;
    REQUIRE(invoke({cmd, "--config", desk, "--out-dir", dir.string(), "--replicates", "0"}) == 0);
    const std::string jsonl = slurp(dir / (std::string(cmd) + ".jsonl"));
    std::istringstream in(jsonl);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      ++lines;
      CHECK(nlohmann::json::parse(line)["record"] == "header");
    }
    CHECK(lines == 1);
  }
}

TEST_CASE("malformed configs fail with a located message") {
  Scratch s;
  std::string err;
  const std::string unknown = s.write("unknown.yaml", std::string(kDesk) + "  bogus: 1\n");
  CHECK(invoke({"sweep", "--config", unknown, "--out-dir", (s.root / "x").string()}, &err) == 2);
  CHECK(err.find("experiment.bogus") != std::string::npos);
  CHECK(err.find("line 15") != std::string::npos);

  std::string bad = kDesk;
  bad.replace(bad.find("f_a: 5"), 6, "f_a: five");
  const std::string nonnum = s.write("nonnum.yaml", bad);
  CHECK(invoke({"sweep", "--config", nonnum}, &err) == 2);
  CHECK(err.find("ecology.f_a") != std::string::npos);
  CHECK(err.find("line 8") != std::string::npos);

  CHECK_THROWS_AS(parse_config_text("regime:\n  variant: 7\necology: {f_A: 2, f_a: 5, D_A: 1, D_a: 1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("regime: {variant: 2}\necology: {f_A: 2, f_a: 5, D_A: 1, rho_A: 1, D_a: 1}\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("regime: {variant: 2}\necology: {f_A: 2, f_a: 5, D_A: 1, D_a: 1, K: [0.5]}\n"),
                  ConfigError);
  CHECK(invoke({"sweep", "--config", (s.root / "missing.yaml").string()}, &err) != 0);
  CHECK(invoke({"nonsense"}) != 0);
}

TEST_CASE("symmetric ecology is refused unless overridden") {
  const char* sym = "regime: {variant: 2, lambda_Aa: 0.5, lambda_aA: 0.5}\n"
                    "ecology: {f_A: 3, f_a: 3, D_A: 1, D_a: 1, K: [100]}\n"
                    "experiment: {replicates: 1}\n";
  Scratch s;
  std::string err;
  CHECK(invoke({"sweep", "--config", s.write("sym.yaml", sym), "--out-dir", s.root.string()}, &err) != 0);
  CHECK_FALSE(err.empty());
}

TEST_CASE("output directory precedence") {
  RunConfig cfg = parse_config_text(kDesk);
  Overrides o;
  ::unsetenv("SOFTSWEEP_OUT_DIR");
  CHECK(resolve_out_dir(cfg, o) == ".");
  cfg.out_dir = "from_config";
  CHECK(resolve_out_dir(cfg, o) == "from_config");
  ::setenv("SOFTSWEEP_OUT_DIR", "from_env", 1);
  CHECK(resolve_out_dir(cfg, o) == "from_env");
  o.out_dir = "from_flag";
  CHECK(resolve_out_dir(cfg, o) == "from_flag");
  ::unsetenv("SOFTSWEEP_OUT_DIR");
}

TEST_CASE("ode report") {
  Scratch s;
  const auto files = run_dir("ode", s.write("ode.yaml", kOde), s.root / "out");
  const auto j = nlohmann::json::parse(files.at("ode.json"));
  CHECK(j["interior"].size() == 3);
  CHECK(j["index_sum"]["sum"] == 1);
  CHECK(files.at("trajectories.csv").find("t,n_A,n_a") != std::string::npos);
}
