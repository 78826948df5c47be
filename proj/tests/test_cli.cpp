#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "krop/codebook.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("krop_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run krop_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const auto capture = dir / "stdout.txt";
  const std::string cmd = env + " \"" KROP_CLI_PATH "\" " + args + " > \"" + capture.string() +
                          "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("timing writes one row per K, rep and method") {
  const auto dir = scratch("timing");
  const auto r = krop_cli("timing --k-max 8 --reps 5 --seed 1 --out " + (dir / "out").string(), dir);
  REQUIRE(r.code == 0);
  const auto lines = lines_of(dir / "out" / "timing.csv");
  REQUIRE(!lines.empty());
  CHECK(lines.front() == "experiment,K,N,rep,method,seconds,index_agreement");
  CHECK(lines.size() - 1 == 2 * 5 * 8);
  CHECK(fs::exists(dir / "out" / "timing.json"));
}

TEST_CASE("capacity honours the family filter") {
  const auto dir = scratch("capacity");
  const auto r = krop_cli("capacity --families krop --k 2..10 --trials 3 --format csv --out " +
                              (dir / "out").string(),
                          dir);
  REQUIRE(r.code == 0);
  const auto lines = lines_of(dir / "out" / "capacity.csv");
  REQUIRE(lines.size() > 1);
  CHECK(lines.front() == "experiment,family,K,N,J,M,trial,retrieval_rate,success");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].rfind("capacity,krop,", 0) == 0);
  }
  CHECK(!fs::exists(dir / "out" / "capacity.json"));
}

TEST_CASE("same seed gives identical capacity and mutable reports for any thread count") {
  const auto dir = scratch("determinism");
  for (const char* sub : {"a", "b"}) {
    const auto out = (dir / sub).string();
    const std::string threads = sub == std::string("a") ? " --threads 1" : " --threads 3";
    REQUIRE(krop_cli("capacity --families krop,sylvester --k 4..8 --trials 4 --seed 9 --format csv --out " +
                     out + threads, dir).code == 0);
    REQUIRE(krop_cli("mutable --pairs 8:8 --trials 2 --steps 5 --seed 9 --format csv --out " + out +
                     threads, dir).code == 0);
  }
  CHECK(slurp(dir / "a" / "capacity.csv") == slurp(dir / "b" / "capacity.csv"));
  CHECK(slurp(dir / "a" / "mutable.csv") == slurp(dir / "b" / "mutable.csv"));
}

TEST_CASE("KROP_SEED is used when --seed is absent") {
  const auto dir = scratch("env_seed");
  const std::string common = "mutable --pairs 8:8 --trials 2 --steps 5 --format csv --out ";
  REQUIRE(krop_cli(common + (dir / "env").string(), dir, "KROP_SEED=5").code == 0);
  REQUIRE(krop_cli(common + (dir / "flag").string() + " --seed 5", dir).code == 0);
  REQUIRE(krop_cli(common + (dir / "zero").string(), dir, "KROP_SEED=").code == 0);
  CHECK(slurp(dir / "env" / "mutable.csv") == slurp(dir / "flag" / "mutable.csv"));
  CHECK(slurp(dir / "env" / "mutable.csv") != slurp(dir / "zero" / "mutable.csv"));
  CHECK(krop_cli(common + (dir / "bad").string(), dir, "KROP_SEED=abc").code == 2);
}

TEST_CASE("flags override config file values") {
  const auto dir = scratch("config");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"experiment":"mutable","trials":3,"steps":2,"pairs":[{"M":4,"K":6}],"out_dir":")"
        << (dir / "from_config").string() << R"(","format":"csv","strategies":["krop"]})";
  }
  REQUIRE(krop_cli("mutable --config " + (dir / "cfg.json").string() + " --steps 4", dir).code == 0);
  const auto lines = lines_of(dir / "from_config" / "mutable.csv");
  // 3 trials x (steps 0..4).
  CHECK(lines.size() - 1 == 3 * 5);
  CHECK(krop_cli("timing --config " + (dir / "cfg.json").string(), dir).code == 2);
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(krop_cli("timing --k-max 3", dir).code == 2);
  CHECK(krop_cli("timing --bogus --out x", dir).code == 2);
  CHECK(krop_cli("timing --k 6..3 --out " + (dir / "o").string(), dir).code == 2);
  CHECK(krop_cli("capacity --families nope --out " + (dir / "o").string(), dir).code == 2);
  CHECK(krop_cli("capacity --format xml --out " + (dir / "o").string(), dir).code == 2);
  CHECK(krop_cli("timing --k 2 --out /proc/krop-not-writable", dir).code == 2);
  CHECK(krop_cli("", dir).code == 2);
  CHECK(krop_cli("row --params " + (dir / "missing.json").string() + " --index 0", dir).code == 2);
}

TEST_CASE("--help exits 0 on every subcommand and lists its flags") {
  const auto dir = scratch("help");
  CHECK(krop_cli("--help", dir).code == 0);
  for (const char* sub : {"timing", "capacity", "mutable", "cleanup", "row", "params"}) {
    const auto r = krop_cli(std::string(sub) + " --help", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("Options:") != std::string::npos);
  }
  const auto timing = krop_cli("timing --help", dir).out;
  for (const char* flag : {"--seed", "--out", "--k", "--k-max", "--reps", "--theta-scheme",
                           "--threads", "--config", "--format"}) {
    CHECK(timing.find(flag) != std::string::npos);
  }
  CHECK(krop_cli("capacity --help", dir).out.find("--families") != std::string::npos);
  CHECK(krop_cli("mutable --help", dir).out.find("--strategies") != std::string::npos);
  CHECK(krop_cli("mutable --help", dir).out.find("--steps") != std::string::npos);
}

TEST_CASE("row writes cos and sin of a single angle") {
  const auto dir = scratch("row");
  krop::save_params(krop::KropParams({M_PI}), dir / "p.json");
  REQUIRE(krop_cli("row --params " + (dir / "p.json").string() + " --index 0 --out " +
                       (dir / "r.vec").string(),
                   dir).code == 0);
  const auto lines = lines_of(dir / "r.vec");
  REQUIRE(lines.size() == 2);
  CHECK(std::abs(std::stod(lines[0]) + 1.0) <= 1e-15);
  CHECK(std::abs(std::stod(lines[1])) <= 1e-15);
  CHECK(krop_cli("row --params " + (dir / "p.json").string() + " --index 2", dir).code == 2);
}

TEST_CASE("row output fed to cleanup recovers the index") {
  const auto dir = scratch("roundtrip");
  REQUIRE(krop_cli("params --k 3 --out " + (dir / "p.json").string(), dir).code == 0);
  const auto params = (dir / "p.json").string();
  for (int i : {0, 5, 7}) {
    const auto vec = (dir / ("r" + std::to_string(i) + ".vec")).string();
    REQUIRE(krop_cli("row --params " + params + " --index " + std::to_string(i) + " --out " + vec,
                     dir).code == 0);
    const auto emitted = (dir / "emitted.vec").string();
    const auto r = krop_cli("cleanup --params " + params + " --input " + vec + " --emit-row " + emitted, dir);
    REQUIRE(r.code == 0);
    std::istringstream ss(r.out);
    int index = -1;
    double score = 0.0;
    ss >> index >> score;
    CHECK(index == i);
    CHECK(score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(slurp(emitted) == slurp(vec));
  }
  {
    std::ofstream shortv(dir / "short.vec");
    shortv << "1\n0\n0\n0\n";
  }
  CHECK(krop_cli("cleanup --params " + params + " --input " + (dir / "short.vec").string(), dir).code == 2);
  {
    std::ofstream junk(dir / "junk.vec");
    junk << "1\nabc\n";
  }
  CHECK(krop_cli("cleanup --params " + params + " --input " + (dir / "junk.vec").string(), dir).code == 2);
}

TEST_CASE("params with a seed are reproducible") {
  const auto dir = scratch("params");
  const auto a = krop_cli("params --k 6 --theta-scheme uniform-random --seed 3", dir);
  const auto b = krop_cli("params --k 6 --theta-scheme uniform-random --seed 3", dir);
  const auto c = krop_cli("params --k 6 --theta-scheme uniform-random --seed 4", dir);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(krop::params_from_json(a.out).seed() == 3u);
}
