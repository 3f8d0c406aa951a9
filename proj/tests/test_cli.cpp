#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "qquant/error.hpp"

namespace fs = std::filesystem;
using qquant::cli::kDataPrecondition;
using qquant::cli::kSuccess;
using qquant::cli::kUsageError;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run qq(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qquant::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class Scratch {
 public:
  Scratch() : dir_(fs::temp_directory_path() / ("qquant_cli_" + std::to_string(counter_++))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

}  // namespace

TEST_CASE("generate, quantize and estimate") {
  Scratch dir;
  REQUIRE(qq({"generate", "-n", "300", "--seed", "5", "--output", dir / "d.csv"}).code == kSuccess);
  CHECK(line_count(dir / "d.csv") == 301);

  const auto q = qq({"quantize", "--input", dir / "d.csv", "-N", "5", "--seed", "7", "--output", dir / "g.csv"});
  REQUIRE(q.code == kSuccess);
  CHECK(q.out.find("distortion ") != std::string::npos);
  CHECK(q.out.find("separation ") != std::string::npos);
  CHECK(line_count(dir / "g.csv") == 6);
  CHECK(slurp(dir / "g.csv").rfind("x1\n", 0) == 0);

  const auto again = qq({"quantize", "--input", dir / "d.csv", "-N", "5", "--seed", "7", "--output", dir / "g2.csv"});
  REQUIRE(again.code == kSuccess);
  CHECK(slurp(dir / "g.csv") == slurp(dir / "g2.csv"));

  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "25", "-B", "0", "--alpha", "0.05,0.25,0.5,0.75,0.95",
              "--query", "-3,3,300", "--output", dir / "c.csv"})
              .code == kSuccess);
  CHECK(line_count(dir / "c.csv") == 1501);
  CHECK(slurp(dir / "c.csv").rfind("x,alpha,value,estimator,N,B\n", 0) == 0);

  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "25", "--bootstrap", "5", "--alpha", "0.5", "--output",
              dir / "cb.csv"})
              .code == kSuccess);
  const auto boot = slurp(dir / "cb.csv");
  CHECK(boot.find(",quant,25,0\n") != std::string::npos);
  CHECK(boot.find(",quant-boot,25,5\n") != std::string::npos);
  CHECK(line_count(dir / "cb.csv") == 601);

  const auto manifest = nlohmann::json::parse(slurp(dir / "cb.csv.manifest.json"));
  CHECK(manifest["command"] == "estimate");
  CHECK(manifest["master_seed"] == 0);
  CHECK(manifest["outputs"][0] == "cb.csv");
  CHECK(manifest["seed_families"].size() == 3);
  CHECK(manifest["warnings"].contains("quant_missing"));
  CHECK_FALSE(manifest.contains("timing_ms"));
}

TEST_CASE("estimate with competitors") {
  Scratch dir;
  REQUIRE(qq({"generate", "-n", "150", "--seed", "1", "--output", dir / "d.csv"}).code == kSuccess);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "10", "--alpha", "0.5", "--query", "-3,3,20", "--knn",
              "15", "--kernel", "--output", dir / "c.csv", "--timing"})
              .code == kSuccess);
  const auto text = slurp(dir / "c.csv");
  for (const char* name : {",quant,", ",knn,", ",loc-const,", ",loc-lin,"}) CHECK(text.find(name) != std::string::npos);
  CHECK(line_count(dir / "c.csv") == 81);
  CHECK(nlohmann::json::parse(slurp(dir / "c.csv.manifest.json")).contains("timing_ms"));
}

TEST_CASE("exit codes") {
  Scratch dir;
  spit(dir / "dup.csv", "x1,y\n1,1\n1,2\n2,3\n2,4\n");
  const auto r3 = qq({"quantize", "--input", dir / "dup.csv", "-N", "3", "--output", dir / "g.csv"});
  CHECK(r3.code == kDataPrecondition);
  CHECK(r3.err.find("insufficient distinct support") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "g.csv"));

  spit(dir / "bad.csv", "x1,y\n1,1\n2,oops\n");
  const auto bad = qq({"quantize", "--input", dir / "bad.csv", "-N", "1", "--output", dir / "g.csv"});
  CHECK(bad.code == kUsageError);
  CHECK(bad.err.find("line 3") != std::string::npos);

  CHECK(qq({"quantize", "--input", dir / "missing.csv", "-N", "1", "--output", dir / "g.csv"}).code == kUsageError);

  REQUIRE(qq({"generate", "-n", "50", "--output", dir / "d.csv"}).code == kSuccess);
  const auto alpha = qq({"estimate", "--input", dir / "d.csv", "-N", "3", "--alpha", "1.2", "--output", dir / "c.csv"});
  CHECK(alpha.code == kUsageError);
  CHECK(alpha.err.find("alpha out of range") != std::string::npos);
  CHECK(qq({"estimate", "--input", dir / "d.csv", "-N", "50", "--output", dir / "c.csv"}).code == kDataPrecondition);

  CHECK(qq({}).code == kUsageError);
  CHECK(qq({"frobnicate"}).code == kUsageError);
  CHECK(qq({"quantize", "--input", dir / "d.csv"}).code == kUsageError);
  CHECK(qq({"--help"}).code == kSuccess);
}

TEST_CASE("simulate") {
  Scratch dir;
  spit(dir / "zador.cfg", "# uniform distortion rate\nexperiment = zador\nN = 2..32\nseed = 3\n");
  const auto z = qq({"simulate", "--config", dir / "zador.cfg", "--output", dir / "z.csv"});
  REQUIRE(z.code == kSuccess);
  CHECK(line_count(dir / "z.csv") == 6);
  const auto table = slurp(dir / "z.csv");
  CHECK(table.rfind("N,distortion,predicted,slope_flag\n", 0) == 0);
  CHECK(table.find(",1\n") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(dir / "z.csv.manifest.json"));
  CHECK(manifest["master_seed"] == 3);
  CHECK(manifest["config"]["experiment"] == "zador");

  const auto missing = qq({"simulate", "--experiment", "theorem5", "--set", "seed=1", "--output", dir / "t.csv"});
  CHECK(missing.code == kUsageError);
  CHECK(missing.err.find("missing config key: N") != std::string::npos);

  const auto unknown = qq({"simulate", "--experiment", "lloyd", "--seed", "1", "--output", dir / "t.csv"});
  CHECK(unknown.code == kUsageError);
  CHECK(unknown.err.find("unknown experiment") != std::string::npos);

  const auto typo = qq({"simulate", "--config", dir / "zador.cfg", "--set", "NN=3", "--output", dir / "t.csv"});
  CHECK(typo.code == kUsageError);
  CHECK(typo.err.find("unknown config key: NN") != std::string::npos);

  const auto cmp = qq({"simulate", "--experiment", "comparison", "--seed", "2", "--set", "n=120", "--set", "N=8",
                       "--set", "B=3", "--set", "alpha=0.5", "--set", "replications=2", "--set", "query_count=30",
                       "--output", dir / "cmp.csv"});
  REQUIRE(cmp.code == kSuccess);
  CHECK(line_count(dir / "cmp.csv") == 6);
  for (const char* name : {"quant,", "quant-boot,", "knn,", "loc-const,", "loc-lin,"})
    CHECK(slurp(dir / "cmp.csv").find(std::string("\n") + name) != std::string::npos);
}

TEST_CASE("compare-plotdata") {
  Scratch dir;
  REQUIRE(qq({"generate", "-n", "200", "--seed", "2", "--output", dir / "d.csv"}).code == kSuccess);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "8", "--alpha", "0.25,0.5", "--query", "-3,3,40",
              "--output", dir / "a.csv"})
              .code == kSuccess);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "12", "--knn", "20", "--alpha", "0.25,0.5", "--query",
              "-3,3,40", "--output", dir / "b.csv"})
              .code == kSuccess);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "8", "--alpha", "0.5", "--query", "-2,2,40", "--output",
              dir / "other.csv"})
              .code == kSuccess);

  REQUIRE(qq({"compare-plotdata", "--input", dir / "a.csv", "--input", dir / "b.csv", "--output", dir / "m.csv"}).code ==
          kSuccess);
  CHECK(line_count(dir / "m.csv") == 1 + (line_count(dir / "a.csv") - 1) + (line_count(dir / "b.csv") - 1));

  REQUIRE(qq({"compare-plotdata", "--input", dir / "a.csv", "--output", dir / "single.csv"}).code == kSuccess);
  CHECK(slurp(dir / "single.csv") == slurp(dir / "a.csv"));

  CHECK(qq({"compare-plotdata", "--input", dir / "a.csv", "--input", dir / "other.csv", "--output", dir / "x.csv"})
            .code == kUsageError);

  spit(dir / "weird.csv", "x,alpha,value,estimator,N,B\n0,0.5,1,lloyd,,\n");
  CHECK(qq({"compare-plotdata", "--input", dir / "weird.csv", "--output", dir / "x.csv"}).code == kUsageError);
  spit(dir / "header.csv", "x,alpha,value\n0,0.5,1\n");
  CHECK(qq({"compare-plotdata", "--input", dir / "header.csv", "--output", dir / "x.csv"}).code == kUsageError);
}

TEST_CASE("key=value config parsing") {
  using qquant::cli::KeyValueConfig;
  const auto cfg = KeyValueConfig::parse("a = 1  # note\n\n# whole line\nlist = 2..16, 3\nflag = yes\n");
  CHECK(cfg.require_u64("a") == 1);
  CHECK(cfg.require_size_list("list") == std::vector<std::size_t>{2, 4, 8, 16, 3});
  CHECK(cfg.bool_or("flag", false));
  CHECK(cfg.double_or("missing", 0.5) == 0.5);
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), qquant::Error);
  CHECK_THROWS_AS(cfg.require("zzz"), qquant::Error);
  CHECK_THROWS_AS(qquant::cli::parse_u64("-3", "n"), qquant::Error);
  CHECK_THROWS_AS(qquant::cli::parse_size_list("8..2", "N"), qquant::Error);
}

TEST_CASE("thread limit from the environment does not change results") {
  Scratch dir;
  REQUIRE(qq({"generate", "-n", "300", "--seed", "4", "--output", dir / "d.csv"}).code == kSuccess);
  setenv("QQ_THREADS", "1", 1);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "10", "-B", "8", "--output", dir / "one.csv"}).code ==
          kSuccess);
  setenv("QQ_THREADS", "4", 1);
  REQUIRE(qq({"estimate", "--input", dir / "d.csv", "-N", "10", "-B", "8", "--output", dir / "four.csv"}).code ==
          kSuccess);
  setenv("QQ_THREADS", "many", 1);
  CHECK(qq({"estimate", "--input", dir / "d.csv", "-N", "10", "--output", dir / "x.csv"}).code == kUsageError);
  unsetenv("QQ_THREADS");
  CHECK(slurp(dir / "one.csv") == slurp(dir / "four.csv"));
}
