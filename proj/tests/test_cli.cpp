#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "quadforge/cli.hpp"
#include "quadforge/optimizer.hpp"
#include "quadforge/rulefile.hpp"

using namespace quadforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "quadforge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("quadforge_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

RuleFile gauss_file(int dim, int p) {
  return RuleFile{p, 0.0, 0.0, 0, {}, tensor_gauss_rule(dim, p + 1)};
}

}  // namespace

TEST_CASE("info") {
  const auto r = run_cli({"info", "--dim", "2", "--p", "3"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("|T| trunk        12") != std::string::npos);
  CHECK(r.out.find("|S| product      37") != std::string::npos);
  CHECK(r.out.find("q lower bound    13") != std::string::npos);
  CHECK(r.out.find("q' tensor Gauss  16") != std::string::npos);
  CHECK(r.out.find("18.8%") != std::string::npos);

  const auto j = run_cli({"info", "--dim", "3", "--p", "6", "--json"});
  CHECK(j.out.find("\"product_size\": 695") != std::string::npos);
  CHECK(j.out.find("\"q_lower_bound\": 174") != std::string::npos);
  CHECK(j.out.find("\"gauss_points\": 343") != std::string::npos);

  const auto low = run_cli({"info", "--dim", "2", "--p", "1"});
  CHECK(low.out.find("q lower bound    3") != std::string::npos);
  CHECK(low.out.find("q = 4") != std::string::npos);
}

TEST_CASE("find writes deterministic rule files") {
  TempDir tmp;
  ::unsetenv("SOURCE_DATE_EPOCH");
  const auto a = run_cli({"find", "--dim", "2", "--p", "3", "--seed", "7", "--out", tmp / "a.json"});
  REQUIRE(a.code == cli::kOk);
  const auto b = run_cli({"find", "--dim", "2", "--p", "3", "--seed", "7", "--threads", "2", "--out", tmp / "b.json"});
  REQUIRE(b.code == cli::kOk);
  CHECK(slurp(tmp / "a.json") == slurp(tmp / "b.json"));
  const RuleFile f = read_rule_file(tmp / "a.json");
  CHECK(f.num_points() == 13);
  CHECK(f.seed == 7);
  CHECK(f.provenance.timestamp.empty());

  CHECK(run_cli({"verify", tmp / "a.json"}).code == cli::kOk);
}

TEST_CASE("find escalates q from a manual start below the bound") {
  TempDir tmp;
  const auto r = run_cli({"find", "--dim", "2", "--p", "1", "--q", "1", "--max-restarts", "4", "--json", "--out",
                          tmp / "r.json"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("\"q_attempted\": 1") != std::string::npos);
  CHECK(read_rule_file(tmp / "r.json").num_points() >= 3);
}

TEST_CASE("budget exhaustion writes telemetry") {
  TempDir tmp;
  const auto r = run_cli({"find", "--dim", "2", "--p", "3", "--q", "5", "--max-restarts", "2", "--max-iters", "500",
                          "--max-q-increments", "1", "--out", tmp / "none.json"});
  CHECK(r.code == cli::kBudgetExhausted);
  CHECK_FALSE(fs::exists(tmp / "none.json"));
  const std::string report = slurp(tmp / "none.json.report.json");
  CHECK(report.find("\"converged\": false") != std::string::npos);
  CHECK(report.find("\"q_final\": 6") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  const auto good = gauss_file(2, 2);
  write_rule_file(tmp / "good.json", good);

  auto heavy = good;
  heavy.rule.mutable_params()[2] = 1.5;
  write_rule_file(tmp / "heavy.json", heavy);

  auto nudged = good;
  nudged.rule.mutable_params()[2] += 1e-6;
  write_rule_file(tmp / "nudged.json", nudged);

  std::string text = serialize_rule(good);
  const auto pos = text.find("\"num_points\": 9");
  REQUIRE(pos != std::string::npos);
  dump(tmp / "count.json", text.replace(pos, 15, "\"num_points\": 8"));
  dump(tmp / "garbage.json", "not json at all");

  write_rule_file(tmp / "cube.json", gauss_file(3, 1));

  struct Row {
    std::vector<std::string> args;
    int code;
  };
  const std::vector<Row> table = {
      {{"info", "--dim", "2", "--p", "4"}, cli::kOk},
      {{"info", "--dim", "4", "--p", "2"}, cli::kUsage},
      {{"info", "--dim", "2", "--p", "0"}, cli::kUsage},
      {{"info", "--dim", "2"}, cli::kUsage},
      {{"bogus"}, cli::kUsage},
      {{}, cli::kUsage},
      {{"find", "--dim", "2", "--p", "3", "--max-restarts", "0"}, cli::kUsage},
      {{"find", "--dim", "2", "--p", "3", "--q", "0"}, cli::kUsage},
      {{"verify", tmp / "good.json"}, cli::kOk},
      {{"verify", tmp / "nudged.json"}, cli::kInexact},
      {{"verify", tmp / "heavy.json"}, cli::kInfeasible},
      {{"verify", tmp / "heavy.json", "--allow-infeasible"}, cli::kInexact},
      {{"verify", tmp / "count.json"}, cli::kDataError},
      {{"verify", tmp / "garbage.json"}, cli::kDataError},
      {{"verify", tmp / "missing.json"}, cli::kNoInput},
      {{"verify", tmp / "good.json", "--json"}, cli::kOk},
      {{"plot", tmp / "good.json", "--out", tmp / "good.svg"}, cli::kOk},
      {{"plot", tmp / "cube.json", "--out", tmp / "cube.svg"}, cli::kUsage},
      {{"plot", tmp / "cube.json", "--out", tmp / "cube.svg", "--projections"}, cli::kOk},
      {{"plot", tmp / "good.json"}, cli::kUsage},
      {{"export", tmp / "good.json", "--format", "xml"}, cli::kUsage},
      {{"export", tmp / "good.json", "--format", "plain"}, cli::kOk},
      {{"export", tmp / "missing.json"}, cli::kNoInput},
      {{"export", tmp / "good.json", "--out", tmp / "no_such_dir/x.csv"}, cli::kSoftware},
  };
  for (const auto& row : table) {
    std::string joined;
    for (const auto& a : row.args) joined += a + " ";
    INFO(joined);
    CHECK(run_cli(row.args).code == row.code);
  }
}

TEST_CASE("export CSV round trip through the CLI") {
  TempDir tmp;
  write_rule_file(tmp / "g.json", gauss_file(2, 3));
  REQUIRE(run_cli({"export", tmp / "g.json", "--out", tmp / "g.csv"}).code == cli::kOk);
  const std::string csv = slurp(tmp / "g.csv");
  CHECK(parse_csv(csv) == tensor_gauss_rule(2, 4));
  const auto r = run_cli({"export", tmp / "g.json"});
  CHECK(r.out == csv);
}

TEST_CASE("bundled rules resolve by name") {
  ::setenv("QUADFORGE_RULES_DIR", QUADFORGE_TEST_RULES_DIR, 1);
  CHECK(cli::rules_dir() == fs::path(QUADFORGE_TEST_RULES_DIR));

  const auto v5 = run_cli({"verify", "2d_p5"});
  CHECK(v5.code == cli::kOk);
  CHECK(v5.out.find("q=27") != std::string::npos);

  TempDir tmp;
  REQUIRE(run_cli({"plot", "2d_p4", "--out", tmp / "p4.svg"}).code == cli::kOk);
  const std::string svg = slurp(tmp / "p4.svg");
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  CHECK(circles == 19);

  ::setenv("QUADFORGE_RULES_DIR", (tmp / "empty").c_str(), 1);
  CHECK(run_cli({"verify", "2d_p5"}).code == cli::kNoInput);
  ::unsetenv("QUADFORGE_RULES_DIR");
}
