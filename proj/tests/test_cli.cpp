#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace bvmc;
namespace fs = std::filesystem;

namespace {

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args)
{
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return Result{code, out.str(), err.str()};
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name)
{
  fs::path dir = fs::temp_directory_path() / ("bvmc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Data rows with the elapsed-time column removed.
std::vector<std::string> data_rows(const std::string &csv)
{
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#"))
      continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto first = line.find(',');
    auto second = line.find(',', first + 1);
    out.push_back(line.substr(0, first) + line.substr(second));
  }
  return out;
}

} // namespace

TEST_CASE("cli: generate and solve exactly")
{
  fs::path dir = scratch("gen");
  std::string model = (dir / "m.gm").string();
  REQUIRE(cli({"gen", "--domain", "job-search", "--n", "3", "--seed", "1", "-o", model}).code == kExitOk);
  Result exact = cli({"exact", "-m", model});
  REQUIRE(exact.code == kExitOk);
  std::istringstream in(exact.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && !line.starts_with("#"))
      ++rows;
  CHECK(rows == 9);

  std::string again = (dir / "m2.gm").string();
  REQUIRE(cli({"gen", "--domain", "job-search", "--n", "3", "--seed", "1", "-o", again}).code == kExitOk);
  CHECK(slurp(model) == slurp(again));
}

TEST_CASE("cli: bv with alpha 0 reproduces vanilla")
{
  fs::path dir = scratch("run");
  std::string model = (dir / "m.gm").string();
  REQUIRE(cli({"gen", "--domain", "job-search", "--n", "4", "--seed", "2", "-o", model}).code == kExitOk);
  Result vanilla = cli({"run", "-m", model, "--chain", "vanilla", "--steps", "3000", "--seed", "9"});
  Result bv = cli({"run", "-m", model, "--chain", "bv", "--alpha", "0", "--steps", "3000", "--seed", "9"});
  REQUIRE(vanilla.code == kExitOk);
  REQUIRE(bv.code == kExitOk);
  CHECK_FALSE(data_rows(vanilla.out).empty());
  CHECK(data_rows(vanilla.out) == data_rows(bv.out));
  Result again = cli({"run", "-m", model, "--chain", "vanilla", "--steps", "3000", "--seed", "9"});
  CHECK(data_rows(again.out) == data_rows(vanilla.out));
}

TEST_CASE("cli: partitions, symmetries and orbit")
{
  fs::path dir = scratch("sym");
  std::string model = (dir / "m.gm").string();
  std::string part = (dir / "p.txt").string();
  REQUIRE(cli({"gen", "--domain", "job-search", "--n", "3", "--edge-prob", "0", "-o", model}).code == kExitOk);
  REQUIRE(cli({"partitions", "-m", model, "-k", "2", "-o", part}).code == kExitOk);
  Result syms = cli({"symmetries", "-m", model, "--singleton-partition"});
  REQUIRE(syms.code == kExitOk);
  CHECK(syms.out.starts_with("bvsym "));
  CHECK(syms.err.find("generators") != std::string::npos);
  Result orbit = cli({"orbit", "-m", model, "--singleton-partition", "--state",
                      "TakesML(0)=1 GetsJob(0)=0 TakesML(1)=0 GetsJob(1)=0 TakesML(2)=0 GetsJob(2)=0"});
  CHECK(orbit.code == kExitOk);
  CHECK(orbit.out.find("# orbit size") != std::string::npos);
  CHECK(cli({"orbit", "-m", model, "--singleton-partition", "--state", "TakesML(0)=1"}).code == kExitRuntime);
}

TEST_CASE("cli: exit codes")
{
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"exact"}).code == kExitUsage);
  CHECK(cli({"run", "--chain", "vanilla"}).code == kExitUsage);
  CHECK(cli({"nonsense"}).code == kExitUsage);

  fs::path dir = scratch("err");
  fs::path bad = dir / "bad.gm";
  std::ofstream(bad) << "var A 2\nfeature OR 1 Z=1\n";
  Result r = cli({"exact", "-m", bad.string()});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.starts_with("error: "));

  std::string model = (dir / "m.gm").string();
  REQUIRE(cli({"gen", "--domain", "job-search", "--n", "2", "-o", model}).code == kExitOk);
  CHECK(cli({"run", "-m", model, "--chain", "bv", "--alpha", "2"}).code != kExitOk);
}
