#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir()
{
  const char* env = std::getenv("D2DSIM_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "d2dsim_cli_tests";
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const std::string& env = "")
{
  const std::string cmd = env + " " + D2DSIM_EXE + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string cfg()
{
  return std::string("--config ") + D2DSIM_DEFAULT_CFG;
}

} // namespace

TEST_CASE("usage errors exit 1")
{
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("sweep --out x.csv") == 1);
  CHECK(run("sweep " + cfg() + " --out x.csv --seed abc") == 1);
  CHECK(run("sweep " + cfg() + " --out x.csv --bogus") == 1);
  CHECK(run("sweep --config /no/such.cfg --out x.csv") == 1);
}

TEST_CASE("config errors exit 2 and leave nothing behind")
{
  const fs::path dir = tmp_dir();
  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "[d2d]\ndensity_per_km2 = -4\n";
  const fs::path out = dir / "bad.csv";
  CHECK(run("sweep --config " + bad.string() + " --out " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(out.string() + ".manifest.json"));
  CHECK(run("sweep " + cfg() + " --out " + out.string(), "D2DSIM_D2D_BAND=XL") == 2);
}

TEST_CASE("runtime errors exit 3")
{
  const fs::path out = tmp_dir() / "nowhere" / "deeper" / "r.csv";
  CHECK(run("sweep " + cfg() + " --trials 1 --out " + out.string(), "D2DSIM_SWEEP_GRID=0") == 3);
}

TEST_CASE("sweep writes CSV and manifest, deterministic across workers")
{
  const fs::path dir = tmp_dir();
  const fs::path a = dir / "a.csv", b = dir / "b.csv";
  const std::string env = "D2DSIM_SWEEP_STRATEGIES=SPR,IAR,BR";
  REQUIRE(run("sweep " + cfg() + " --trials 4 --seed 42 --out " + a.string(), env) == 0);
  REQUIRE(run("sweep " + cfg() + " --trials 4 --seed 42 --workers 3 --out " + b.string(), env) == 0);
  const std::string csv = slurp(a);
  CHECK(csv == slurp(b));
  int lines = 0;
  for (char c : csv)
    lines += c == '\n';
  CHECK(lines == 1 + 5 * 3);

  const std::string manifest = slurp(a.string() + ".manifest.json");
  CHECK(manifest.find("\"master_seed\": 42") != std::string::npos);
  CHECK(manifest.find("\"command\": \"sweep\"") != std::string::npos);
  CHECK(manifest.find("\"seed.trials\": \"4\"") != std::string::npos);
  CHECK_FALSE(fs::exists(a.string() + ".partial"));
}

TEST_CASE("environment overrides reach the run")
{
  const fs::path out = tmp_dir() / "env.csv";
  REQUIRE(run("sweep " + cfg() + " --trials 2 --out " + out.string(),
              "D2DSIM_SWEEP_GRID=0,50 D2DSIM_SWEEP_STRATEGIES=BR") == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("\n0.000000,BR,DL,2,") != std::string::npos);
  CHECK(csv.find("\n50.000000,BR,DL,2,") != std::string::npos);
  CHECK(slurp(out.string() + ".manifest.json").find("\"sweep.strategies\": \"BR\"") != std::string::npos);
}

TEST_CASE("generate-map, simulate and analyze")
{
  const fs::path dir = tmp_dir();
  const fs::path map = dir / "map.json";
  REQUIRE(run("generate-map " + cfg() + " --seed 3 --out " + map.string()) == 0);
  CHECK(slurp(map).find("\"buildings\"") != std::string::npos);
  CHECK(fs::exists(map.string() + ".manifest.json"));

  const fs::path sim = dir / "sim.csv";
  REQUIRE(run("simulate " + cfg() + " --trials 3 --out " + sim.string()) == 0);
  CHECK(slurp(sim).rfind("trial,strategy,band,outcome,", 0) == 0);

  const fs::path ana = dir / "ana.csv";
  REQUIRE(run("analyze " + cfg() + " --trials 20000 --out " + ana.string()) == 0);
  CHECK(slurp(ana).rfind("density_per_km2,", 0) == 0);
}

TEST_CASE("validate exits 0 on a correct build")
{
  const fs::path out = tmp_dir() / "validate.csv";
  REQUIRE(run("validate --trials 20000 --out " + out.string()) == 0);
  const std::string report = slurp(out);
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("broadcast_bfs") != std::string::npos);
}
