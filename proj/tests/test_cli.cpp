#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <sstream>

#include "lgdp/cli.hpp"
#include "lgdp/ingest.hpp"
#include "support.hpp"

using namespace lgdp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "lgdp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Simulates a small panel into dir/sim and returns the generated fit config.
fs::path simulate_small(const test::TempDir& dir, const std::string& extra = "") {
  test::write_file(dir / "sim.cfg",
                   "sim.countries = 2\nsim.years = 12\nchains = 2\niterations = 120\n"
                   "burnin = 60\nseed = 5\n" + extra);
  const auto r = run({"simulate", "--config", (dir / "sim.cfg").string(), "--out",
                      (dir / "sim").string(), "--quiet"});
  REQUIRE(r.code == 0);
  return dir / "sim" / "fit.cfg";
}

}  // namespace

TEST_CASE("fit writes every artifact and reruns byte-identically") {
  test::TempDir dir("cli");
  const auto cfg = simulate_small(dir);
  const auto a = run({"fit", "--config", cfg.string(), "--out", (dir / "a").string()});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  for (const char* f : {"draws/manifest.txt", "estimates.csv", "convergence.txt", "run_manifest.txt"})
    CHECK(fs::exists(dir / "a" / f));
  CHECK(a.err.find("PSR") != std::string::npos);
  const auto manifest = test::read_file(dir / "a" / "run_manifest.txt");
  CHECK(manifest.rfind("tool lgdp ", 0) == 0);
  CHECK(manifest.find("\nseed 5\n") != std::string::npos);
  CHECK(manifest.find("panel.csv") != std::string::npos);

  const auto b = run({"fit", "--config", cfg.string(), "--out", (dir / "b").string(), "--quiet"});
  REQUIRE(b.code == 0);
  CHECK(b.err.empty());
  CHECK(test::read_file(dir / "a" / "estimates.csv") == test::read_file(dir / "b" / "estimates.csv"));
  for (const char* p : {"theta_gdp", "alpha", "ypred"})
    CHECK(test::read_file(DrawStore::chain_file(dir / "a" / "draws", 1, p)) ==
          test::read_file(DrawStore::chain_file(dir / "b" / "draws", 1, p)));

  const auto c = run({"fit", "--config", cfg.string(), "--out", (dir / "c").string(), "--quiet",
                      "--seed", "6"});
  REQUIRE(c.code == 0);
  CHECK(test::read_file(dir / "a" / "estimates.csv") != test::read_file(dir / "c" / "estimates.csv"));

  const auto again = run({"fit", "--config", cfg.string(), "--out", (dir / "a").string()});
  CHECK(again.code == 2);
  CHECK(again.err.find("already exists") != std::string::npos);
  CHECK(fs::exists(dir / "a" / "estimates.csv"));
}

TEST_CASE("fit with a missing input file exits 2, names the file and leaves no output") {
  test::TempDir dir("cli");
  test::write_file(dir / "fit.cfg", "input = nowhere.csv\nchains = 1\niterations = 10\nburnin = 5\n");
  const auto r = run({"fit", "--config", (dir / "fit.cfg").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("nowhere.csv") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("invalid configuration values exit 2 and remove partial outputs") {
  test::TempDir dir("cli");
  const auto cfg = simulate_small(dir);
  auto text = test::read_file(cfg);
  test::write_file(dir / "sim" / "bad.cfg", text + "prior.intercept_spread = sideways\n");
  const auto r = run({"fit", "--config", (dir / "sim" / "bad.cfg").string(), "--out",
                      (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("intercept_spread") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  fs::create_directories(dir / "kept");
  test::write_file(dir / "kept" / "notes.txt", "mine");
  test::write_file(dir / "sim" / "bad2.cfg", text + "iterations = lots\n");
  CHECK(run({"fit", "--config", (dir / "sim" / "bad2.cfg").string(), "--out",
             (dir / "kept").string()}).code == 2);
  CHECK(test::read_file(dir / "kept" / "notes.txt") == "mine");
  CHECK_FALSE(fs::exists(dir / "kept" / "draws"));

  CHECK(run({"fit", "--config", (dir / "missing.cfg").string(), "--out", (dir / "x").string()})
            .code == 2);
  CHECK(run({"fit"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("validate with one and with two stores") {
  test::TempDir dir("cli");
  const auto cfg = simulate_small(dir);
  REQUIRE(run({"fit", "--config", cfg.string(), "--out", (dir / "a").string(), "--quiet"}).code == 0);
  REQUIRE(run({"fit", "--config", cfg.string(), "--out", (dir / "b").string(), "--quiet",
               "--seed", "9"}).code == 0);

  const auto one = run({"validate", "--config", cfg.string(), "--out", (dir / "v1").string(),
                        "--quiet", (dir / "a").string()});
  REQUIRE_MESSAGE(one.code == 0, one.err);
  for (const char* f : {"zscores.csv", "zscores_by_item.csv", "zscores_by_count.csv", "coverage.csv",
                        "item_bias.csv", "uncertainty.csv", "correlation.csv",
                        "correlation_long.csv", "run_manifest.txt"})
    CHECK(fs::exists(dir / "v1" / f));
  CHECK_FALSE(fs::exists(dir / "v1" / "rmse.csv"));

  const auto two = run({"validate", "--config", cfg.string(), "--out", (dir / "v2").string(),
                        "--quiet", (dir / "a" / "draws").string(), (dir / "b").string()});
  REQUIRE_MESSAGE(two.code == 0, two.err);
  const auto rmse = test::read_file(dir / "v2" / "rmse.csv");
  CHECK(rmse.find('\n') < rmse.size() - 1);

  fs::create_directories(dir / "empty");
  const auto bad = run({"validate", "--config", cfg.string(), "--out", (dir / "v3").string(),
                        (dir / "empty").string()});
  CHECK(bad.code == 3);
  CHECK_FALSE(fs::exists(dir / "v3"));
  CHECK(run({"validate", "--config", cfg.string(), "--out", (dir / "v4").string()}).code == 2);
}

TEST_CASE("validate rejects a store from a different panel") {
  test::TempDir dir("cli");
  const auto cfg = simulate_small(dir);
  REQUIRE(run({"fit", "--config", cfg.string(), "--out", (dir / "a").string(), "--quiet"}).code == 0);
  test::TempDir other("cli");
  const auto other_cfg = simulate_small(other, "sim.countries = 3\n");
  const auto r = run({"validate", "--config", other_cfg.string(), "--out", (dir / "v").string(),
                      (dir / "a").string()});
  CHECK(r.code == 3);
}

TEST_CASE("simulate is deterministic and reports an empty panel") {
  test::TempDir dir("cli");
  test::write_file(dir / "sim.cfg", "sim.countries = 3\nsim.years = 20\nseed = 4\n");
  const auto cfg = (dir / "sim.cfg").string();
  REQUIRE(run({"simulate", "--config", cfg, "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--out", (dir / "b").string()}).code == 0);
  for (const char* f : {"panel.csv", "true_params.txt", "fit.cfg"})
    CHECK(test::read_file(dir / "a" / f) == test::read_file(dir / "b" / f));

  test::write_file(dir / "none.cfg", "sim.countries = 3\nsim.years = 20\nsim.missing_rate = 1\n");
  const auto r = run({"simulate", "--config", (dir / "none.cfg").string(), "--out",
                      (dir / "c").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("no observations") != std::string::npos);
  CHECK(load_records(dir / "c" / "panel.csv").empty());

  test::write_file(dir / "bad.cfg", "sim.tau_gdp = -1\n");
  CHECK(run({"simulate", "--config", (dir / "bad.cfg").string(), "--out", (dir / "d").string()})
            .code == 2);
  CHECK_FALSE(fs::exists(dir / "d"));
}

TEST_CASE("simulating 5 countries x 100 years x 16 items takes under a minute") {
  test::TempDir dir("cli");
  test::write_file(dir / "sim.cfg", "sim.countries = 5\nsim.years = 100\nseed = 2\n");
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"simulate", "--config", (dir / "sim.cfg").string(), "--out",
                      (dir / "out").string(), "--quiet"});
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(r.code == 0);
  CHECK(elapsed < std::chrono::seconds(60));
  const auto records = load_records(dir / "out" / "panel.csv");
  CHECK(records.size() > 5 * 100 * 16 / 2);
  CHECK(records.size() <= 5 * 100 * 16);
}

TEST_CASE("the installed binary reports its version") {
  test::TempDir dir("cli");
  const auto out = dir / "version.txt";
  const auto cmd = std::string(LGDP_CLI_PATH) + " --version > " + out.string();
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(test::read_file(out).find("1.0.0") != std::string::npos);
  const auto usage = std::string(LGDP_CLI_PATH) + " fit > /dev/null 2>&1";
  const int status = std::system(usage.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
