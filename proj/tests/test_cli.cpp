#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

#include "arsep/errors.hpp"
#include "arsep/runconfig.hpp"
#include "arsep/sweep.hpp"

using namespace arsep;
namespace fs = std::filesystem;

namespace {

// Deterministic fake results so sweeps run instantly.
RunRow fake_row(std::uint64_t seed, const std::string& mode, double overlap) {
  RunRow r;
  r.mode = mode;
  r.overlap = overlap;
  r.seed = seed;
  r.si_sdri = 1.5 * seed + overlap + (mode == "ar" ? 10.0 : 0.0);
  r.sdri = *r.si_sdri - 0.5;
  r.identity_switch_rate = 0.01 * seed;
  return r;
}

RunConfig small_grid(std::vector<std::string> modes, std::vector<double> overlaps,
                     std::vector<std::uint64_t> seeds) {
  RunConfig c;
  c.modes = std::move(modes);
  c.overlaps = std::move(overlaps);
  c.seeds = std::move(seeds);
  c.workers = 2;
  return c;
}

// Rows of "mean std n" from plot_data, skipping comments and blank lines.
std::vector<std::vector<std::string>> plot_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string x; fields >> x;) f.push_back(x);
    rows.push_back(f);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("ARSEP_CLI");
  if (!cli) return -1;
  const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config text sets dotted keys through sections") {
  const auto c = parse_run_config(R"(
# benchmark knobs
[schedule]
steps = 25
sigma_max = 40   # trailing comment
[sampler]
integrator = euler
[grid]
modes = naive, ar
overlaps = 0.5, 0.75
seeds = 3, 7..9
)");
  CHECK(c.bench.steps == 25);
  CHECK(c.bench.sigma_max == 40.0);
  CHECK(c.bench.integrator == Integrator::Euler);
  CHECK(c.modes == std::vector<std::string>{"naive", "ar"});
  CHECK(c.overlaps == std::vector<double>{0.5, 0.75});
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 7, 8, 9});
}

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.seeds.size() == 20);
  CHECK(c.modes.size() == 5);
  CHECK(c.bench.segment_length == 8192);
  CHECK(c.get("pipeline.selection") == "oracle-sisdr");
  c.validate();
}

TEST_CASE("config rejects unknown keys and malformed values") {
  RunConfig c;
  CHECK_THROWS_AS(c.set("schedule.stepz", "10"), ConfigError);
  CHECK_THROWS_AS(c.set("schedule.steps", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("sampler.integrator", "rk4"), ConfigError);
  CHECK_THROWS_AS(c.set("grid.seeds", "9..3"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[broken\n"), ConfigError);
  c.set("grid.modes", "naive, banana");
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sampler.steps is an alias for schedule.steps") {
  RunConfig c;
  c.set("sampler.steps", "12");
  CHECK(c.bench.steps == 12);
  CHECK(c.get("schedule.steps") == "12");
}

TEST_CASE("to_text round trips every key") {
  RunConfig c;
  c.set("scenario.kind", "parallel");
  c.set("bank.bandwidth_scale", "0.125");
  c.set("schedule.sigma_min", "0.003");
  c.set("grid.overlaps", "0, 0.5");
  c.set("grid.seeds", "1..4");
  c.set("sweep.workers", "3");
  const auto back = parse_run_config(to_text(c));
  CHECK(back.entries() == c.entries());
  CHECK(to_text(back) == to_text(c));
}

TEST_CASE("ARSEP_WORKERS sets the default worker count") {
  setenv("ARSEP_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  setenv("ARSEP_WORKERS", "0", 1);
  CHECK(default_workers() >= 1);
  unsetenv("ARSEP_WORKERS");
  CHECK(default_workers() >= 1);
}

TEST_CASE("summaries use the sample standard deviation") {
  const auto s = summarize({1.0, 2.0, 4.0});
  CHECK(s.n == 3);
  CHECK(*s.mean == doctest::Approx(7.0 / 3.0));
  CHECK(*s.std == doctest::Approx(std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 2)));
  CHECK(!summarize({5.0}).std);
  CHECK(!summarize({}).mean);
}

TEST_CASE("1x1x1 sweep has one row and a null std") {
  const auto rep = sweep(small_grid({"ar"}, {0.75}, {4}), fake_row);
  REQUIRE(rep.rows.size() == 1);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].si_sdri.n == 1);
  CHECK(*rep.cells[0].si_sdri.mean == fake_row(4, "ar", 0.75).si_sdri);
  const auto j = to_json(rep);
  CHECK(j["cells"][0]["si_sdri"]["std"].is_null());
  CHECK(j["rows"][0]["config"]["grid.seeds"] == "4");
  CHECK(j["rows"][0]["config"]["grid.modes"] == "ar");
}

TEST_CASE("cell mean is the arithmetic mean of its seeds") {
  const auto rep = sweep(small_grid({"naive", "ar"}, {0.5}, {0, 1, 5}), fake_row);
  CHECK(rep.rows.size() == 6);
  for (const auto& c : rep.cells) {
    double m = 0.0;
    for (std::uint64_t s : {0, 1, 5}) m += *fake_row(s, c.mode, 0.5).si_sdri / 3;
    CHECK(std::abs(*c.si_sdri.mean - m) < 1e-12);
    CHECK(c.si_sdri.n == 3);
  }
}

TEST_CASE("rows follow grid order regardless of worker count") {
  auto cfg = small_grid({"naive", "ar"}, {0.0, 0.5}, {0, 1, 2});
  const auto a = sweep(cfg, fake_row);
  cfg.workers = 1;
  const auto b = sweep(cfg, fake_row);
  REQUIRE(a.rows.size() == 12);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].seed == b.rows[i].seed);
    CHECK(a.rows[i].mode == b.rows[i].mode);
    CHECK(a.rows[i].overlap == b.rows[i].overlap);
  }
  CHECK(a.rows[0].seed == 0);
  CHECK(a.rows[1].mode == "ar");
  CHECK(a.rows[2].overlap == 0.5);
  CHECK(a.rows[4].seed == 1);
}

TEST_CASE("a failing run becomes an error row") {
  std::atomic<int> calls{0};
  const auto rep = sweep(small_grid({"naive", "ar"}, {0.75}, {0, 1}),
                         [&](std::uint64_t seed, const std::string& mode, double r) {
                           ++calls;
                           if (mode == "ar" && seed == 1) throw std::runtime_error("boom");
                           return fake_row(seed, mode, r);
                         });
  CHECK(calls == 4);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[3].error);
  CHECK(!rep.rows[3].si_sdri);
  for (const auto& c : rep.cells) {
    CHECK(c.errors == (c.mode == "ar" ? 1u : 0u));
    CHECK(c.si_sdri.n == (c.mode == "ar" ? 1u : 2u));
  }
  CHECK(rows_csv(rep).find("boom") != std::string::npos);
}

TEST_CASE("row config reproduces a single row") {
  const auto cfg = small_grid({"naive", "ar"}, {0.5, 0.75}, {0, 1});
  RunRow row = fake_row(1, "ar", 0.75);
  const auto rc = row_config(cfg, row);
  CHECK(rc.modes == std::vector<std::string>{"ar"});
  CHECK(rc.overlaps == std::vector<double>{0.75});
  CHECK(rc.seeds == std::vector<std::uint64_t>{1});
  CHECK(rc.bench.steps == cfg.bench.steps);
}

TEST_CASE("plot data for a single cell is one three-field row") {
  const auto rep = sweep(small_grid({"ar"}, {0.75}, {4}), fake_row);
  const auto rows = plot_rows(plot_data(rep));
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].size() == 3);
  CHECK(rows[0][1] == "NaN");
  CHECK(rows[0][2] == "1");
}

TEST_CASE("plot data blocks are sorted by overlap and match the JSON") {
  const auto rep = sweep(small_grid({"naive", "ar"}, {0.75, 0.0, 0.5}, {0, 1, 2}), fake_row);
  const auto text = plot_data(rep);
  const auto rows = plot_rows(text);
  REQUIRE(rows.size() == 6);

  std::vector<double> overlaps;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("# mode=", 0) == 0)
      overlaps.push_back(std::stod(line.substr(line.find("overlap=") + 8)));
  REQUIRE(overlaps.size() == 6);
  CHECK(std::is_sorted(overlaps.begin(), overlaps.end()));
  CHECK(text.find("\n\n\n#") != std::string::npos);

  const auto j = to_json(rep);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool found = false;
    for (const auto& c : j["cells"]) {
      if (c["overlap"].get<double>() != overlaps[i]) continue;
      if (c["si_sdri"]["mean"].get<double>() != std::stod(rows[i][0])) continue;
      CHECK(c["si_sdri"]["std"].get<double>() == std::stod(rows[i][1]));
      CHECK(c["si_sdri"]["n"].get<std::size_t>() == std::stoul(rows[i][2]));
      found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("plot data of an empty report is a domain error") {
  CHECK_THROWS_AS(plot_data(SweepReport{}), DomainError);
}

TEST_CASE("command line exit codes") {
  if (!std::getenv("ARSEP_CLI")) return;
  const auto dir = fs::temp_directory_path() / "arsep_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("sweep --set schedule.stepz=3 --out " + (dir / "s").string()) == 2);
  { std::ofstream(dir / "bad.conf") << "[grid]\nmodes = nope\n"; }
  CHECK(run_cli("sweep --config " + (dir / "bad.conf").string()) == 2);

  REQUIRE(run_cli("synth --duration 2 --segment 1024 --out " + (dir / "syn").string()) == 0);
  const auto mixture = (dir / "syn" / "mixture.wav").string();
  CHECK(fs::exists(mixture));
  CHECK(fs::exists(dir / "syn" / "bank.bin"));

  { std::ofstream(dir / "junk.bin") << "not a bank"; }
  CHECK(run_cli("separate --mode naive --mixture " + mixture + " --bank " + (dir / "junk.bin").string() +
                " --out " + (dir / "sep").string()) == 3);

  fs::create_directories(dir / "refs");
  for (const char* v : {"voice_0.wav", "voice_1.wav"}) fs::copy_file(dir / "syn" / v, dir / "refs" / v);
  CHECK(run_cli("nmf --sources 2 --iters 20 --mixture " + mixture + " --out " + (dir / "nmf").string()) == 0);
  CHECK(run_cli("eval --est " + (dir / "nmf").string() + " --refs " + (dir / "refs").string() +
                " --mixture " + mixture + " --out " + (dir / "report.json").string()) == 0);
  CHECK(fs::exists(dir / "report.json"));
}
