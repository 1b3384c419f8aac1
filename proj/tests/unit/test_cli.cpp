#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "lab/config.hpp"
#include "lab/run_dir.hpp"
#include "lle/error.hpp"

using namespace lab;
namespace {

const fs::path scratch = LLE_SCRATCH_DIR;
const fs::path configs = LLE_CONFIG_DIR;

int run(const std::string& args, const fs::path& log = {}) {
  std::string cmd = std::string("\"") + LLE_LAB_BINARY + "\" " + args;
  cmd += log.empty() ? " >/dev/null 2>&1" : " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A run small enough for a unit test: 4 cells of 64 points for two time units.
const char* tiny_config = R"([wave]
points = 64
[bloch]
xi_count = 16
[tooth]
cells = 4
knockout = 2
[integrator]
t_end = 2
snapshot_every = 1
[modulation]
keep_gamma_every = 5
)";

fs::path tiny_run(const std::string& name) {
  const fs::path dir = scratch / name;
  fs::remove_all(dir);
  fs::create_directories(scratch);
  write_text(scratch / "tiny.ini", tiny_config);
  return dir;
}

std::string stages_args(const fs::path& dir) {
  return "--config \"" + (scratch / "tiny.ini").string() + "\" --out \"" + dir.string() + "\" ";
}

int count(const std::string& text, const std::string& what) {
  int n = 0;
  for (auto p = text.find(what); p != std::string::npos; p = text.find(what, p + 1)) ++n;
  return n;
}
}  // namespace

TEST_CASE("configuration round trips") {
  RunConfig c;
  c.wave.alpha = 1.25;
  c.tooth.knockout = {3, 4, 9};
  c.integrator.dt = 0.1 / 3;
  c.modulation.gamma_method = lle::GammaMethod::Fit;
  c.run.seed = 123456789012345ULL;
  CHECK(parse_config(serialize(c)) == c);
  CHECK(parse_config(serialize(RunConfig{})) == RunConfig{});
}

TEST_CASE("JSON configuration is accepted") {
  const auto c = parse_config(R"({"wave": {"forcing": 1.2}, "tooth": {"knockout": [1, 2]}, "run": {"seed": 9}})");
  CHECK(c.wave.forcing == 1.2);
  CHECK(c.tooth.knockout == std::vector<std::size_t>{1, 2});
  CHECK(c.run.seed == 9);
}

TEST_CASE("bad configuration is rejected") {
  CHECK_THROWS_AS(parse_config("[wave]\nunknown = 1\n"), lle::Error);
  CHECK_THROWS_AS(parse_config("[integrator]\ndt = -1\n"), lle::Error);
  CHECK_THROWS_AS(parse_config("[integrator]\ndt = 5\n"), lle::Error);
  RunConfig c;
  CHECK_THROWS_AS(apply_override(c, "wave.nothing=1"), lle::Error);
  CHECK_THROWS_AS(apply_override(c, "no_dot"), lle::Error);
  apply_override(c, "tooth.cells=16");
  apply_override(c, "tooth.knockout=7,8");
  CHECK(c.tooth.cells == 16);
  CHECK(c.tooth.knockout == std::vector<std::size_t>{7, 8});
}

TEST_CASE("tables keep every bit") {
  fs::create_directories(scratch);
  Table t{{"a", "b"}, {{0.1, 1.0 / 3}, {-2.5e-300, 6.02214076e23}}};
  t.write(scratch / "t.csv");
  const Table back = Table::read(scratch / "t.csv");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b")[0] == 1.0 / 3);
}

TEST_CASE("sha256") {
  CHECK(sha256_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest detects tampered outputs") {
  const fs::path dir = scratch / "manifest";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "x.txt", "hello");
  {
    RunManifest m(dir, "h1");
    m.record({"stage", "done", 0.1, {"x.txt"}, "", ""});
    m.save();
  }
  CHECK(RunManifest::load_or_create(dir, "h1").stage_complete("stage"));
  CHECK_FALSE(RunManifest::load_or_create(dir, "h2").stage_complete("stage"));
  write_text(dir / "x.txt", "hellO");
  CHECK_FALSE(RunManifest::load_or_create(dir, "h1").stage_complete("stage"));
}

TEST_CASE("same configuration and seed give identical tracks") {
  const fs::path a = tiny_run("det_a"), b = tiny_run("det_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(run(stages_args(dir) + "solve-wave") == 0);
    REQUIRE(run(stages_args(dir) + "evolve") == 0);
    REQUIRE(run(stages_args(dir) + "extract-modulation") == 0);
  }
  for (const char* f : {"tracks/evolve.csv", "tracks/norms.csv", "tracks/modulation.csv"})
    CHECK(read_text(a / f) == read_text(b / f));
  CHECK(read_text(a / "snapshots/v_0002.bin") == read_text(b / "snapshots/v_0002.bin"));
  for (const char* f : {"config.ini", "manifest.json"}) CHECK(fs::exists(a / f));
}

TEST_CASE("resume skips finished stages") {
  const fs::path dir = tiny_run("resume");
  const std::string args = stages_args(dir);
  REQUIRE(run(args + "solve-wave") == 0);
  REQUIRE(run(args + "evolve") == 0);
  const auto stamp = fs::last_write_time(dir / "tracks/evolve.csv");
  const fs::path log = scratch / "resume.log";
  CHECK(run(args + "--resume evolve", log) == 0);
  CHECK(count(read_text(log), "skipped") == 1);
  CHECK(fs::last_write_time(dir / "tracks/evolve.csv") == stamp);
  // A changed configuration reruns the stage.
  CHECK(run(args + "--resume --set integrator.t_end=3 evolve", log) == 0);
  CHECK(count(read_text(log), "skipped") == 0);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch / "codes";
  fs::remove_all(out);
  CHECK(run("pipeline --config \"" + (configs / "zero_state.ini").string() + "\" --out \"" + (out / "zero").string() + "\"") == 0);
  CHECK(run("pipeline --config \"" + (configs / "mi_unstable.ini").string() + "\" --out \"" + (out / "mi").string() + "\"") == 1);
  CHECK(run("no-such-command") == 2);
  CHECK(run("evolve --cells") == 2);
  CHECK(run("--out \"" + (out / "bad").string() + "\" --set integrator.dt=-1 solve-wave") == 2);
  CHECK(run("--out \"" + (out / "low").string() + "\" solve-wave --forcing 0.5 --points 32") == 3);
}
