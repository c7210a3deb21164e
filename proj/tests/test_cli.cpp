#include <doctest.h>

#include "terrafollow/io_util.hpp"
#include "terrafollow/sim.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace terrafollow;

namespace {

std::string cli_bin() {
  const char* bin = std::getenv("TERRAFOLLOW_BIN");
  return bin ? bin : "";
}

int run(const std::string& args) {
  std::string cmd = cli_bin() + " " + args + " > /dev/null 2> /dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path make_tiny_spec(const fs::path& dir) {
  ScenarioSpec s;
  s.terrain = TerrainField::flat(0.0);
  s.trajectory.start = {0, 0, 8};
  s.trajectory.end = {3, 0, 8};
  s.trajectory.speed = 2.0;
  s.radar.beams_per_step = 2;
  s.clutter.range_noise_sigma = 0.03;
  s.clutter.vegetation_rate = 4;
  s.seed = 5;
  fs::create_directories(dir);
  fs::path spec = dir / "scenario.cfg";
  write_text_atomic(spec.string(), serialize_scenario(s));
  return spec;
}

std::string dir_digest(const fs::path& dir) {
  // concatenated relative paths + contents, in sorted order
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string digest;
  for (const auto& f : files) {
    digest += fs::relative(f, dir).string() + "\n" + read_text(f.string()) + "\n";
  }
  return digest;
}

}  // namespace

TEST_CASE("cli end to end" * doctest::skip(false)) {
  if (cli_bin().empty()) {
    MESSAGE("TERRAFOLLOW_BIN not set; skipping CLI tests");
    return;
  }
  fs::path root = fs::temp_directory_path() / "tf_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  fs::path spec = make_tiny_spec(root);

  SUBCASE("simulate is deterministic at the byte level") {
    REQUIRE(run("simulate --spec " + spec.string() + " --out " + (root / "d1").string() +
                " --quiet") == 0);
    REQUIRE(run("simulate --spec " + spec.string() + " --out " + (root / "d2").string() +
                " --quiet") == 0);
    CHECK(dir_digest(root / "d1") == dir_digest(root / "d2"));
    Dataset back = read_dataset((root / "d1").string());
    CHECK(back.frames.size() == 15);
  }

  SUBCASE("pipeline runs and emits the documented outputs") {
    REQUIRE(run("simulate --spec " + spec.string() + " --out " + (root / "d").string() +
                " --quiet") == 0);
    REQUIRE(run("pipeline --data " + (root / "d").string() + " --out " +
                (root / "out").string() + " --quiet --set warmup_frames=3") == 0);
    CHECK(fs::exists(root / "out" / "seg_000000.txt"));
    CHECK(fs::exists(root / "out" / "terrain_controls.txt"));
    CHECK(fs::exists(root / "out" / "altitude_log.txt"));
    CHECK(fs::exists(root / "out" / "summary.txt"));
    std::string log = read_text((root / "out" / "altitude_log.txt").string());
    CHECK(log.find("# t x y z_terr z_cmd extrapolated") == 0);
  }

  SUBCASE("errors exit nonzero") {
    CHECK(run("pipeline --data " + (root / "missing").string() + " --out " +
              (root / "o").string() + " --quiet") != 0);
    // invalid config key
    fs::path bad = root / "bad.cfg";
    write_text_atomic(bad.string(), "no_such_key = 1\n");
    REQUIRE(run("simulate --spec " + spec.string() + " --out " + (root / "d3").string() +
                " --quiet") == 0);
    CHECK(run("pipeline --data " + (root / "d3").string() + " --out " + (root / "o3").string() +
              " --config " + bad.string() + " --quiet") != 0);
    // unknown bench method
    CHECK(run("bench --data " + (root / "d3").string() + " --methods nonsense --out " +
              (root / "r.csv").string() + " --quiet") != 0);
  }

  SUBCASE("bench on a dataset emits the documented schema") {
    REQUIRE(run("simulate --spec " + spec.string() + " --out " + (root / "d4").string() +
                " --quiet") == 0);
    REQUIRE(run("bench --data " + (root / "d4").string() + " --out " + (root / "r4.csv").string() +
                " --quiet --set warmup_frames=3 --set latency_queries=500") == 0);
    std::string csv = read_text((root / "r4.csv").string());
    CHECK(csv.find("scenario,method,precision,recall,iou,f1,rmse_m,lat_mean_ms,lat_p95_ms") !=
          std::string::npos);
    CHECK(csv.find("proposed") != std::string::npos);
    CHECK(csv.find("bsp") != std::string::npos);

    SUBCASE("report bodies identical across runs once latency columns are masked") {
      REQUIRE(run("bench --data " + (root / "d4").string() + " --out " +
                  (root / "r5.csv").string() + " --quiet --set warmup_frames=3" +
                  " --set latency_queries=500") == 0);
      auto mask = [](const std::string& text) {
        std::istringstream in(text);
        std::string line, out;
        while (std::getline(in, line)) {
          size_t col = 0, pos = 0;
          for (int c = 0; c < 7 && pos != std::string::npos; ++c) {
            pos = line.find(',', pos + (c ? 1 : 0));
          }
          col = pos;
          out += (col == std::string::npos ? line : line.substr(0, col)) + "\n";
        }
        return out;
      };
      CHECK(mask(read_text((root / "r4.csv").string())) ==
            mask(read_text((root / "r5.csv").string())));
    }
  }

  fs::remove_all(root);
}
