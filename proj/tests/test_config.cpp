#include <doctest.h>

#include "terrafollow/config.hpp"

using namespace terrafollow;

TEST_CASE("config round trip is identity") {
  PipelineConfig def;
  CHECK(parse_config(serialize_config(def)) == def);

  PipelineConfig tweaked;
  tweaked.fov_phi = deg2rad(45);
  tweaked.accumulation_frames = 8;
  tweaked.grid_resolution = 0.5;
  tweaked.seg.seed_count = 9;
  tweaked.seg.use_prior = false;
  tweaked.quantile_fraction = 0.35;
  tweaked.degree_y = 2;
  tweaked.seed = 777;
  PipelineConfig back = parse_config(serialize_config(tweaked));
  CHECK(back == tweaked);
  CHECK(serialize_config(back) == serialize_config(tweaked));
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config("fov_phi_deg = 60\nbogus_key = 1\n");
    FAIL("expected rejection");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
}

TEST_CASE("values are validated against type invariants") {
  CHECK_THROWS(parse_config("grid_resolution = 0\n"));
  CHECK_THROWS(parse_config("fov_phi_deg = 120\n"));
  CHECK_THROWS(parse_config("quantile_fraction = 1.0\n"));
  CHECK_THROWS(parse_config("seed_count = 0\n"));
  CHECK_THROWS(parse_config("plane_distance = -1\n"));
  CHECK_THROWS(parse_config("accumulation_frames = abc\n"));
  CHECK_THROWS(parse_config("use_prior = maybe\n"));
}

TEST_CASE("overrides take precedence and are validated") {
  PipelineConfig cfg;
  apply_override(cfg, "seed_count=8");
  CHECK(cfg.seg.seed_count == 8);
  apply_override(cfg, "fov_phi_deg = 45");
  CHECK(cfg.fov_phi == doctest::Approx(deg2rad(45)));
  CHECK_THROWS(apply_override(cfg, "nope=1"));
  CHECK_THROWS(apply_override(cfg, "grid_resolution=-2"));
  CHECK_THROWS(apply_override(cfg, "just_a_word"));
}

TEST_CASE("comments and duplicate keys") {
  PipelineConfig cfg = parse_config("# comment line\n\nseed = 5\n");
  CHECK(cfg.seed == 5);
  CHECK_THROWS(parse_config("seed = 5\nseed = 6\n"));
}
