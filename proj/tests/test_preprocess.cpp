#include <doctest.h>

#include "oracles.hpp"
#include "terrafollow/preprocess.hpp"
#include "terrafollow/rng.hpp"

#include <algorithm>

using namespace terrafollow;

namespace {

PoseTrack stationary_track(const Vec3& position, double duration = 1.0) {
  std::vector<PoseSample> samples;
  for (double t = 0.0; t <= duration + 1e-9; t += 0.0025) {
    RigidTransform pose;
    pose.translation = position;
    samples.push_back({t, pose});
  }
  return PoseTrack(samples);
}

RadarScanFrame one_return_frame(const Vec3& p_radar, double theta = 0.0) {
  RadarScanFrame f;
  f.frame_index = 0;
  f.t_start = 0.0;
  f.t_end = 0.1;
  RadarReturn r;
  r.timestamp = 0.05;
  r.theta = EncoderAngle{theta};
  r.point_radar = p_radar;
  r.is_ground = true;
  f.returns.push_back(r);
  return f;
}

RegisteredFrame frame_with_points(const std::vector<Vec3>& pts, const Vec3& uav) {
  RegisteredFrame f;
  f.uav_position = uav;
  std::uint64_t id = 0;
  for (const auto& p : pts) {
    f.points.push_back({p, 1, 0, id++});
  }
  return f;
}

}  // namespace

TEST_CASE("register_frame basics") {
  RigidTransform mount;

  SUBCASE("stationary UAV at origin") {
    auto reg = register_frame(one_return_frame({0, 0, -4}), stationary_track({0, 0, 0}), mount);
    REQUIRE(reg.points.size() == 1);
    CHECK((reg.points[0].p - Vec3(0, 0, -4)).norm() < 1e-12);
    CHECK(reg.uav_position.norm() < 1e-12);
  }

  SUBCASE("translated UAV") {
    auto reg =
        register_frame(one_return_frame({0, 0, -4}), stationary_track({5, 0, 10}), mount);
    CHECK((reg.points[0].p - Vec3(5, 0, 6)).norm() < 1e-12);
    CHECK((reg.uav_position - Vec3(5, 0, 10)).norm() < 1e-12);
  }

  SUBCASE("moving UAV uses per-point timestamps, checked against the chain oracle") {
    std::vector<PoseSample> samples;
    Rng rng(31);
    for (int i = 0; i <= 100; ++i) {
      double t = i * 0.0025;
      Eigen::Quaterniond q(1.0, 0.02 * rng.gaussian(), 0.02 * rng.gaussian(),
                           0.02 * rng.gaussian());
      q.normalize();
      samples.push_back(
          {t, RigidTransform::from_quaternion(q, Vec3(2.0 * t, 0.3 * t, 10.0))});
    }
    PoseTrack track(samples);
    RigidTransform mount2 = RigidTransform::rotation_z(deg2rad(10));
    mount2.translation = Vec3(0.05, 0, -0.1);

    RadarScanFrame frame;
    frame.frame_index = 3;
    frame.t_start = 0.05;
    frame.t_end = 0.15;
    Rng prng(8);
    for (int i = 0; i < 40; ++i) {
      RadarReturn r;
      r.timestamp = frame.t_start + 0.099 * prng.uniform();
      r.theta = EncoderAngle{prng.uniform(0, 2 * kPi)};
      r.point_radar = Vec3(prng.uniform(-3, 3), prng.uniform(-3, 3), prng.uniform(-9, -4));
      frame.returns.push_back(r);
    }
    auto reg = register_frame(frame, track, mount2);
    REQUIRE(reg.points.size() == frame.returns.size());
    for (size_t i = 0; i < frame.returns.size(); ++i) {
      const auto& r = frame.returns[i];
      Vec3 expect =
          oracles::chain_apply(track.pose_at(r.timestamp), mount2, r.theta.theta, r.point_radar);
      CHECK((reg.points[i].p - expect).norm() < 1e-9);
    }
  }

  SUBCASE("frame fails when too many returns lack pose coverage") {
    PoseTrack track = stationary_track({0, 0, 0}, 0.06);  // covers only part of the frame
    RadarScanFrame frame;
    frame.t_start = 0.0;
    frame.t_end = 0.1;
    for (int i = 0; i < 10; ++i) {
      RadarReturn r;
      r.timestamp = 0.01 * i;  // half beyond the track span
      r.point_radar = Vec3(0, 0, -4);
      frame.returns.push_back(r);
    }
    CHECK_THROWS_AS(register_frame(frame, track, RigidTransform{}, 0.1), RegistrationError);
    CHECK_NOTHROW(register_frame(frame, track, RigidTransform{}, 0.5));
  }
}

TEST_CASE("fov_filter cone test") {
  FovParams fov{deg2rad(60)};

  SUBCASE("straight down retained") {
    auto f = frame_with_points({{0, 0, 0}}, {0, 0, 10});
    CHECK(fov_filter(f, fov).points.size() == 1);
  }
  SUBCASE("horizontal dropped") {
    auto f = frame_with_points({{10, 0, 10}}, {0, 0, 10});
    CHECK(fov_filter(f, fov).points.empty());
  }
  SUBCASE("hand-evaluated ratio 1/sqrt(2)") {
    auto f = frame_with_points({{1, 0, 9}}, {0, 0, 10});
    CHECK(fov_filter(f, fov).points.size() == 1);  // 0.7071 >= 0.5
  }
  SUBCASE("boundary point retained") {
    // ratio exactly cos(60 deg) = 0.5: r = (sqrt(3), 0, -1)
    auto f = frame_with_points({{std::sqrt(3.0), 0, 9}}, {0, 0, 10});
    FovParams exact{std::acos(0.5)};
    CHECK(fov_filter(f, exact).points.size() == 1);
  }
  SUBCASE("zero vector dropped") {
    auto f = frame_with_points({{0, 0, 10}}, {0, 0, 10});
    CHECK(fov_filter(f, fov).points.empty());
  }
  SUBCASE("idempotent and phi=90 keeps exactly the points below") {
    Rng rng(4);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) {
      pts.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-5, 15)});
    }
    auto f = frame_with_points(pts, {0, 0, 10});
    auto once = fov_filter(f, fov);
    auto twice = fov_filter(once, fov);
    REQUIRE(once.points.size() == twice.points.size());
    for (size_t i = 0; i < once.points.size(); ++i) {
      CHECK(once.points[i].id == twice.points[i].id);
    }

    FovParams wide{deg2rad(90)};
    auto below = fov_filter(f, wide);
    size_t expected = 0;
    for (const auto& p : pts) {
      if (p.z() < 10.0 && (p - Vec3(0, 0, 10)).norm() > 0) ++expected;
    }
    CHECK(below.points.size() == expected);
  }
}

TEST_CASE("accumulation window") {
  AccumulationWindow w(3);
  RegisteredFrame f10, f20, f30, f5;
  auto fill = [](RegisteredFrame& f, int n, int frame_idx) {
    f.frame_index = frame_idx;
    for (int i = 0; i < n; ++i) {
      f.points.push_back({Vec3(i, 0, 0), 1, frame_idx,
                          (static_cast<std::uint64_t>(frame_idx) << 32) | i});
    }
  };
  fill(f10, 10, 0);
  fill(f20, 20, 1);
  fill(f30, 30, 2);
  fill(f5, 5, 3);

  CHECK(AccumulationWindow(1).accumulate(f10).size() == 10);
  w.accumulate(f10);
  w.accumulate(f20);
  CHECK(w.accumulate(f30).size() == 60);
  auto out = w.accumulate(f5);
  CHECK(out.size() == 55);  // oldest evicted
  // provenance survives
  bool has_frame1 = false, has_frame0 = false;
  for (const auto& p : out) {
    if (p.source_frame == 1) has_frame1 = true;
    if (p.source_frame == 0) has_frame0 = true;
  }
  CHECK(has_frame1);
  CHECK(!has_frame0);
}

TEST_CASE("grid partition floor semantics") {
  CHECK(grid_index(2.3, 1.0) == 2);
  CHECK(grid_index(-0.1, 1.0) == -1);
  CHECK(grid_index(5.0, 0.5) == 10);

  SUBCASE("partition then flatten is a permutation") {
    Rng rng(17);
    std::vector<WorldPoint> pts;
    for (int i = 0; i < 500; ++i) {
      pts.push_back({Vec3(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-2, 2)), 1, 0,
                     static_cast<std::uint64_t>(i)});
    }
    GridPartition grid = partition(pts, 0.75);
    CHECK(grid.total_points() == pts.size());
    std::vector<std::uint64_t> ids;
    for (const auto& [idx, cell_pts] : grid.cells) {
      for (const auto& p : cell_pts) {
        CHECK(grid_index(p.p.x(), 0.75) == idx.u);
        CHECK(grid_index(p.p.y(), 0.75) == idx.v);
        ids.push_back(p.id);
      }
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    CHECK(ids.size() == pts.size());
  }
}
