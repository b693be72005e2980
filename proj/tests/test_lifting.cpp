#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "affordance/lifting.hpp"
#include "affordance/synthetic.hpp"
#include "oracles.hpp"

using namespace affordance;

namespace {

Joints2 flat_joints(double u, double v) {
  Joints2 j;
  for (auto& p : j) p = Vec2(u, v);
  return j;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST(LowestJoint, LargerImageRowWinsAndTiesGoRight) {
  Joints2 j = flat_joints(0, 0);
  j[kLeftAnkle] = Vec2(0, 10);
  j[kRightAnkle] = Vec2(0, 9);
  EXPECT_EQ(lowest_joint(j), kLeftAnkle);
  j[kRightAnkle] = Vec2(5, 10);
  EXPECT_EQ(lowest_joint(j), kRightAnkle);
}

TEST(PoseDepth, LevelCameraVerticalSegment) {
  // Camera at height 1 looking along +y; a 1.7 m person standing 4 m away.
  const Camera cam = synthetic::level_camera(Vec3(0, 0, 1.0));
  Joints2 j = flat_joints(320, 240);
  const PixelPoint foot = world_to_pixel(Vec3(0.3, 4.0, 0.0), cam.extrinsics, cam.intrinsics);
  const PixelPoint head = world_to_pixel(Vec3(0.3, 4.0, 1.7), cam.extrinsics, cam.intrinsics);
  j[kRightAnkle] = Vec2(foot.u, foot.v);
  j[kLeftAnkle] = Vec2(foot.u, foot.v);
  j[kHead] = Vec2(head.u, head.v);
  EXPECT_NEAR(estimate_pose_depth(j, 1.7, cam), 4.0, 1e-12);
}

TEST(PoseDepth, RandomLevelCamerasRecoverDepth) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(-3.1, 3.1);
  std::uniform_real_distribution<double> roll(-0.6, 0.6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Camera cam{CameraIntrinsics(400 + 100 * u(rng), 320, 240),
                     CameraExtrinsics(fixture::level_rotation(angle(rng), roll(rng)), Vec3(u(rng), u(rng), 1.2 + u(rng)))};
    const double d = 2.0 + 4.0 * std::abs(u(rng));
    const double h = 1.0 + 0.5 * std::abs(u(rng));
    const Vec3 foot_c(u(rng), 0.5 * u(rng), d);
    const Vec3 foot_w = camera_to_world(foot_c, cam.extrinsics);
    const Vec3 head_w = foot_w + Vec3(0, 0, h);
    Joints2 j = flat_joints(0, -1e6);
    const auto pf = world_to_pixel(foot_w, cam.extrinsics, cam.intrinsics);
    const auto ph = world_to_pixel(head_w, cam.extrinsics, cam.intrinsics);
    j[kRightAnkle] = j[kLeftAnkle] = Vec2(pf.u, pf.v);
    j[kHead] = Vec2(ph.u, ph.v);
    EXPECT_NEAR(estimate_pose_depth(j, h, cam) / d, 1.0, 1e-9);
  }
}

TEST(PoseDepth, IdentityExtrinsicsIsDegenerate) {
  const Camera cam{CameraIntrinsics(500, 320, 240), CameraExtrinsics()};
  Joints2 j = flat_joints(320, 240);
  j[kHead] = Vec2(320, 100);
  EXPECT_EQ(kind_of([&] { estimate_pose_depth(j, 1.7, cam); }), ErrorKind::DegenerateView);
}

TEST(PoseDepth, HeadBelowFeetGivesNonPositiveDepth) {
  const Camera cam = synthetic::level_camera(Vec3(0, 0, 1.0));
  Joints2 j = flat_joints(320, 240);
  j[kHead] = Vec2(320, 400);
  EXPECT_EQ(kind_of([&] { estimate_pose_depth(j, 1.7, cam); }), ErrorKind::NonPositiveDepth);
  EXPECT_EQ(kind_of([&] { estimate_pose_depth(j, 0.0, cam); }), ErrorKind::InvalidInput);
}

TEST(LiftPose, ReprojectsAndKeepsPelvisDepth) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Camera cam{CameraIntrinsics(520, 310, 250), CameraExtrinsics(fixture::random_rotation(rng), Vec3(1, 2, 3))};
  Joints2 j;
  std::array<double, kJointCount> offsets;
  for (int k = 0; k < kJointCount; ++k) {
    j[k] = Vec2(300 + 100 * u(rng), 200 + 100 * u(rng));
    offsets[k] = 0.2 * u(rng);
  }
  offsets[kPelvis] = 0.05;
  const Joints3 w = lift_pose(j, offsets, 3.0, cam);
  for (int k = 0; k < kJointCount; ++k) {
    const auto p = world_to_pixel(w[k], cam.extrinsics, cam.intrinsics);
    EXPECT_NEAR(p.u, j[k].x(), 1e-9);
    EXPECT_NEAR(p.v, j[k].y(), 1e-9);
    EXPECT_NEAR(*p.d, 3.0 + offsets[k] - offsets[kPelvis], 1e-12);
  }
}

TEST(LiftPose, NegativeJointDepthNamesJoint) {
  const Camera cam = synthetic::level_camera(Vec3(0, 0, 1));
  std::array<double, kJointCount> offsets{};
  offsets[kHead] = -5.0;
  try {
    lift_pose(flat_joints(320, 240), offsets, 2.0, cam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveDepth);
    EXPECT_NE(std::string(e.what()).find("head"), std::string::npos);
  }
}
