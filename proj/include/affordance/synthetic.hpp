#pragma once

// Procedural scenes, skeleton templates and cameras for demos and tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "affordance/camera.hpp"
#include "affordance/grid.hpp"
#include "affordance/pipeline.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"

namespace affordance::synthetic {

enum Label : std::uint8_t { kEmpty = 0, kFloor = 1, kWall = 2, kBed = 3, kChair = 4, kTable = 5 };

inline LabelTable indoor_labels() {
  LabelTable t;
  t.set(kFloor, {"floor", true, true});
  t.set(kWall, {"wall", true, false});
  t.set(kBed, {"bed", true, true});
  t.set(kChair, {"chair", true, true});
  t.set(kTable, {"table", true, false});
  return t;
}

inline void fill(Grid3<std::uint8_t>& g, Box3 box, std::uint8_t label) {
  for (int z = std::max(box.lo.z, 0); z < std::min(box.hi.z, g.dims().nz); ++z) {
    for (int y = std::max(box.lo.y, 0); y < std::min(box.hi.y, g.dims().ny); ++y) {
      for (int x = std::max(box.lo.x, 0); x < std::min(box.hi.x, g.dims().nx); ++x) g(x, y, z) = label;
    }
  }
}

/// z-up scene with a one-voxel floor at z = 0.
inline SceneVoxelGrid flat_floor(Dims3 dims = {100, 100, 100}, double voxel_size = kDefaultVoxelSize) {
  Grid3<std::uint8_t> g(dims);
  fill(g, {{0, 0, 0}, {dims.nx, dims.ny, 1}}, kFloor);
  return SceneVoxelGrid(std::move(g), indoor_labels(), voxel_size);
}

/// Floor plus a bed occupying `bed` (top surface layer at bed.hi.z - 1).
inline SceneVoxelGrid floor_and_bed(Dims3 dims = {100, 100, 100}, Box3 bed = {{20, 40, 1}, {80, 80, 26}}) {
  Grid3<std::uint8_t> g(dims);
  fill(g, {{0, 0, 0}, {dims.nx, dims.ny, 1}}, kFloor);
  fill(g, bed, kBed);
  return SceneVoxelGrid(std::move(g), indoor_labels());
}

/// Floor plus a thick wall with a niche carved into it.
inline SceneVoxelGrid floor_and_wall_cavity(Dims3 dims = {100, 100, 100}, int wall_start_y = 55,
                                            Box3 cavity = {{30, 55, 1}, {70, 85, 96}}) {
  Grid3<std::uint8_t> g(dims);
  fill(g, {{0, 0, 0}, {dims.nx, dims.ny, 1}}, kFloor);
  fill(g, {{0, wall_start_y, 1}, {dims.nx, dims.ny, dims.nz}}, kWall);
  fill(g, cavity, kEmpty);
  return SceneVoxelGrid(std::move(g), indoor_labels());
}

// Gesture-frame templates: x right, y down, z forward, meters, pelvis at the
// origin.

struct GestureParams {
  double arm_raise = 0.0;   // radians, shoulders forward/up
  double elbow_bend = 0.0;  // radians
  double knee_bend = 0.0;   // standing only, radians
  double lean = 0.0;        // torso pitch, radians
  double stance = 0.0;      // extra half-width between feet, meters
};

inline Joints3 standing_gesture(const GestureParams& p = {}) {
  Joints3 j;
  const double thigh = 0.44;
  const double shank = 0.44;
  const double kb = p.knee_bend;
  j[kPelvis] = {0, 0, 0};
  for (int side : {-1, 1}) {
    const int hip = side < 0 ? kRightHip : kLeftHip;
    const int knee = side < 0 ? kRightKnee : kLeftKnee;
    const int ankle = side < 0 ? kRightAnkle : kLeftAnkle;
    const double x = side * 0.13;
    const double foot_x = side * (0.13 + p.stance);
    j[hip] = {x, 0, 0};
    j[knee] = {0.5 * (x + foot_x), thigh * std::cos(kb), thigh * std::sin(kb)};
    j[ankle] = {foot_x, j[knee].y() + shank * std::cos(kb), j[knee].z() - shank * std::sin(kb)};
  }
  auto torso = [&](double up) { return Vec3(0, -up * std::cos(p.lean), up * std::sin(p.lean)); };
  j[kSpine] = torso(0.23);
  j[kThorax] = torso(0.48);
  j[kNeck] = torso(0.58);
  j[kHead] = torso(0.72);
  for (int side : {-1, 1}) {
    const int sh = side < 0 ? kRightShoulder : kLeftShoulder;
    const int el = side < 0 ? kRightElbow : kLeftElbow;
    const int wr = side < 0 ? kRightWrist : kLeftWrist;
    j[sh] = torso(0.45) + Vec3(side * 0.17, 0, 0);
    const double a = p.arm_raise;
    j[el] = j[sh] + 0.27 * Vec3(side * 0.05, std::cos(a), std::sin(a));
    const double b = a + p.elbow_bend;
    j[wr] = j[el] + 0.25 * Vec3(side * 0.03, std::cos(b), std::sin(b));
  }
  return j;
}

inline Joints3 sitting_gesture(const GestureParams& p = {}) {
  Joints3 j = standing_gesture({p.arm_raise + 0.9, p.elbow_bend, 0.0, p.lean, 0.0});
  const double thigh = 0.44;
  const double shank = 0.42;
  for (int side : {-1, 1}) {
    const int hip = side < 0 ? kRightHip : kLeftHip;
    const int knee = side < 0 ? kRightKnee : kLeftKnee;
    const int ankle = side < 0 ? kRightAnkle : kLeftAnkle;
    const double x = side * (0.13 + p.stance);
    j[hip] = {side * 0.13, 0, 0};
    j[knee] = {x, 0, thigh};
    j[ankle] = {x, shank, thigh + 0.04};
  }
  return j;
}

/// Gesture parameters and category behind each of the 30 classes: 1-15
/// standing, 16-30 sitting.
inline std::pair<GestureParams, Category> class_params(int class_id) {
  const int i = class_id - 1;
  const int k = i % 15;
  GestureParams p;
  p.arm_raise = 0.25 * (k % 5);
  p.elbow_bend = 0.3 * (k / 5);
  p.lean = 0.04 * (k % 3);
  p.stance = 0.02 * (k % 4);
  const bool standing = i < 15;
  if (standing) p.knee_bend = 0.05 * (k % 2);
  return {p, standing ? Category::Standing : Category::Sitting};
}

inline Joints3 class_gesture(int class_id) {
  const auto [p, c] = class_params(class_id);
  return c == Category::Standing ? standing_gesture(p) : sitting_gesture(p);
}

inline PoseClassLibrary class_library() {
  std::vector<PoseClass> classes;
  for (int id = 1; id <= kPoseClassCount; ++id) {
    classes.push_back({id, normalize_pose(class_gesture(id)), class_params(id).second});
  }
  return PoseClassLibrary(std::move(classes));
}

/// Gesture frame -> z-up world: forward becomes +y rotated by `yaw` about z,
/// and the pelvis lands at `pelvis`.
inline Joints3 place_in_world(const Joints3& gesture, const Vec3& pelvis, double yaw = 0.0) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Joints3 out;
  for (int j = 0; j < kJointCount; ++j) {
    const Vec3 g = gesture[j] - gesture[kPelvis];
    const Vec3 local(g.x(), g.z(), -g.y());
    out[j] = pelvis + Vec3(c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z());
  }
  return out;
}

/// Level camera at `position` looking along world +y (z-up world, gravity row 2).
inline Camera level_camera(const Vec3& position, double f = 500.0, double ox = 320.0, double oy = 240.0) {
  Mat3 r;
  r << 1, 0, 0,
       0, 0, 1,
       0, -1, 0;
  return {CameraIntrinsics(f, ox, oy), CameraExtrinsics(r, position, 2)};
}

/// Camera looking along +y, pitched down by `pitch` radians and rolled by `roll`.
inline Camera tilted_camera(const Vec3& position, double pitch, double roll = 0.0, double f = 500.0) {
  const Camera level = level_camera(position, f);
  const Mat3 pitch_m = Eigen::AngleAxisd(-pitch, Vec3::UnitX()).toRotationMatrix();
  const Mat3 roll_m = Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
  return {level.intrinsics, CameraExtrinsics(level.extrinsics.rotation() * pitch_m * roll_m, position, 2)};
}

/// Pose proposal whose 2D joints and depth offsets are the exact projection
/// of a world pose through `cam`.
inline Proposal project_to_proposal(const Pose3D& pose, const Camera& cam, std::string id,
                                    std::optional<int> class_id = std::nullopt) {
  Proposal p;
  p.id = std::move(id);
  Joints2 j2;
  std::array<double, kJointCount> offsets;
  double pelvis_depth = 0.0;
  for (int j = 0; j < kJointCount; ++j) {
    const PixelPoint px = world_to_pixel(pose.joints[j], cam.extrinsics, cam.intrinsics);
    j2[j] = Vec2(px.u, px.v);
    if (j == kPelvis) pelvis_depth = *px.d;
    offsets[j] = *px.d - pelvis_depth;
  }
  p.joints2d = j2;
  p.depth_offsets = offsets;
  p.class_id = class_id;
  p.category = pose.category;
  return p;
}

/// Standing pose whose foot region bottoms out in voxel layer `foot_layer`
/// (z-up scene, bone radius `radius`), with the ankles at voxel centers.
inline Pose3D standing_on_layer(const SceneVoxelGrid& scene, double x, double y, int foot_layer, int radius,
                                const GestureParams& params = {}, double yaw = 0.0) {
  const Joints3 g = standing_gesture(params);
  const double lowest = std::max(g[kRightAnkle].y(), g[kLeftAnkle].y());
  const double ankle_z = scene.origin().z() + scene.voxel_size() * (foot_layer + radius + 0.5);
  Pose3D pose{place_in_world(g, Vec3(x, y, ankle_z + lowest), yaw), Category::Standing};
  return pose;
}

/// Sitting pose whose thigh and pelvis region bottoms out in voxel layer `seat_layer`.
inline Pose3D sitting_on_layer(const SceneVoxelGrid& scene, double x, double y, int seat_layer, int radius,
                               const GestureParams& params = {}, double yaw = 0.0) {
  const Joints3 g = sitting_gesture(params);
  const double pelvis_z = scene.origin().z() + scene.voxel_size() * (seat_layer + radius + 0.5);
  return {place_in_world(g, Vec3(x, y, pelvis_z), yaw), Category::Sitting};
}

enum class DemoScene { FlatFloor, Bed, WallCavity };

struct Demo {
  SceneVoxelGrid scene;
  Camera camera;
  std::vector<Pose3D> poses;  // ground-truth world poses behind the proposals
  std::vector<Proposal> proposals;
};

/// A scene, a level camera facing it, and `count` proposals that are exact
/// projections of plausible poses: standing on open floor everywhere, plus
/// sitting on the bed edge or standing inside the wall niche.
inline Demo demo(DemoScene kind, int count, std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  Demo out;
  out.scene = kind == DemoScene::FlatFloor ? flat_floor() : (kind == DemoScene::Bed ? floor_and_bed() : floor_and_wall_cavity());
  out.camera = level_camera(Vec3(1.0, -1.8, 1.0), 400.0);
  const int r = 3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    const bool special = kind != DemoScene::FlatFloor && i % 2 == 1;
    const int k = static_cast<int>(rng() % 15);
    const double a = u(rng), b = u(rng), c = u(rng);
    int class_id = 1 + k;
    const GestureParams params = class_params(class_id).first;
    Pose3D pose;
    if (kind == DemoScene::FlatFloor) {
      pose = standing_on_layer(out.scene, 0.5 + a, 0.6 + 0.8 * b, 0, r, params, 2 * pi * c);
    } else if (!special && kind == DemoScene::Bed) {
      pose = standing_on_layer(out.scene, 0.5 + a, 0.3 + 0.15 * b, 0, r, params, 0.6 * (c - 0.5));
    } else if (!special) {
      pose = standing_on_layer(out.scene, 0.6 + 0.8 * a, 0.35 + 0.4 * b, 0, r, params, (c < 0.5 ? -1 : 1) * pi / 2);
    } else if (kind == DemoScene::Bed) {
      class_id = 16 + k;
      pose = sitting_on_layer(out.scene, 0.55 + 0.9 * a, 1.14 + 0.04 * b, 25, r, class_params(class_id).first, pi);
    } else {
      pose = standing_on_layer(out.scene, 0.85 + 0.3 * a, 1.3 + 0.15 * b, 0, r, params, pi);
    }
    out.proposals.push_back(project_to_proposal(pose, out.camera, "p" + std::to_string(i), class_id));
    out.poses.push_back(std::move(pose));
  }
  return out;
}

}  // namespace affordance::synthetic
