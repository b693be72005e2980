#pragma once

#include <array>
#include <cmath>
#include <string>

#include "affordance/camera.hpp"
#include "affordance/error.hpp"
#include "affordance/skeleton.hpp"

namespace affordance {

inline constexpr double kDegenerateViewEpsilon = 1e-9;

/// The lowest joint is whichever ankle is further down the image (larger v);
/// the right ankle wins a tie.
inline int lowest_joint(const Joints2& joints) {
  return joints[kLeftAnkle].y() > joints[kRightAnkle].y() ? kLeftAnkle : kRightAnkle;
}

/// Pose depth from a real-world height. With (g1, g2) the first two entries of
/// the extrinsics gravity row and (du, dv) the pixel offset from the lowest
/// joint to the head,
///
///   d = H f / (g1 du + g2 dv).
///
/// Exact when head and lowest joint share one camera depth.
inline double estimate_pose_depth(const Joints2& joints, double height, const CameraExtrinsics& e,
                                  const CameraIntrinsics& k) {
  if (!(height > 0.0) || !std::isfinite(height)) throw Error(ErrorKind::InvalidInput, "height must be positive");
  const Vec2& head = joints[kHead];
  const Vec2& low = joints[lowest_joint(joints)];
  const auto g = e.gravity_weights();
  const double denom = g[0] * (head.x() - low.x()) + g[1] * (head.y() - low.y());
  if (!(std::abs(denom) >= kDegenerateViewEpsilon)) {
    throw Error(ErrorKind::DegenerateView, "gravity axis is parallel to the optical axis");
  }
  const double d = height * k.f / denom;
  if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "estimated pose depth " + std::to_string(d));
  return d;
}

inline double estimate_pose_depth(const Joints2& joints, double height, const Camera& cam) {
  return estimate_pose_depth(joints, height, cam.extrinsics, cam.intrinsics);
}

/// Back-projects every joint at depth d_pelvis + offset. Offsets are taken
/// relative to the pelvis entry, so the pelvis always lands at d_pelvis.
inline Joints3 lift_pose(const Joints2& joints, const std::array<double, kJointCount>& depth_offsets, double d_pelvis,
                         const CameraExtrinsics& e, const CameraIntrinsics& k) {
  Joints3 out;
  for (int j = 0; j < kJointCount; ++j) {
    const double d = j == kPelvis ? d_pelvis : d_pelvis + (depth_offsets[j] - depth_offsets[kPelvis]);
    if (!(d > 0.0)) {
      throw Error(ErrorKind::NonPositiveDepth,
                  "joint " + std::string(kJointNames[j]) + " at depth " + std::to_string(d));
    }
    out[j] = camera_to_world(pixel_to_camera({joints[j].x(), joints[j].y(), d}, k), e);
  }
  return out;
}

inline Joints3 lift_pose(const Joints2& joints, const std::array<double, kJointCount>& depth_offsets, double d_pelvis,
                         const Camera& cam) {
  return lift_pose(joints, depth_offsets, d_pelvis, cam.extrinsics, cam.intrinsics);
}

}  // namespace affordance
