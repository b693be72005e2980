#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

#include "affordance/error.hpp"

namespace affordance {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CameraIntrinsics {
  double f = 1.0;
  double ox = 0.0;
  double oy = 0.0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double focal, double principal_x, double principal_y) : f(focal), ox(principal_x), oy(principal_y) {
    if (!(f > 0.0) || !std::isfinite(f)) throw Error(ErrorKind::InvalidInput, "focal length must be positive");
    if (!std::isfinite(ox) || !std::isfinite(oy)) throw Error(ErrorKind::InvalidInput, "principal point not finite");
  }
};

/// Camera-to-world rigid transform: world = rotation * camera + translation.
/// `gravity_row` selects the row of `rotation` whose output is world height.
class CameraExtrinsics {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  CameraExtrinsics() = default;
  CameraExtrinsics(const Mat3& rotation, const Vec3& translation, int gravity_row = 2)
      : rotation_(rotation), translation_(translation), gravity_row_(gravity_row) {
    validate();
  }

  /// Builds the camera-to-world form from a world-to-camera transform
  /// (camera = r * world + t).
  static CameraExtrinsics from_world_to_camera(const Mat3& r, const Vec3& t, int gravity_row = 2) {
    CameraExtrinsics probe;
    probe.rotation_ = r;
    probe.validate();
    return CameraExtrinsics(r.transpose(), -(r.transpose() * t), gravity_row);
  }

  /// Row-major 3x4 [r | t] in camera-to-world convention.
  static CameraExtrinsics from_row_major(const std::array<double, 12>& m, bool world_to_camera, int gravity_row = 2) {
    Mat3 r;
    r << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    const Vec3 t(m[3], m[7], m[11]);
    return world_to_camera ? from_world_to_camera(r, t, gravity_row) : CameraExtrinsics(r, t, gravity_row);
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  int gravity_row() const { return gravity_row_; }

  /// First two entries of the gravity row; they weight the horizontal and
  /// vertical pixel extents in the depth-from-height formula.
  std::array<double, 2> gravity_weights() const {
    return {rotation_(gravity_row_, 0), rotation_(gravity_row_, 1)};
  }

  std::array<double, 12> row_major() const {
    const Mat3& r = rotation_;
    const Vec3& t = translation_;
    return {r(0, 0), r(0, 1), r(0, 2), t(0), r(1, 0), r(1, 1), r(1, 2), t(1), r(2, 0), r(2, 1), r(2, 2), t(2)};
  }

 private:
  void validate() const {
    if (gravity_row_ < 0 || gravity_row_ > 2) {
      throw Error(ErrorKind::InvalidInput, "gravity_row must be 0, 1 or 2");
    }
    if (!rotation_.allFinite() || !translation_.allFinite()) {
      throw Error(ErrorKind::InvalidInput, "extrinsics contain non-finite values");
    }
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = rotation_.determinant();
    if (ortho > kOrthonormalTolerance || std::abs(det - 1.0) > kOrthonormalTolerance) {
      throw Error(ErrorKind::InvalidInput, "rotation is not orthonormal with det +1");
    }
  }

  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
  int gravity_row_ = 2;
};

struct Camera {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  std::optional<double> d;  // depth along the optical axis, meters
};

inline Vec3 pixel_to_camera(const PixelPoint& p, const CameraIntrinsics& k) {
  if (!p.d) throw Error(ErrorKind::MissingDepth, "pixel has no depth");
  const double d = *p.d;
  if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "depth " + std::to_string(d));
  return {(p.u - k.ox) * d / k.f, (p.v - k.oy) * d / k.f, d};
}

inline Vec3 camera_to_world(const Vec3& c, const CameraExtrinsics& e) {
  return e.rotation() * c + e.translation();
}

inline Vec3 world_to_camera(const Vec3& w, const CameraExtrinsics& e) {
  return e.rotation().transpose() * (w - e.translation());
}

inline PixelPoint camera_to_pixel(const Vec3& c, const CameraIntrinsics& k) {
  if (!(c.z() > 0.0)) throw Error(ErrorKind::BehindCamera, "camera depth " + std::to_string(c.z()));
  return {k.f * c.x() / c.z() + k.ox, k.f * c.y() / c.z() + k.oy, c.z()};
}

inline PixelPoint world_to_pixel(const Vec3& w, const CameraExtrinsics& e, const CameraIntrinsics& k) {
  return camera_to_pixel(world_to_camera(w, e), k);
}

inline Vec3 pixel_to_world(const PixelPoint& p, const Camera& cam) {
  return camera_to_world(pixel_to_camera(p, cam.intrinsics), cam.extrinsics);
}

}  // namespace affordance
