#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "affordance/camera.hpp"
#include "affordance/error.hpp"

namespace affordance {

inline constexpr int kJointCount = 17;
inline constexpr int kBoneCount = 16;
inline constexpr int kPoseClassCount = 30;
inline constexpr int kBackgroundClass = 31;

enum Joint : int {
  kPelvis = 0,
  kRightHip = 1,
  kRightKnee = 2,
  kRightAnkle = 3,
  kLeftHip = 4,
  kLeftKnee = 5,
  kLeftAnkle = 6,
  kSpine = 7,
  kThorax = 8,
  kNeck = 9,
  kHead = 10,
  kLeftShoulder = 11,
  kLeftElbow = 12,
  kLeftWrist = 13,
  kRightShoulder = 14,
  kRightElbow = 15,
  kRightWrist = 16,
};

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "pelvis", "r_hip",   "r_knee", "r_ankle",    "l_hip",   "l_knee",     "l_ankle",   "spine",    "thorax",
    "neck",   "head",    "l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "r_elbow", "r_wrist"};

/// Body part tags used for contact masking. `Foot` is not a bone: it is the
/// region around each ankle joint.
enum class BodyPart : unsigned { PelvisHip = 0, Thigh, Shank, Foot, Torso, Head, Arm };

constexpr unsigned part_bit(BodyPart p) { return 1u << static_cast<unsigned>(p); }

struct Bone {
  int parent;
  int child;
  BodyPart part;
};

inline constexpr std::array<Bone, kBoneCount> kBones = {{
    {0, 1, BodyPart::PelvisHip},
    {1, 2, BodyPart::Thigh},
    {2, 3, BodyPart::Shank},
    {0, 4, BodyPart::PelvisHip},
    {4, 5, BodyPart::Thigh},
    {5, 6, BodyPart::Shank},
    {0, 7, BodyPart::Torso},
    {7, 8, BodyPart::Torso},
    {8, 9, BodyPart::Torso},
    {9, 10, BodyPart::Head},
    {8, 11, BodyPart::Torso},
    {11, 12, BodyPart::Arm},
    {12, 13, BodyPart::Arm},
    {8, 14, BodyPart::Torso},
    {14, 15, BodyPart::Arm},
    {15, 16, BodyPart::Arm},
}};

enum class Category { Standing, Sitting };

constexpr std::string_view to_string(Category c) { return c == Category::Standing ? "standing" : "sitting"; }

inline Category parse_category(std::string_view s) {
  if (s == "standing") return Category::Standing;
  if (s == "sitting") return Category::Sitting;
  throw Error(ErrorKind::InvalidInput, "unknown category '" + std::string(s) + "'");
}

/// Parts that must touch a supporting surface: thighs and pelvis when
/// sitting, feet when standing.
constexpr unsigned contact_parts(Category c) {
  return c == Category::Sitting ? (part_bit(BodyPart::Thigh) | part_bit(BodyPart::PelvisHip))
                                : part_bit(BodyPart::Foot);
}

using Vec2 = Eigen::Vector2d;
using Joints3 = std::array<Vec3, kJointCount>;
using Joints2 = std::array<Vec2, kJointCount>;

struct Pose3D {
  Joints3 joints{};
  Category category = Category::Standing;

  bool finite() const {
    return std::all_of(joints.begin(), joints.end(), [](const Vec3& j) { return j.allFinite(); });
  }
};

namespace detail {

template <class V, std::size_t N>
std::array<V, N> normalize_joints(const std::array<V, N>& p) {
  std::array<V, N> out;
  double radius = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    if (!p[j].allFinite()) throw Error(ErrorKind::DegeneratePose, "non-finite joint " + std::to_string(j));
    out[j] = p[j] - p[0];
    radius = std::max(radius, out[j].norm());
  }
  if (!(radius > 0.0)) throw Error(ErrorKind::DegeneratePose, "all joints coincide");
  for (auto& j : out) j /= radius;
  out[0].setZero();
  return out;
}

template <class V, std::size_t N>
double joint_distance(const std::array<V, N>& a, const std::array<V, N>& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < N; ++j) acc += (a[j] - b[j]).squaredNorm();
  return std::sqrt(acc);
}

}  // namespace detail

/// Pelvis moved to the origin, uniformly scaled so the farthest joint lies at
/// distance 1. No rotation is applied.
inline Joints3 normalize_pose(const Joints3& p) { return detail::normalize_joints(p); }
inline Joints2 normalize_pose(const Joints2& p) { return detail::normalize_joints(p); }

inline double pose_distance(const Joints3& a, const Joints3& b) { return detail::joint_distance(a, b); }
inline double pose_distance(const Joints2& a, const Joints2& b) { return detail::joint_distance(a, b); }

// Gesture frame: x right, y down (image-aligned), z forward (depth). Rotation
// turns the body about the vertical (y) axis; projection drops z.

inline Joints3 rotate_about_vertical(const Joints3& p, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Joints3 out;
  for (int j = 0; j < kJointCount; ++j) {
    const Vec3& q = p[j];
    out[j] = Vec3(c * q.x() + s * q.z(), q.y(), -s * q.x() + c * q.z());
  }
  return out;
}

inline Joints2 project_xy(const Joints3& p) {
  Joints2 out;
  for (int j = 0; j < kJointCount; ++j) out[j] = p[j].head<2>();
  return out;
}

/// Depth of each joint relative to the pelvis in a gesture-frame pose.
inline std::array<double, kJointCount> depth_offsets(const Joints3& gesture) {
  std::array<double, kJointCount> out;
  for (int j = 0; j < kJointCount; ++j) out[j] = gesture[j].z() - gesture[0].z();
  return out;
}

struct PoseClass {
  int class_id = 0;
  Joints3 center{};
  Category category = Category::Standing;
};

/// The 30 gesture clusters. Class 31 is background and has no entry.
class PoseClassLibrary {
 public:
  static constexpr double kFixedPointTolerance = 1e-9;

  PoseClassLibrary() = default;
  explicit PoseClassLibrary(std::vector<PoseClass> classes) : classes_(std::move(classes)) {
    if (classes_.size() != kPoseClassCount) {
      throw Error(ErrorKind::InvalidInput,
                  "class library must have " + std::to_string(kPoseClassCount) + " entries, got " +
                      std::to_string(classes_.size()));
    }
    std::sort(classes_.begin(), classes_.end(), [](const auto& a, const auto& b) { return a.class_id < b.class_id; });
    for (int i = 0; i < kPoseClassCount; ++i) {
      if (classes_[i].class_id != i + 1) {
        throw Error(ErrorKind::InvalidInput, "class ids must be unique and cover 1..30");
      }
      const Joints3 n = normalize_pose(classes_[i].center);
      for (int j = 0; j < kJointCount; ++j) {
        if ((n[j] - classes_[i].center[j]).cwiseAbs().maxCoeff() > kFixedPointTolerance) {
          throw Error(ErrorKind::InvalidInput, "center of class " + std::to_string(i + 1) + " is not normalized");
        }
      }
    }
  }

  const std::vector<PoseClass>& classes() const { return classes_; }
  bool empty() const { return classes_.empty(); }

  const PoseClass& at(int class_id) const {
    if (class_id < 1 || class_id > static_cast<int>(classes_.size())) {
      throw Error(ErrorKind::UnknownClass, "class " + std::to_string(class_id));
    }
    return classes_[class_id - 1];
  }

 private:
  std::vector<PoseClass> classes_;
};

inline Category pose_category(int class_id, const PoseClassLibrary& lib) { return lib.at(class_id).category; }

/// Nearest normalized center; ties go to the smallest class id.
inline int assign_pose_class(const Joints3& p, const PoseClassLibrary& lib) {
  if (lib.empty()) throw Error(ErrorKind::EmptyLibrary, "pose class library is empty");
  const Joints3 n = normalize_pose(p);
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : lib.classes()) {
    const double dist = pose_distance(n, c.center);
    if (dist < best_dist) {
      best_dist = dist;
      best = c.class_id;
    }
  }
  return best;
}

inline int assign_pose_class(const Pose3D& p, const PoseClassLibrary& lib) { return assign_pose_class(p.joints, lib); }

struct Exemplar {
  std::string id;
  Joints3 joints{};  // gesture frame, meters
  Category category = Category::Standing;
};

using Pose3DLibrary = std::vector<Exemplar>;

struct Mapping2Dto3D {
  std::size_t library_index = 0;
  std::size_t rotation_index = 0;
  double theta = 0.0;
  double distance = 0.0;
  Pose3D pose;  // the exemplar rotated by theta, gesture frame
};

inline constexpr int kDefaultRotationCount = 36;

/// theta_k = -pi + 2 pi k / K.
inline double rotation_angle(int k, int count) {
  return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
}

/// Precomputed normalized projections of every exemplar at every candidate
/// rotation, for repeated nearest-neighbour queries.
class RetrievalIndex {
 public:
  RetrievalIndex(const Pose3DLibrary& lib, std::vector<double> thetas) : lib_(&lib), thetas_(std::move(thetas)) {
    if (lib.empty()) throw Error(ErrorKind::EmptyLibrary, "3D pose library is empty");
    if (thetas_.empty()) throw Error(ErrorKind::InvalidInput, "rotation count must be >= 1");
    projections_.reserve(lib.size() * thetas_.size());
    for (const auto& ex : lib) {
      for (double theta : thetas_) projections_.push_back(normalize_pose(project_xy(rotate_about_vertical(ex.joints, theta))));
    }
  }

  /// Discrete rotations theta_k = -pi + 2 pi k / K, k = 0..K-1.
  static RetrievalIndex uniform(const Pose3DLibrary& lib, int rotation_count) {
    if (rotation_count < 1) throw Error(ErrorKind::InvalidInput, "rotation count must be >= 1");
    std::vector<double> thetas(static_cast<std::size_t>(rotation_count));
    for (int k = 0; k < rotation_count; ++k) thetas[k] = rotation_angle(k, rotation_count);
    return RetrievalIndex(lib, std::move(thetas));
  }

  /// `count` rotations drawn uniformly from [-pi, pi).
  template <class Rng>
  static RetrievalIndex sampled(const Pose3DLibrary& lib, int count, Rng& rng) {
    if (count < 1) throw Error(ErrorKind::InvalidInput, "rotation count must be >= 1");
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<double> thetas(static_cast<std::size_t>(count));
    for (auto& t : thetas) t = angle(rng);
    return RetrievalIndex(lib, std::move(thetas));
  }

  /// Nearest candidate; ties broken by (library index, rotation index).
  Mapping2Dto3D query(const Joints2& q) const {
    const Joints2 nq = normalize_pose(q);
    const std::size_t k = thetas_.size();
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < projections_.size(); ++c) {
      const double dist = pose_distance(nq, projections_[c]);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    Mapping2Dto3D out;
    out.library_index = best / k;
    out.rotation_index = best % k;
    out.theta = thetas_[out.rotation_index];
    out.distance = best_dist;
    const Exemplar& ex = (*lib_)[out.library_index];
    out.pose = Pose3D{rotate_about_vertical(ex.joints, out.theta), ex.category};
    return out;
  }

  const std::vector<double>& thetas() const { return thetas_; }

 private:
  const Pose3DLibrary* lib_;
  std::vector<double> thetas_;
  std::vector<Joints2> projections_;
};

inline Mapping2Dto3D map_2d_to_3d(const Joints2& q, const Pose3DLibrary& lib, int rotation_count = kDefaultRotationCount) {
  return RetrievalIndex::uniform(lib, rotation_count).query(q);
}

}  // namespace affordance
