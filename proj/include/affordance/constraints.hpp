#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "affordance/error.hpp"
#include "affordance/grid.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"

namespace affordance {

/// Thresholds are in voxel units at the scene resolution; `t_s` is a sum of
/// support-field values and therefore depends on both voxel size and kernel.
struct ConstraintConfig {
  int t_f = 5;
  double t_s = 100.0;
  int support_proximity = 8;
  double search_radius_m = 0.3;
  int bone_radius = 3;

  void validate() const {
    if (t_f < 0) throw Error(ErrorKind::InvalidInput, "t_f must be >= 0");
    if (!(t_s > 0.0)) throw Error(ErrorKind::InvalidInput, "t_s must be > 0");
    if (support_proximity < 0) throw Error(ErrorKind::InvalidInput, "support_proximity must be >= 0");
    if (!(search_radius_m >= 0.0) || !std::isfinite(search_radius_m)) {
      throw Error(ErrorKind::InvalidInput, "search_radius_m must be >= 0");
    }
    if (bone_radius < 0) throw Error(ErrorKind::InvalidInput, "bone_radius must be >= 0");
  }

  /// Search window half-width in voxels.
  int window_radius(double voxel_size) const {
    return static_cast<int>(std::floor(search_radius_m / voxel_size + 1e-9));
  }
};

/// Pelvis-anchored voxel footprint of a pose. All offset lists are sorted
/// lexicographically; `contact` and `free_check` partition `offsets`.
struct PoseVoxelization {
  Index3 anchor;                 // pelvis voxel in scene coordinates
  std::vector<Index3> offsets;   // relative to anchor
  std::vector<unsigned> parts;   // BodyPart bitmask per offset
  std::vector<Index3> contact;   // offsets belonging to the category's contact parts
  std::vector<Index3> free_check;
  Category category = Category::Standing;
};

namespace detail {

// round(num / den) with halves away from zero; den > 0.
constexpr int round_div(long long num, long long den) {
  return num >= 0 ? static_cast<int>((2 * num + den) / (2 * den)) : -static_cast<int>((-2 * num + den) / (2 * den));
}

}  // namespace detail

/// Integer line stepping from a to b inclusive: max|b - a| + 1 voxels, each
/// coordinate rounded half away from zero relative to a.
inline std::vector<Index3> rasterize_segment(Index3 a, Index3 b) {
  const Index3 delta = b - a;
  const int n = delta.chebyshev_norm();
  std::vector<Index3> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  if (n == 0) {
    out.push_back(a);
    return out;
  }
  for (int k = 0; k <= n; ++k) {
    out.push_back({a.x + detail::round_div(static_cast<long long>(k) * delta.x, n),
                   a.y + detail::round_div(static_cast<long long>(k) * delta.y, n),
                   a.z + detail::round_div(static_cast<long long>(k) * delta.z, n)});
  }
  return out;
}

/// Bones are rasterized by integer line stepping and dilated by a Chebyshev
/// ball of `bone_radius`; each ankle additionally stamps a ball tagged Foot.
inline PoseVoxelization voxelize_pose(const Pose3D& pose, const SceneVoxelGrid& scene, const ConstraintConfig& cfg) {
  if (!pose.finite()) throw Error(ErrorKind::DegeneratePose, "pose has non-finite joints");
  const int r = cfg.bone_radius;
  if (r < 0) throw Error(ErrorKind::InvalidInput, "bone_radius must be >= 0");

  std::array<Index3, kJointCount> joint_voxels;
  for (int j = 0; j < kJointCount; ++j) joint_voxels[j] = scene.world_to_voxel(pose.joints[j]);
  const Index3 anchor = joint_voxels[kPelvis];

  Index3 lo = joint_voxels[0];
  Index3 hi = joint_voxels[0];
  for (const auto& v : joint_voxels) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  }
  for (int a = 0; a < 3; ++a) {
    lo[a] -= r;
    hi[a] += r + 1;
  }
  const Dims3 box{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  if (box.count() > (std::size_t{1} << 27)) {
    throw Error(ErrorKind::DegeneratePose, "pose extent too large for the voxel size");
  }
  Grid3<std::uint16_t> mask(box);

  auto stamp = [&](Index3 c, unsigned bits) {
    for (int dz = -r; dz <= r; ++dz) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          mask(Index3{c.x + dx, c.y + dy, c.z + dz} - lo) |= static_cast<std::uint16_t>(bits);
        }
      }
    }
  };
  for (const Bone& bone : kBones) {
    for (const Index3& v : rasterize_segment(joint_voxels[bone.parent], joint_voxels[bone.child])) {
      stamp(v, part_bit(bone.part));
    }
  }
  stamp(joint_voxels[kRightAnkle], part_bit(BodyPart::Foot));
  stamp(joint_voxels[kLeftAnkle], part_bit(BodyPart::Foot));

  PoseVoxelization out;
  out.anchor = anchor;
  out.category = pose.category;
  const unsigned contact = contact_parts(pose.category);
  for (int x = 0; x < box.nx; ++x) {
    for (int y = 0; y < box.ny; ++y) {
      for (int z = 0; z < box.nz; ++z) {
        const unsigned bits = mask(x, y, z);
        if (bits == 0) continue;
        const Index3 o = Index3{x, y, z} + lo - anchor;
        out.offsets.push_back(o);
        out.parts.push_back(bits);
        (bits & contact ? out.contact : out.free_check).push_back(o);
      }
    }
  }
  return out;
}

/// R_f: number of non-contact body voxels that land on occupied scene voxels.
/// Voxels outside the grid count as occupied.
inline int free_space_response(const PoseVoxelization& vox, const BinaryGrid& vf, Index3 anchor) {
  int count = 0;
  for (const Index3& o : vox.free_check) count += vf.values.value_or(anchor + o, 1) != 0 ? 1 : 0;
  return count;
}

inline int free_space_response(const PoseVoxelization& vox, const BinaryGrid& vf) {
  return free_space_response(vox, vf, vox.anchor);
}

/// R_s: sum of the support field under the contact voxels (zero outside the grid).
inline double support_response(const PoseVoxelization& vox, const SupportField& field, Index3 anchor) {
  double acc = 0.0;
  for (const Index3& o : vox.contact) acc += field.at(anchor + o);
  return acc;
}

inline double support_response(const PoseVoxelization& vox, const SupportField& field) {
  return support_response(vox, field, vox.anchor);
}

/// Scene grids derived once and shared by every constraint query.
struct PreparedScene {
  std::shared_ptr<const SceneVoxelGrid> scene;
  BinaryGrid free_space;
  SupportField support;
  SupportField floor_support;

  static PreparedScene build(std::shared_ptr<const SceneVoxelGrid> scene,
                             const GaussianKernel3D& kernel = GaussianKernel3D::make(),
                             double eps = kDefaultSurfaceEps, unsigned workers = 1) {
    PreparedScene out;
    out.free_space = build_free_space_grid(*scene);
    out.support = detect_support_surface(*scene, kernel, eps, workers);
    out.floor_support = restrict_to_floor(out.support, *scene);
    out.scene = std::move(scene);
    return out;
  }

  static PreparedScene build(const SceneVoxelGrid& scene, const GaussianKernel3D& kernel = GaussianKernel3D::make(),
                             double eps = kDefaultSurfaceEps, unsigned workers = 1) {
    return build(std::make_shared<const SceneVoxelGrid>(scene), kernel, eps, workers);
  }

  /// Standing poses are supported by the floor only; sitting poses by any
  /// affordable surface.
  const SupportField& field_for(Category c) const { return c == Category::Standing ? floor_support : support; }
};

/// Standing: some foot voxel rests on a floor surface. Sitting: the contact
/// response reaches t_s.
inline bool support_satisfied(Category c, double r_s, const ConstraintConfig& cfg) {
  return c == Category::Standing ? r_s > 0.0 : r_s >= cfg.t_s;
}

/// Support responses for every translation t with |t|_inf <= radius, stored
/// x-fastest over the (2 radius + 1)^3 window. Each entry is bit-identical to
/// support_response(vox, field, vox.anchor + t).
inline std::vector<double> support_window(const PoseVoxelization& vox, const SupportField& field, int radius) {
  const int w = 2 * radius + 1;
  std::vector<double> acc(static_cast<std::size_t>(w) * w * w, 0.0);
  const Dims3 d = field.dims();
  const auto& values = field.values();
  for (const Index3& o : vox.contact) {
    const Index3 base = vox.anchor + o - Index3{radius, radius, radius};
    for (int tz = 0; tz < w; ++tz) {
      const int z = base.z + tz;
      if (!field.plane_nonzero(z)) continue;
      for (int ty = 0; ty < w; ++ty) {
        const int y = base.y + ty;
        if (!field.row_nonzero(y, z)) continue;
        const int tx_lo = std::max(0, -base.x);
        const int tx_hi = std::min(w, d.nx - base.x);
        double* row = acc.data() + static_cast<std::size_t>(w) * (ty + static_cast<std::size_t>(w) * tz);
        for (int tx = tx_lo; tx < tx_hi; ++tx) {
          const double v = values(base.x + tx, y, z);
          if (v != 0.0) row[tx] += v;
        }
      }
    }
  }
  return acc;
}

namespace detail {

inline bool free_within(const PoseVoxelization& vox, const BinaryGrid& vf, Index3 anchor, int limit) {
  int count = 0;
  for (const Index3& o : vox.free_check) {
    if (vf.values.value_or(anchor + o, 1) != 0 && ++count > limit) return false;
  }
  return true;
}

/// Window offsets ordered by (squared displacement, lexicographic).
inline const std::vector<Index3>& displacement_order(int radius) {
  static std::mutex mu;
  static std::vector<std::vector<Index3>> cache;
  std::lock_guard lock(mu);
  if (cache.size() <= static_cast<std::size_t>(radius)) cache.resize(static_cast<std::size_t>(radius) + 1);
  auto& order = cache[static_cast<std::size_t>(radius)];
  if (order.empty()) {
    for (int z = -radius; z <= radius; ++z) {
      for (int y = -radius; y <= radius; ++y) {
        for (int x = -radius; x <= radius; ++x) order.push_back({x, y, z});
      }
    }
    std::sort(order.begin(), order.end(), [](const Index3& a, const Index3& b) {
      const auto na = a.squared_norm();
      const auto nb = b.squared_norm();
      return na != nb ? na < nb : a < b;
    });
  }
  return order;
}

}  // namespace detail

enum class AdjustStatus { Accepted, NoFeasibleLocation, InsufficientSupport };

constexpr std::string_view to_string(AdjustStatus s) {
  switch (s) {
    case AdjustStatus::Accepted: return "accepted";
    case AdjustStatus::NoFeasibleLocation: return "no_feasible_location";
    case AdjustStatus::InsufficientSupport: return "insufficient_support";
  }
  return "unknown";
}

/// When accepted, `pose` is the translated pose and the responses are those at
/// the chosen translation. When discarded, the responses are the best found:
/// the best feasible translation if one exists, otherwise R_f at zero
/// displacement and the largest R_s anywhere in the window.
struct AdjustResult {
  AdjustStatus status = AdjustStatus::NoFeasibleLocation;
  Pose3D pose;
  Index3 displacement;
  int r_f = 0;
  double r_s = 0.0;

  bool accepted() const { return status == AdjustStatus::Accepted; }
};

/// Rigidly translates the pose by the integer voxel offset, within the
/// search window, that maximizes R_s subject to R_f <= t_f. Ties go to the
/// smallest displacement, then the lexicographically smallest offset.
inline AdjustResult adjust_pose(const Pose3D& pose, const PreparedScene& prepared, const ConstraintConfig& cfg) {
  cfg.validate();
  const SceneVoxelGrid& scene = *prepared.scene;
  const PoseVoxelization vox = voxelize_pose(pose, scene, cfg);
  const SupportField& field = prepared.field_for(pose.category);
  const int radius = cfg.window_radius(scene.voxel_size());
  const int w = 2 * radius + 1;
  const std::vector<double> rs = support_window(vox, field, radius);

  auto slot = [&](Index3 t) {
    return static_cast<std::size_t>(t.x + radius) +
           static_cast<std::size_t>(w) * (static_cast<std::size_t>(t.y + radius) + static_cast<std::size_t>(w) * (t.z + radius));
  };
  PoseVoxelization bottom_first = vox;
  std::sort(bottom_first.free_check.begin(), bottom_first.free_check.end(),
            [](const Index3& a, const Index3& b) { return std::tie(a.z, a.y, a.x) < std::tie(b.z, b.y, b.x); });
  auto feasible = [&](Index3 t) { return detail::free_within(bottom_first, prepared.free_space, vox.anchor + t, cfg.t_f); };

  const auto& order = detail::displacement_order(radius);
  std::vector<Index3> positive;
  for (const Index3& t : order) {
    if (rs[slot(t)] > 0.0) positive.push_back(t);
  }
  std::stable_sort(positive.begin(), positive.end(), [&](const Index3& a, const Index3& b) { return rs[slot(a)] > rs[slot(b)]; });

  std::optional<Index3> best;
  for (const Index3& t : positive) {
    if (feasible(t)) {
      best = t;
      break;
    }
  }
  if (!best) {
    for (const Index3& t : order) {
      if (rs[slot(t)] == 0.0 && feasible(t)) {
        best = t;
        break;
      }
    }
  }

  AdjustResult out;
  out.pose = pose;
  if (!best) {
    out.status = AdjustStatus::NoFeasibleLocation;
    out.r_f = free_space_response(vox, prepared.free_space);
    out.r_s = rs.empty() ? 0.0 : *std::max_element(rs.begin(), rs.end());
    return out;
  }
  out.displacement = *best;
  out.r_f = free_space_response(vox, prepared.free_space, vox.anchor + *best);
  out.r_s = rs[slot(*best)];
  if (!support_satisfied(pose.category, out.r_s, cfg)) {
    out.status = AdjustStatus::InsufficientSupport;
    return out;
  }
  out.status = AdjustStatus::Accepted;
  const Vec3 shift = scene.voxel_size() * Vec3(best->x, best->y, best->z);
  for (auto& j : out.pose.joints) j += shift;
  return out;
}

struct CheckResult {
  bool free_ok = false;
  bool support_ok = false;
  int r_f = 0;
  double r_s = 0.0;            // support response at the pose's own location
  int floor_distance = -1;     // standing: Chebyshev voxels from a foot to the floor surface, -1 if beyond proximity
  double nearby_support = 0.0; // sitting: best R_s within the proximity window

  bool ok() const { return free_ok && support_ok; }
};

/// Smallest Chebyshev distance from any contact voxel to a nonzero field
/// voxel, or -1 when none lies within `proximity`.
inline int surface_distance(const PoseVoxelization& vox, const SupportField& field, int proximity) {
  if (vox.contact.empty()) return -1;
  Index3 lo = vox.contact.front();
  Index3 hi = lo;
  for (const Index3& o : vox.contact) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], o[a]);
      hi[a] = std::max(hi[a], o[a]);
    }
  }
  lo = vox.anchor + lo - Index3{proximity, proximity, proximity};
  hi = vox.anchor + hi + Index3{proximity, proximity, proximity};
  const Dims3 d = field.dims();
  int best = proximity + 1;
  for (int z = std::max(lo.z, 0); z <= std::min(hi.z, d.nz - 1); ++z) {
    for (int y = std::max(lo.y, 0); y <= std::min(hi.y, d.ny - 1); ++y) {
      if (!field.row_nonzero(y, z)) continue;
      for (int x = std::max(lo.x, 0); x <= std::min(hi.x, d.nx - 1); ++x) {
        if (field.values()(x, y, z) == 0.0) continue;
        const Index3 s = Index3{x, y, z} - vox.anchor;
        for (const Index3& c : vox.contact) {
          best = std::min(best, (s - c).chebyshev_norm());
          if (best == 0) return 0;
        }
      }
    }
  }
  return best <= proximity ? best : -1;
}

inline CheckResult check_pose(const Pose3D& pose, const PreparedScene& prepared, const ConstraintConfig& cfg) {
  cfg.validate();
  const PoseVoxelization vox = voxelize_pose(pose, *prepared.scene, cfg);
  CheckResult out;
  out.r_f = free_space_response(vox, prepared.free_space);
  out.free_ok = out.r_f <= cfg.t_f;
  out.r_s = support_response(vox, prepared.field_for(pose.category));
  if (pose.category == Category::Standing) {
    out.floor_distance = surface_distance(vox, prepared.floor_support, cfg.support_proximity);
    out.support_ok = out.floor_distance >= 0;
  } else {
    const auto window = support_window(vox, prepared.support, cfg.support_proximity);
    out.nearby_support = window.empty() ? 0.0 : *std::max_element(window.begin(), window.end());
    out.support_ok = out.nearby_support >= cfg.t_s;
  }
  return out;
}

}  // namespace affordance
