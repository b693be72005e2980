#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <memory>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "affordance/camera.hpp"
#include "affordance/constraints.hpp"
#include "affordance/grid.hpp"
#include "affordance/scene.hpp"
#include "affordance/synthetic.hpp"

namespace oracle {

using namespace affordance;

/// Pads the field by replication, then correlates with loops nested x-outer.
template <class T, class K>
std::vector<double> naive_correlate(const Grid3<T>& g, const Kernel3<K>& k) {
  const Dims3 d = g.dims();
  const int h = k.half();
  const int px = d.nx + 2 * h, py = d.ny + 2 * h, pz = d.nz + 2 * h;
  std::vector<double> padded(static_cast<std::size_t>(px) * py * pz);
  for (int z = 0; z < pz; ++z)
    for (int y = 0; y < py; ++y)
      for (int x = 0; x < px; ++x) {
        const int sx = std::min(std::max(x - h, 0), d.nx - 1);
        const int sy = std::min(std::max(y - h, 0), d.ny - 1);
        const int sz = std::min(std::max(z - h, 0), d.nz - 1);
        padded[(static_cast<std::size_t>(z) * py + y) * px + x] = static_cast<double>(g(sx, sy, sz));
      }
  std::vector<double> out(d.count(), 0.0);
  for (int x = 0; x < d.nx; ++x)
    for (int y = 0; y < d.ny; ++y)
      for (int z = 0; z < d.nz; ++z) {
        double acc = 0.0;
        for (int ox = -h; ox <= h; ++ox)
          for (int oy = -h; oy <= h; ++oy)
            for (int oz = -h; oz <= h; ++oz) {
              acc += static_cast<double>(k.at({ox, oy, oz})) *
                     padded[(static_cast<std::size_t>(z + oz + h) * py + (y + oy + h)) * px + (x + ox + h)];
            }
        out[(static_cast<std::size_t>(z) * d.ny + y) * d.nx + x] = acc;
      }
  return out;
}

/// Integer variant, exact.
template <class K>
std::vector<long long> naive_correlate_int(const Grid3<int>& g, const Kernel3<K>& k) {
  const Dims3 d = g.dims();
  const int h = k.half();
  std::vector<long long> out(d.count(), 0);
  for (int x = 0; x < d.nx; ++x)
    for (int y = 0; y < d.ny; ++y)
      for (int z = 0; z < d.nz; ++z) {
        long long acc = 0;
        for (int ox = -h; ox <= h; ++ox)
          for (int oy = -h; oy <= h; ++oy)
            for (int oz = -h; oz <= h; ++oz) {
              const int sx = std::min(std::max(x + ox, 0), d.nx - 1);
              const int sy = std::min(std::max(y + oy, 0), d.ny - 1);
              const int sz = std::min(std::max(z + oz, 0), d.nz - 1);
              acc += static_cast<long long>(k.at({ox, oy, oz})) * g(sx, sy, sz);
            }
        out[(static_cast<std::size_t>(z) * d.ny + y) * d.nx + x] = acc;
      }
  return out;
}

struct Candidate {
  Index3 t;
  int r_f = 0;
  double r_s = 0.0;
};

/// Every window translation with its responses, each computed from scratch.
inline std::vector<Candidate> scan_window(const PoseVoxelization& vox, const PreparedScene& prepared, int radius) {
  const SupportField& field = prepared.field_for(vox.category);
  std::vector<Candidate> out;
  for (int z = -radius; z <= radius; ++z)
    for (int y = -radius; y <= radius; ++y)
      for (int x = -radius; x <= radius; ++x) {
        const Index3 t{x, y, z};
        const Index3 a = vox.anchor + t;
        int rf = 0;
        for (const Index3& o : vox.free_check) {
          const Index3 v = a + o;
          rf += (!prepared.free_space.values.contains(v) || prepared.free_space.values(v) != 0) ? 1 : 0;
        }
        double rs = 0.0;
        for (const Index3& o : vox.contact) rs += field.at(a + o);
        out.push_back({t, rf, rs});
      }
  return out;
}

/// Best feasible translation under (max R_s, min |t|^2, lexicographic t).
inline std::optional<Candidate> best_feasible(const std::vector<Candidate>& all, int t_f) {
  std::optional<Candidate> best;
  for (const auto& c : all) {
    if (c.r_f > t_f) continue;
    if (!best) {
      best = c;
      continue;
    }
    const auto nc = c.t.squared_norm();
    const auto nb = best->t.squared_norm();
    if (c.r_s > best->r_s || (c.r_s == best->r_s && (nc < nb || (nc == nb && c.t < best->t)))) best = c;
  }
  return best;
}

}  // namespace oracle

namespace fixture {

using namespace affordance;

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Camera-to-world rotation whose optical axis is horizontal (z-up world):
/// looks along +y, then rolled about the optical axis and yawed about world z.
inline Mat3 level_rotation(double yaw, double roll) {
  Mat3 base;
  base << 1, 0, 0,
          0, 0, 1,
          0, -1, 0;
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix() * base *
         Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace fixture

namespace fixture {

/// Flat floor with a standing pose whose foot region bottoms out `gap` voxel
/// layers above the floor surface (gap 0: feet overlap the floor layer), and
/// `blocked` of the pose's non-contact voxels turned into table voxels.
struct ThresholdScene {
  std::shared_ptr<const SceneVoxelGrid> scene;
  Pose3D pose;
};

inline ThresholdScene threshold_scene(int gap, int blocked, const ConstraintConfig& cfg) {
  SceneVoxelGrid base = synthetic::flat_floor({60, 60, 110});
  const Pose3D pose = synthetic::standing_on_layer(base, 0.6, 0.6, gap, cfg.bone_radius);
  const PoseVoxelization vox = voxelize_pose(pose, base, cfg);
  Grid3<std::uint8_t> labels = base.labels();
  int placed = 0;
  for (const Index3& o : vox.free_check) {
    if (placed == blocked) break;
    const Index3 v = vox.anchor + o;
    if (labels(v) != 0) continue;
    labels(v) = synthetic::kTable;
    ++placed;
  }
  return {std::make_shared<const SceneVoxelGrid>(std::move(labels), base.label_table(), base.voxel_size()), pose};
}

}  // namespace fixture
