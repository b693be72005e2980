#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affordance/camera.hpp"
#include "affordance/error.hpp"
#include "affordance/grid.hpp"

namespace affordance {

inline constexpr double kDefaultVoxelSize = 0.02;

struct LabelInfo {
  std::string name;
  bool occupies_space = false;
  bool affordable = false;
};

/// Category id -> properties. Label 0 is always empty space.
class LabelTable {
 public:
  LabelTable() = default;

  void set(std::uint8_t label, LabelInfo info) {
    if (label == 0 && (info.occupies_space || info.affordable)) {
      throw Error(ErrorKind::InvalidInput, "label 0 is reserved for empty space");
    }
    entries_[label] = std::move(info);
  }

  bool contains(std::uint8_t label) const { return label == 0 || entries_[label].has_value(); }
  const std::optional<LabelInfo>& get(std::uint8_t label) const { return entries_[label]; }

  bool occupies(std::uint8_t label) const { return label != 0 && entries_[label] && entries_[label]->occupies_space; }
  bool affordable(std::uint8_t label) const { return label != 0 && entries_[label] && entries_[label]->affordable; }

  bool is_floor(std::uint8_t label) const {
    if (label == 0 || !entries_[label]) return false;
    std::string n = entries_[label]->name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return n == "floor";
  }

  std::vector<std::uint8_t> labels() const {
    std::vector<std::uint8_t> out;
    for (int i = 0; i < 256; ++i) {
      if (entries_[i]) out.push_back(static_cast<std::uint8_t>(i));
    }
    return out;
  }

 private:
  std::array<std::optional<LabelInfo>, 256> entries_{};
};

/// Labelled scene occupancy. Grid axes are aligned with world axes; voxel
/// (0,0,0) has its minimum corner at `origin`.
class SceneVoxelGrid {
 public:
  SceneVoxelGrid() = default;
  SceneVoxelGrid(Grid3<std::uint8_t> labels, LabelTable table, double voxel_size = kDefaultVoxelSize,
                 Vec3 origin = Vec3::Zero(), int up_axis = 2)
      : labels_(std::move(labels)), table_(std::move(table)), voxel_size_(voxel_size), origin_(origin),
        up_axis_(up_axis) {
    if (!(voxel_size_ > 0.0) || !std::isfinite(voxel_size_)) {
      throw Error(ErrorKind::InvalidInput, "voxel size must be positive");
    }
    if (!origin_.allFinite()) throw Error(ErrorKind::InvalidInput, "origin must be finite");
    if (up_axis_ < 0 || up_axis_ > 2) throw Error(ErrorKind::InvalidInput, "up_axis must be 0, 1 or 2");
    std::array<bool, 256> seen{};
    for (std::uint8_t l : labels_.data()) seen[l] = true;
    for (int l = 1; l < 256; ++l) {
      if (seen[l] && !table_.contains(static_cast<std::uint8_t>(l))) {
        throw Error(ErrorKind::InvalidInput, "label " + std::to_string(l) + " missing from label table");
      }
    }
  }

  const Dims3& dims() const { return labels_.dims(); }
  const Grid3<std::uint8_t>& labels() const { return labels_; }
  const LabelTable& label_table() const { return table_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }
  int up_axis() const { return up_axis_; }
  Index3 up() const {
    Index3 u;
    u[up_axis_] = 1;
    return u;
  }

  Index3 world_to_voxel(const Vec3& w) const {
    Index3 out;
    for (int a = 0; a < 3; ++a) {
      const double c = std::floor((w[a] - origin_[a]) / voxel_size_);
      if (!std::isfinite(c) || std::abs(c) > 1e9) {
        throw Error(ErrorKind::InvalidInput, "world point too far from the scene grid");
      }
      out[a] = static_cast<int>(c);
    }
    return out;
  }

  /// Center of voxel i.
  Vec3 voxel_to_world(Index3 i) const {
    return origin_ + voxel_size_ * Vec3(i.x + 0.5, i.y + 0.5, i.z + 0.5);
  }

  bool occupied(Index3 i) const { return table_.occupies(labels_(i)); }
  bool affordable(Index3 i) const { return table_.affordable(labels_(i)); }
  bool has_floor_label() const {
    for (auto l : table_.labels()) {
      if (table_.is_floor(l)) return true;
    }
    return false;
  }

 private:
  Grid3<std::uint8_t> labels_;
  LabelTable table_;
  double voxel_size_ = kDefaultVoxelSize;
  Vec3 origin_ = Vec3::Zero();
  int up_axis_ = 2;
};

enum class GridSemantics { FreeSpace, SupportSource, SurfaceMask };

struct BinaryGrid {
  Grid3<std::uint8_t> values;
  GridSemantics semantics = GridSemantics::FreeSpace;

  const Dims3& dims() const { return values.dims(); }
};

/// V_f: 1 where the scene occupies space, 0 in free space.
inline BinaryGrid build_free_space_grid(const SceneVoxelGrid& scene) {
  BinaryGrid out{Grid3<std::uint8_t>(scene.dims()), GridSemantics::FreeSpace};
  const auto src = scene.labels().data();
  auto dst = out.values.data();
  const auto& table = scene.label_table();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = table.occupies(src[n]) ? 1 : 0;
  return out;
}

/// V_s: 0 on affordable objects, 1 everywhere else (including empty space).
inline BinaryGrid build_support_source_grid(const SceneVoxelGrid& scene) {
  BinaryGrid out{Grid3<std::uint8_t>(scene.dims()), GridSemantics::SupportSource};
  const auto src = scene.labels().data();
  auto dst = out.values.data();
  const auto& table = scene.label_table();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = table.affordable(src[n]) ? 0 : 1;
  return out;
}

struct GaussianKernel3D {
  int side = 5;
  double sigma = 1.0;
  Kernel3<double> kernel;

  static GaussianKernel3D make(int side = 5, double sigma = 1.0) {
    if (side <= 0 || side % 2 == 0) throw Error(ErrorKind::InvalidInput, "Gaussian kernel side must be odd");
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidInput, "Gaussian sigma must be positive");
    const int h = side / 2;
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(side) * side * side);
    double total = 0.0;
    for (int z = -h; z <= h; ++z) {
      for (int y = -h; y <= h; ++y) {
        for (int x = -h; x <= h; ++x) {
          const double v = std::exp(-static_cast<double>(x * x + y * y + z * z) / (2.0 * sigma * sigma));
          w.push_back(v);
          total += v;
        }
      }
    }
    for (double& v : w) v /= total;
    return {side, sigma, Kernel3<double>(side, std::move(w))};
  }
};

inline constexpr double kDefaultSurfaceEps = 0.05;

/// Boundary- and upward-masked response of the Gaussian over V_s. Nonzero only
/// on affordable voxels whose upper neighbour is free space.
class SupportField {
 public:
  SupportField() = default;
  explicit SupportField(Grid3<double> values) : values_(std::move(values)) { index_rows(); }

  const Grid3<double>& values() const { return values_; }
  const Dims3& dims() const { return values_.dims(); }
  double at(Index3 i) const { return values_.value_or(i, 0.0); }

  /// True when x-row (y, z) has any nonzero value; false outside the grid.
  bool row_nonzero(int y, int z) const {
    const Dims3& d = values_.dims();
    if (y < 0 || z < 0 || y >= d.ny || z >= d.nz) return false;
    return rows_[static_cast<std::size_t>(y) + static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(z)] != 0;
  }

  /// True when z-plane z has any nonzero value; false outside the grid.
  bool plane_nonzero(int z) const { return z >= 0 && z < values_.dims().nz && planes_[static_cast<std::size_t>(z)] != 0; }

  std::size_t nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.data().begin(), values_.data().end(), [](double v) { return v != 0.0; }));
  }

 private:
  void index_rows() {
    const Dims3& d = values_.dims();
    rows_.assign(static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz), 0);
    planes_.assign(static_cast<std::size_t>(d.nz), 0);
    for (int z = 0; z < d.nz; ++z) {
      for (int y = 0; y < d.ny; ++y) {
        for (int x = 0; x < d.nx; ++x) {
          if (values_(x, y, z) != 0.0) {
            rows_[static_cast<std::size_t>(y) + static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(z)] = 1;
            planes_[static_cast<std::size_t>(z)] = 1;
            break;
          }
        }
      }
    }
  }

  Grid3<double> values_;
  std::vector<std::uint8_t> rows_;
  std::vector<std::uint8_t> planes_;
};

/// True when the voxel directly above i (along the scene's up axis) is free.
/// Above the top of the grid counts as solid.
inline bool free_above(const SceneVoxelGrid& scene, Index3 i) {
  const Index3 above = i + scene.up();
  return scene.dims().contains(above) && !scene.occupied(above);
}

inline SupportField detect_support_surface(const SceneVoxelGrid& scene,
                                           const GaussianKernel3D& kernel = GaussianKernel3D::make(),
                                           double eps = kDefaultSurfaceEps, unsigned workers = 1) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::InvalidInput, "surface eps must lie in (0, 0.5)");
  const BinaryGrid vs = build_support_source_grid(scene);
  Grid3<double> response = correlate3d(vs.values, kernel.kernel, std::nullopt, workers);
  const Dims3 d = scene.dims();
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        const Index3 i{x, y, z};
        double& b = response(i);
        const bool keep = b > eps && b < 1.0 - eps && scene.affordable(i) && free_above(scene, i);
        if (!keep) b = 0.0;
      }
    }
  }
  return SupportField(std::move(response));
}

/// The support field restricted to voxels labelled "floor". Scenes without a
/// floor label return the field unchanged.
inline SupportField restrict_to_floor(const SupportField& field, const SceneVoxelGrid& scene) {
  if (!scene.has_floor_label()) return field;
  Grid3<double> values = field.values();
  const auto labels = scene.labels().data();
  auto v = values.data();
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!scene.label_table().is_floor(labels[n])) v[n] = 0.0;
  }
  return SupportField(std::move(values));
}

}  // namespace affordance
