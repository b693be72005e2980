#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "affordance/error.hpp"

namespace affordance {

/// Integer voxel coordinate. Ordering is lexicographic on (x, y, z).
struct Index3 {
  int x = 0;
  int y = 0;
  int z = 0;

  constexpr int& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr int operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend constexpr Index3 operator+(Index3 a, Index3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Index3 operator-(Index3 a, Index3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Index3 operator-(Index3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr auto operator<=>(const Index3&, const Index3&) = default;

  constexpr long long squared_norm() const {
    return static_cast<long long>(x) * x + static_cast<long long>(y) * y + static_cast<long long>(z) * z;
  }
  constexpr int chebyshev_norm() const {
    return std::max({x < 0 ? -x : x, y < 0 ? -y : y, z < 0 ? -z : z});
  }
};

struct Dims3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  constexpr std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  constexpr int operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  constexpr bool contains(Index3 i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < nx && i.y < ny && i.z < nz;
  }
  friend constexpr bool operator==(const Dims3&, const Dims3&) = default;
};

/// Half-open box [lo, hi).
struct Box3 {
  Index3 lo;
  Index3 hi;

  constexpr Dims3 dims() const { return {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z}; }
  constexpr bool contains(Index3 i) const {
    return i.x >= lo.x && i.y >= lo.y && i.z >= lo.z && i.x < hi.x && i.y < hi.y && i.z < hi.z;
  }
};

/// Dense 3D array, x-fastest.
template <class T>
class Grid3 {
 public:
  using value_type = T;

  Grid3() = default;
  explicit Grid3(Dims3 dims, T fill = T{}) : dims_(dims), data_(dims.count(), fill) {
    if (dims.nx < 0 || dims.ny < 0 || dims.nz < 0) {
      throw Error(ErrorKind::InvalidInput, "negative grid dimension");
    }
  }
  Grid3(Dims3 dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims.count()) {
      throw Error(ErrorKind::InvalidInput, "grid data size does not match dimensions");
    }
  }

  const Dims3& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  std::size_t linear(Index3 i) const {
    return static_cast<std::size_t>(i.x) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(i.y) + static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(i.z));
  }
  Index3 unlinear(std::size_t n) const {
    const auto nx = static_cast<std::size_t>(dims_.nx);
    const auto ny = static_cast<std::size_t>(dims_.ny);
    return {static_cast<int>(n % nx), static_cast<int>((n / nx) % ny), static_cast<int>(n / (nx * ny))};
  }

  bool contains(Index3 i) const { return dims_.contains(i); }

  T& operator()(Index3 i) { return data_[linear(i)]; }
  const T& operator()(Index3 i) const { return data_[linear(i)]; }
  T& operator()(int x, int y, int z) { return data_[linear({x, y, z})]; }
  const T& operator()(int x, int y, int z) const { return data_[linear({x, y, z})]; }

  /// Value at i, or `outside` when i is not in the grid.
  T value_or(Index3 i, T outside) const { return contains(i) ? data_[linear(i)] : outside; }

  /// Value at the nearest in-bounds voxel (replicate padding).
  const T& clamped(Index3 i) const {
    return (*this)(std::clamp(i.x, 0, dims_.nx - 1), std::clamp(i.y, 0, dims_.ny - 1),
                   std::clamp(i.z, 0, dims_.nz - 1));
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  Dims3 dims_;
  std::vector<T> data_;
};

/// Cubic correlation stencil of odd side length, x-fastest, centered at
/// offset (0,0,0).
template <class T>
class Kernel3 {
 public:
  Kernel3() : side_(1), weights_(1, T{1}) {}
  Kernel3(int side, std::vector<T> weights) : side_(side), weights_(std::move(weights)) {
    if (side <= 0 || side % 2 == 0) {
      throw Error(ErrorKind::InvalidInput, "kernel side must be odd and positive, got " + std::to_string(side));
    }
    if (weights_.size() != static_cast<std::size_t>(side) * side * side) {
      throw Error(ErrorKind::InvalidInput, "kernel weight count does not match side^3");
    }
  }

  int side() const { return side_; }
  int half() const { return side_ / 2; }

  /// Weight at offset o, each component in [-half, half].
  const T& at(Index3 o) const {
    const int h = half();
    return weights_[static_cast<std::size_t>(o.x + h) +
                    static_cast<std::size_t>(side_) *
                        (static_cast<std::size_t>(o.y + h) + static_cast<std::size_t>(side_) * (o.z + h))];
  }

  std::span<const T> weights() const { return weights_; }

 private:
  int side_;
  std::vector<T> weights_;
};

namespace detail {

template <class Fn>
void parallel_slices(int begin, int end, unsigned workers, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (w == 1) {
    for (int z = begin; z < end; ++z) fn(z);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (int z = begin + static_cast<int>(t); z < end; z += static_cast<int>(w)) fn(z);
    });
  }
}

}  // namespace detail

/// out(i) = sum_o kernel(o) * field(i + o), with out-of-range field reads
/// replicated from the nearest in-bounds voxel. When `region` is given, only
/// that sub-box is computed and the result has the region's dimensions
/// (result voxel j corresponds to field voxel region.lo + j).
///
/// The summation order per output voxel is fixed (kernel z, then y, then x),
/// so the result does not depend on `workers`.
template <class T, class K>
auto correlate3d(const Grid3<T>& field, const Kernel3<K>& kernel, std::optional<Box3> region = std::nullopt,
                 unsigned workers = 1) {
  using R = std::common_type_t<decltype(std::declval<T>() * std::declval<K>()), K>;
  const Dims3 d = field.dims();
  const Box3 box = region.value_or(Box3{{0, 0, 0}, {d.nx, d.ny, d.nz}});
  if (box.lo.x < 0 || box.lo.y < 0 || box.lo.z < 0 || box.hi.x > d.nx || box.hi.y > d.ny || box.hi.z > d.nz ||
      box.lo.x > box.hi.x || box.lo.y > box.hi.y || box.lo.z > box.hi.z) {
    throw Error(ErrorKind::RegionOutOfBounds, "correlation region exceeds grid dimensions");
  }
  Grid3<R> out(box.dims());
  if (d.count() == 0 || out.size() == 0) return out;

  const int h = kernel.half();
  const auto weights = kernel.weights();
  detail::parallel_slices(box.lo.z, box.hi.z, workers, [&](int z) {
    for (int y = box.lo.y; y < box.hi.y; ++y) {
      for (int x = box.lo.x; x < box.hi.x; ++x) {
        R acc{};
        std::size_t k = 0;
        for (int oz = -h; oz <= h; ++oz) {
          const int zz = std::clamp(z + oz, 0, d.nz - 1);
          for (int oy = -h; oy <= h; ++oy) {
            const int yy = std::clamp(y + oy, 0, d.ny - 1);
            for (int ox = -h; ox <= h; ++ox, ++k) {
              const int xx = std::clamp(x + ox, 0, d.nx - 1);
              acc += static_cast<R>(weights[k]) * static_cast<R>(field(xx, yy, zz));
            }
          }
        }
        out(x - box.lo.x, y - box.lo.y, z - box.lo.z) = acc;
      }
    }
  });
  return out;
}

}  // namespace affordance
