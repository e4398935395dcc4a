#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "cnqg/errors.hpp"

namespace cnqg {

constexpr int kMaxDim = 3;

// Periodic box [0,L_1) x ... x [0,L_N) sampled on a uniform M_1 x ... x M_N
// lattice. Wavevectors use the signed alias in [-M/2, M/2).
class Grid {
 public:
  Grid(int dim, std::array<int, kMaxDim> points,
       std::array<double, kMaxDim> lengths)
      : dim_(dim), points_(points), lengths_(lengths) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("Grid: dim must be 1..3");
    for (int i = 0; i < dim; ++i) {
      if (points_[i] < 8 || points_[i] % 2 != 0)
        throw ConfigError("Grid: points per axis must be even and >= 8");
      if (!(lengths_[i] > 0.0))
        throw ConfigError("Grid: box lengths must be positive");
    }
    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= points_[i];
  }

  static Grid uniform(int dim, int points, double length) {
    std::array<int, kMaxDim> m{};
    std::array<double, kMaxDim> l{};
    for (int i = 0; i < dim; ++i) {
      m[i] = points;
      l[i] = length;
    }
    return Grid(dim, m, l);
  }

  int dim() const { return dim_; }
  int points(int axis) const { return points_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / points_[axis]; }
  std::int64_t size() const { return size_; }

  double min_spacing() const {
    double h = spacing(0);
    for (int i = 1; i < dim_; ++i) h = std::min(h, spacing(i));
    return h;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= lengths_[i];
    return v;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= spacing(i);
    return v;
  }

  // Signed alias of a lattice index: m -> m for m < M/2, else m - M.
  int alias(int axis, int index) const {
    return index < points_[axis] / 2 ? index : index - points_[axis];
  }

  double wavenumber(int axis, int index) const {
    return 2.0 * std::numbers::pi * alias(axis, index) / lengths_[axis];
  }

  double coordinate(int axis, int index) const {
    return index * spacing(axis);
  }

  void decompose(std::int64_t flat, std::array<int, kMaxDim> &idx) const {
    for (int i = dim_ - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(flat % points_[i]);
      flat /= points_[i];
    }
  }

  std::int64_t flatten(const std::array<int, kMaxDim> &idx) const {
    std::int64_t f = 0;
    for (int i = 0; i < dim_; ++i) f = f * points_[i] + idx[i];
    return f;
  }

  // Flat index of the frequency conjugate (-k) of a given lattice index.
  std::int64_t conjugate_index(std::int64_t flat) const {
    std::array<int, kMaxDim> idx{};
    decompose(flat, idx);
    for (int i = 0; i < dim_; ++i)
      idx[i] = (points_[i] - idx[i]) % points_[i];
    return flatten(idx);
  }

  void wavevector(std::int64_t flat, std::array<double, kMaxDim> &k) const {
    std::array<int, kMaxDim> idx{};
    decompose(flat, idx);
    for (int i = 0; i < dim_; ++i) k[i] = wavenumber(i, idx[i]);
  }

  double wavevector_norm(std::int64_t flat) const {
    std::array<double, kMaxDim> k{};
    wavevector(flat, k);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += k[i] * k[i];
    return std::sqrt(s);
  }

  void position(std::int64_t flat, std::array<double, kMaxDim> &x) const {
    std::array<int, kMaxDim> idx{};
    decompose(flat, idx);
    for (int i = 0; i < dim_; ++i) x[i] = coordinate(i, idx[i]);
  }

  bool operator==(const Grid &other) const {
    if (dim_ != other.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (points_[i] != other.points_[i] || lengths_[i] != other.lengths_[i])
        return false;
    return true;
  }

 private:
  int dim_;
  std::array<int, kMaxDim> points_;
  std::array<double, kMaxDim> lengths_;
  std::int64_t size_;
};

}  // namespace cnqg
