#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "cnqg/field.hpp"

namespace cnqg {

// Checkpoint layout (little-endian throughout):
//   "CNQG" magic, u32 version (= 1),
//   u32 N, N x u32 M_i, N x f64 L_i,
//   f64 alpha, f64 nu, f64 eps, f64 t,
//   M_0*...*M_{N-1} x f64 theta values in row-major order.
struct Checkpoint {
  Grid grid = Grid::uniform(1, 8, 2.0 * std::numbers::pi);
  double alpha = 1.0;
  double nu = 0.0;
  double eps = 0.0;
  double t = 0.0;
  PhysicalField theta{grid, 1};
};

namespace detail {

constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_le(std::ostream &os, T value) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts need byte swapping here");
  os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream &is, const char *what) {
  T value{};
  is.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!is) throw IoError(std::string("checkpoint: truncated ") + what);
  return value;
}

}  // namespace detail

inline void save_checkpoint(const std::string &path, const Checkpoint &cp) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  os.write("CNQG", 4);
  detail::write_le<std::uint32_t>(os, detail::kCheckpointVersion);
  const Grid &g = cp.grid;
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  for (int i = 0; i < g.dim(); ++i)
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.points(i)));
  for (int i = 0; i < g.dim(); ++i) detail::write_le<double>(os, g.length(i));
  detail::write_le<double>(os, cp.alpha);
  detail::write_le<double>(os, cp.nu);
  detail::write_le<double>(os, cp.eps);
  detail::write_le<double>(os, cp.t);
  for (double v : cp.theta.values()) detail::write_le<double>(os, v);
  if (!os) throw IoError("checkpoint: short write to '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "CNQG", 4) != 0)
    throw IoError("checkpoint: bad magic in '" + path + "'");
  const auto version = detail::read_le<std::uint32_t>(is, "version");
  if (version != detail::kCheckpointVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto dim = detail::read_le<std::uint32_t>(is, "dimension");
  if (dim < 1 || dim > kMaxDim)
    throw IoError("checkpoint: dimension out of range");
  std::array<int, kMaxDim> modes{};
  std::array<double, kMaxDim> lengths{};
  for (std::uint32_t i = 0; i < dim; ++i)
    modes[i] = static_cast<int>(detail::read_le<std::uint32_t>(is, "modes"));
  for (std::uint32_t i = 0; i < dim; ++i)
    lengths[i] = detail::read_le<double>(is, "lengths");

  Checkpoint cp;
  cp.grid = Grid(static_cast<int>(dim), modes, lengths);
  cp.alpha = detail::read_le<double>(is, "alpha");
  cp.nu = detail::read_le<double>(is, "nu");
  cp.eps = detail::read_le<double>(is, "eps");
  cp.t = detail::read_le<double>(is, "t");
  cp.theta = PhysicalField(cp.grid, 1);
  for (double &v : cp.theta.values()) v = detail::read_le<double>(is, "theta");
  char extra;
  if (is.read(&extra, 1))
    throw IoError("checkpoint: trailing bytes in '" + path + "'");
  return cp;
}

}  // namespace cnqg
