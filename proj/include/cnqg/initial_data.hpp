#pragma once

#include <cmath>
#include <random>

#include "cnqg/operators.hpp"

namespace cnqg {

namespace detail {

// Minimum-image displacement on axis i.
inline double min_image(const Grid &g, int axis, double dx) {
  const double L = g.length(axis);
  dx = std::fmod(dx, L);
  if (dx > 0.5 * L) dx -= L;
  if (dx < -0.5 * L) dx += L;
  return dx;
}

inline double min_image_r2(const Grid &g, const std::array<double, kMaxDim> &x,
                           const std::array<double, kMaxDim> &c) {
  double r2 = 0.0;
  for (int i = 0; i < g.dim(); ++i) {
    const double d = min_image(g, i, x[i] - c[i]);
    r2 += d * d;
  }
  return r2;
}

}  // namespace detail

inline std::array<double, kMaxDim> box_center(const Grid &g) {
  std::array<double, kMaxDim> c{};
  for (int i = 0; i < g.dim(); ++i) c[i] = 0.5 * g.length(i);
  return c;
}

inline PhysicalField gaussian_bump(const Grid &g, double amplitude,
                                   double width,
                                   std::array<double, kMaxDim> center) {
  PhysicalField f(g, 1);
  std::array<double, kMaxDim> x{};
  for (std::int64_t i = 0; i < g.size(); ++i) {
    g.position(i, x);
    f[i] = amplitude *
           std::exp(-detail::min_image_r2(g, x, center) / (2.0 * width * width));
  }
  return f;
}

inline PhysicalField gaussian_bump(const Grid &g, double amplitude,
                                   double width) {
  return gaussian_bump(g, amplitude, width, box_center(g));
}

// C-infinity bump with exact compact support of the given radius.
inline PhysicalField compact_bump(const Grid &g, double amplitude,
                                  double radius,
                                  std::array<double, kMaxDim> center) {
  PhysicalField f(g, 1);
  std::array<double, kMaxDim> x{};
  for (std::int64_t i = 0; i < g.size(); ++i) {
    g.position(i, x);
    const double r2 = detail::min_image_r2(g, x, center) / (radius * radius);
    f[i] = r2 < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  }
  return f;
}

inline PhysicalField compact_bump(const Grid &g, double amplitude,
                                  double radius) {
  return compact_bump(g, amplitude, radius, box_center(g));
}

inline PhysicalField multi_bump(const Grid &g, double amplitude, double width,
                                std::uint64_t seed, int count = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.3, 0.7);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  PhysicalField f(g, 1);
  for (int b = 0; b < count; ++b) {
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < g.dim(); ++i) c[i] = unit(rng) * g.length(i);
    const double a = amplitude * amp(rng);
    PhysicalField bump = gaussian_bump(g, a, width, c);
    for (std::int64_t i = 0; i < g.size(); ++i) f[i] += bump[i];
  }
  return f;
}

inline PhysicalField negate(PhysicalField f) {
  for (double &v : f.values()) v = -v;
  return f;
}

// Band-limited random field: Hermitian-symmetric coefficients with a
// Gaussian spectral envelope exp(-|k|^2 / (2 k0^2)), zero mean.
inline PhysicalField random_smooth(const Grid &g, std::uint64_t seed,
                                   double amplitude, double k0_modes = 4.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField F(g, 1);
  const std::int64_t n = g.size();
  const double k0 = 2.0 * std::numbers::pi * k0_modes / g.length(0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double kn = g.wavevector_norm(i);
    const double env = std::exp(-kn * kn / (2.0 * k0 * k0));
    F[i] = std::complex<double>(gauss(rng), gauss(rng)) * env;
  }
  F[0] = 0.0;
  // Symmetrize: keep (F(k) + conj(F(-k)))/2 so the field is real.
  SpectralField sym(g, 1);
  for (std::int64_t i = 0; i < n; ++i)
    sym[i] = 0.5 * (F[i] + std::conj(F[g.conjugate_index(i)]));
  PhysicalField f = inverse_transform_unchecked(sym);
  const double m = f.max_abs();
  if (m > 0.0)
    for (double &v : f.values()) v *= amplitude / m;
  return f;
}

// Strictly positive smooth random field (several inequality checks assume
// nonnegative data): fluctuation plus an offset slightly above |min|.
inline PhysicalField random_smooth_positive(const Grid &g, std::uint64_t seed,
                                            double amplitude,
                                            double k0_modes = 4.0) {
  PhysicalField f = random_smooth(g, seed, amplitude, k0_modes);
  const double offset = 1.05 * std::abs(f.min_value());
  for (double &v : f.values()) v += offset;
  return f;
}

}  // namespace cnqg
