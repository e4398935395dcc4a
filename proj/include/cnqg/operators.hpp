#pragma once

#include <cassert>
#include <cmath>
#include <complex>

#include "cnqg/field.hpp"
#include "cnqg/transform.hpp"

namespace cnqg {

namespace detail {

inline void debug_assert_hermitian(const SpectralField &F) {
#ifndef NDEBUG
  const double scale = F.max_abs();
  assert(scale == 0.0 || F.hermitian_defect() <= 1e-10 * std::max(scale, 1.0));
#else
  (void)F;
#endif
}

// Wavevector for odd (imaginary) symbols: the Nyquist mode -M/2 is its own
// conjugate, so an odd symbol there would break Hermitian symmetry; the
// standard remedy is to treat its derivative wavenumber as zero.
inline void odd_symbol_wavevector(const Grid &g, std::int64_t flat,
                                  std::array<double, kMaxDim> &k) {
  std::array<int, kMaxDim> idx{};
  g.decompose(flat, idx);
  for (int j = 0; j < g.dim(); ++j)
    k[j] = idx[j] == g.points(j) / 2 ? 0.0 : g.wavenumber(j, idx[j]);
}

}  // namespace detail

// out(k) = symbol(|k|,k) * in(k) for a real, radial scalar symbol.
// zero_value is used at k = 0.
template <typename SymbolFn>
SpectralField apply_radial_multiplier(const SpectralField &F, SymbolFn symbol,
                                      double zero_value) {
  const Grid &g = F.grid();
  SpectralField out(g, F.components());
  const std::int64_t n = g.size();
  for (int c = 0; c < F.components(); ++c) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double kn = g.wavevector_norm(i);
      out(c, i) = (kn == 0.0 ? zero_value : symbol(kn)) * F(c, i);
    }
  }
  detail::debug_assert_hermitian(out);
  return out;
}

// Lambda^s, symbol |k|^s. Requires mean-zero input for s < 0.
inline SpectralField fractional_laplacian(const SpectralField &F, double s) {
  const Grid &g = F.grid();
  if (s < -0.5 * g.dim())
    throw InvalidExponent("fractional_laplacian: s below -N/2");
  if (s == 0.0) return F;
  if (s < 0.0) {
    const double mean = std::abs(F(0, 0));
    if (F.components() > 1)
      throw ArityError("fractional_laplacian: scalar input required for s<0");
    if (mean > 1e-13 * std::max(F.max_abs(), 1.0))
      throw MeanNotZero("fractional_laplacian: nonzero mean with s < 0");
  }
  return apply_radial_multiplier(
      F, [s](double kn) { return std::pow(kn, s); }, 0.0);
}

// Riesz potential Lambda^{-delta}, delta in (0, N); mean-zero input only.
inline SpectralField riesz_potential(const SpectralField &F, double delta) {
  const Grid &g = F.grid();
  if (!(delta > 0.0 && delta < g.dim()))
    throw InvalidExponent("riesz_potential: delta must lie in (0, N)");
  if (std::abs(F(0, 0)) > 1e-13 * std::max(F.max_abs(), 1.0))
    throw MeanNotZero("riesz_potential: nonzero mean");
  return apply_radial_multiplier(
      F, [delta](double kn) { return std::pow(kn, -delta); }, 0.0);
}

// R_j with symbol -i k_j / |k|; zero mode set to 0.
inline SpectralField riesz_transform(const SpectralField &F) {
  if (F.components() != 1)
    throw ArityError("riesz_transform: scalar input required");
  const Grid &g = F.grid();
  SpectralField out(g, g.dim());
  const std::int64_t n = g.size();
  std::array<double, kMaxDim> k{};
  for (std::int64_t i = 0; i < n; ++i) {
    detail::odd_symbol_wavevector(g, i, k);
    double kn = 0.0;
    for (int j = 0; j < g.dim(); ++j) kn += k[j] * k[j];
    kn = std::sqrt(kn);
    for (int j = 0; j < g.dim(); ++j) {
      out(j, i) = kn == 0.0
                      ? std::complex<double>(0.0, 0.0)
                      : std::complex<double>(0.0, -k[j] / kn) * F(0, i);
    }
  }
  detail::debug_assert_hermitian(out);
  return out;
}

// Component j has symbol i k_j.
inline SpectralField gradient(const SpectralField &F) {
  if (F.components() != 1)
    throw ArityError("gradient: scalar input required");
  const Grid &g = F.grid();
  SpectralField out(g, g.dim());
  const std::int64_t n = g.size();
  std::array<double, kMaxDim> k{};
  for (std::int64_t i = 0; i < n; ++i) {
    detail::odd_symbol_wavevector(g, i, k);
    for (int j = 0; j < g.dim(); ++j)
      out(j, i) = std::complex<double>(0.0, k[j]) * F(0, i);
  }
  detail::debug_assert_hermitian(out);
  return out;
}

inline SpectralField divergence(const SpectralField &F) {
  const Grid &g = F.grid();
  if (F.components() != g.dim())
    throw ArityError("divergence: vector input required");
  SpectralField out(g, 1);
  const std::int64_t n = g.size();
  std::array<double, kMaxDim> k{};
  for (std::int64_t i = 0; i < n; ++i) {
    detail::odd_symbol_wavevector(g, i, k);
    std::complex<double> s(0.0, 0.0);
    for (int j = 0; j < g.dim(); ++j)
      s += std::complex<double>(0.0, k[j]) * F(j, i);
    out(0, i) = s;
  }
  detail::debug_assert_hermitian(out);
  return out;
}

// Exact linear factor e^{-(nu |k|^alpha + eps |k|^2) t}. For alpha = 0 the
// fractional term is nu (Lambda^0 = identity), uniformly in k.
inline SpectralField semigroup_apply(const SpectralField &F, double t,
                                     double alpha, double nu,
                                     double eps = 0.0) {
  if (t < 0.0) throw InvalidTime("semigroup_apply: negative time");
  if (nu < 0.0 || eps < 0.0)
    throw ConfigError("semigroup_apply: nu and eps must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 2.0))
    throw InvalidExponent("semigroup_apply: alpha must lie in [0,2]");
  const Grid &g = F.grid();
  SpectralField out(g, F.components());
  const std::int64_t n = g.size();
  for (int c = 0; c < F.components(); ++c) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double kn = g.wavevector_norm(i);
      const double lam = alpha == 0.0 ? 1.0 : std::pow(kn, alpha);
      out(c, i) = std::exp(-(nu * lam + eps * kn * kn) * t) * F(c, i);
    }
  }
  return out;
}

// Zeros modes with |alias_i| > fraction * M_i/2 on any axis.
inline SpectralField dealias(const SpectralField &F, double fraction) {
  const Grid &g = F.grid();
  if (fraction >= 1.0) return F;
  SpectralField out = F;
  const std::int64_t n = g.size();
  std::array<int, kMaxDim> idx{};
  std::array<int, kMaxDim> cut{};
  for (int j = 0; j < g.dim(); ++j)
    cut[j] = static_cast<int>(std::floor(fraction * g.points(j) / 2.0));
  for (std::int64_t i = 0; i < n; ++i) {
    g.decompose(i, idx);
    bool kill = false;
    for (int j = 0; j < g.dim(); ++j)
      if (std::abs(g.alias(j, idx[j])) > cut[j]) kill = true;
    if (kill)
      for (int c = 0; c < F.components(); ++c)
        out(c, i) = std::complex<double>(0.0, 0.0);
  }
  return out;
}

}  // namespace cnqg
