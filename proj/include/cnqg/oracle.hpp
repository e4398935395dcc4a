#pragma once

#include <cmath>
#include <numbers>

#include "cnqg/field.hpp"
#include "cnqg/operators.hpp"
#include "cnqg/parallel.hpp"
#include "cnqg/transform.hpp"

namespace cnqg {
namespace oracle {

// Kernel constants fixed by symbol calibration: the quadratures below must
// be consistent with the Fourier symbols |k|^alpha and -i k_j/|k|.
inline double riesz_constant(int dim) {
  return std::tgamma(0.5 * (dim + 1)) /
         std::pow(std::numbers::pi, 0.5 * (dim + 1));
}

inline double lambda_constant(int dim, double alpha) {
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (dim + alpha)) /
         (std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(1.0 - 0.5 * alpha));
}

struct QuadratureSpec {
  double interior_margin = 0.25;  // fraction of each axis excluded near edges
  int subsample = 1;              // stride for O(M^{2N}) double sums

  void validate() const {
    if (!(interior_margin >= 0.0 && interior_margin <= 0.45))
      throw ConfigError("QuadratureSpec: interior_margin outside [0, 0.45]");
    if (subsample < 1)
      throw ConfigError("QuadratureSpec: subsample stride must be >= 1");
  }
};

inline bool is_interior(const Grid &g, std::int64_t flat, double margin) {
  std::array<int, kMaxDim> idx{};
  g.decompose(flat, idx);
  for (int i = 0; i < g.dim(); ++i) {
    const int lo = static_cast<int>(std::ceil(margin * g.points(i)));
    if (idx[i] < lo || idx[i] >= g.points(i) - lo) return false;
  }
  return true;
}

inline void require_localized(const PhysicalField &f) {
  const Grid &g = f.grid();
  const double scale = f.max_abs();
  // Constants are fine: every operator here annihilates them exactly.
  double lo = f[0], hi = f[0];
  for (double v : f.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo <= 1e-14 * std::max(scale, 1.0)) return;
  std::array<int, kMaxDim> idx{};
  for (std::int64_t i = 0; i < g.size(); ++i) {
    g.decompose(i, idx);
    bool boundary = false;
    for (int a = 0; a < g.dim(); ++a)
      if (idx[a] == 0 || idx[a] == g.points(a) - 1) boundary = true;
    if (boundary && std::abs(f[i]) > 1e-8 * scale)
      throw NotLocalized("quadrature: field not supported away from boundary");
  }
}

namespace detail {

// Distance from x (inside the box) to the boundary along direction u.
// The box is convex, so the ray is outside for all larger radii.
inline double exit_distance(const Grid &g, const std::array<double, kMaxDim> &x,
                            const std::array<double, kMaxDim> &u) {
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.dim(); ++i) {
    if (u[i] > 1e-300) r = std::min(r, (g.length(i) - x[i]) / u[i]);
    if (u[i] < -1e-300) r = std::min(r, -x[i] / u[i]);
  }
  return r;
}

// T = integral over displacements z outside the covered box
// [-(R+1/2)L, (R+1/2)L]^N of |z|^{-N-alpha} dz
//   = (1/alpha) * integral over S^{N-1} of r_exit(u)^{-alpha} du,
// where R = images is how many periods the kernel table already sums over.
// The covered box is centered on the evaluation point, so T is the same
// everywhere.
inline double exterior_tail(const Grid &g, double alpha, int images) {
  const int dim = g.dim();
  std::array<double, kMaxDim> half{};
  for (int i = 0; i < dim; ++i) half[i] = (images + 0.5) * g.length(i);
  auto exit_r = [&](const std::array<double, kMaxDim> &u) {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i)
      if (std::abs(u[i]) > 1e-300) r = std::min(r, half[i] / std::abs(u[i]));
    return r;
  };
  if (dim == 1) return 2.0 * std::pow(half[0], -alpha) / alpha;
  if (dim == 2) {
    const int nphi = 512;
    double acc = 0.0;
    for (int p = 0; p < nphi; ++p) {
      const double phi = 2.0 * std::numbers::pi * (p + 0.5) / nphi;
      const std::array<double, kMaxDim> u{std::cos(phi), std::sin(phi), 0.0};
      acc += std::pow(exit_r(u), -alpha);
    }
    return acc * (2.0 * std::numbers::pi / nphi) / alpha;
  }
  const int nphi = 96, nmu = 48;
  double acc = 0.0;
  for (int q = 0; q < nmu; ++q) {
    const double mu = -1.0 + 2.0 * (q + 0.5) / nmu;  // cos(theta)
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int p = 0; p < nphi; ++p) {
      const double phi = 2.0 * std::numbers::pi * (p + 0.5) / nphi;
      const std::array<double, kMaxDim> u{st * std::cos(phi),
                                          st * std::sin(phi), mu};
      acc += std::pow(exit_r(u), -alpha);
    }
  }
  return acc * (2.0 * std::numbers::pi / nphi) * (2.0 / nmu) / alpha;
}

// The pair sums exclude a symmetric near box of this many cells around the
// singularity; its P.V. contribution is restored analytically through the
// second-moment integral below against finite-difference derivatives of f.
constexpr int kNearCells = 2;

// int over the box [-mult*h/2, mult*h/2]^N of z_a^2 |z|^{-p} dz (same value
// for every axis a; odd and cross moments vanish by symmetry).
inline double box_second_moment(const Grid &g, double p, double mult) {
  const int dim = g.dim();
  const int sub = dim == 3 ? 96 : 512;
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < dim; ++a) h[a] = mult * g.spacing(a);
  double acc = 0.0;
  const long total = static_cast<long>(std::pow(sub, dim));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    double r2 = 0.0;
    std::array<double, kMaxDim> z{};
    for (int a = 0; a < dim; ++a) {
      const int s = static_cast<int>(rem % sub);
      rem /= sub;
      z[a] = h[a] * ((s + 0.5) / sub - 0.5);
      r2 += z[a] * z[a];
    }
    acc += z[0] * z[0] * std::pow(r2, -0.5 * p);
  }
  double cellv = 1.0;
  for (int a = 0; a < dim; ++a) cellv *= h[a] / sub;
  return acc * cellv;
}

// Moment over the near box used by the pointwise oracles.
inline double near_second_moment(const Grid &g, double p) {
  return box_second_moment(g, p, 2 * kNearCells + 1);
}

// int over the box [-mult*h/2, mult*h/2]^N of |z|^{-p} dz (midpoint; nodes
// never hit the origin).
inline double box_kernel_moment(const Grid &g, double p, double mult) {
  const int dim = g.dim();
  const int sub = dim == 3 ? 96 : 512;
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < dim; ++a) h[a] = mult * g.spacing(a);
  double acc = 0.0;
  const long total = static_cast<long>(std::pow(sub, dim));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      const int s = static_cast<int>(rem % sub);
      rem /= sub;
      const double z = h[a] * ((s + 0.5) / sub - 0.5);
      r2 += z * z;
    }
    acc += std::pow(r2, -0.5 * p);
  }
  double cellv = 1.0;
  for (int a = 0; a < dim; ++a) cellv *= h[a] / sub;
  return acc * cellv;
}

// Centered finite differences with periodic wrap; independent of the
// spectral machinery so the oracle stays a genuine cross-check.
inline double fd_first(const PhysicalField &f, std::int64_t i, int axis) {
  const Grid &g = f.grid();
  std::array<int, kMaxDim> idx{};
  g.decompose(i, idx);
  const int m = g.points(axis);
  std::array<int, kMaxDim> up = idx, dn = idx;
  up[axis] = (idx[axis] + 1) % m;
  dn[axis] = (idx[axis] + m - 1) % m;
  return (f[g.flatten(up)] - f[g.flatten(dn)]) / (2.0 * g.spacing(axis));
}

inline double fd_second(const PhysicalField &f, std::int64_t i, int axis) {
  const Grid &g = f.grid();
  std::array<int, kMaxDim> idx{};
  g.decompose(i, idx);
  const int m = g.points(axis);
  std::array<int, kMaxDim> up = idx, dn = idx;
  up[axis] = (idx[axis] + 1) % m;
  dn[axis] = (idx[axis] + m - 1) % m;
  const double h = g.spacing(axis);
  return (f[g.flatten(up)] - 2.0 * f[i] + f[g.flatten(dn)]) / (h * h);
}

// Signed minimal displacement for a wrapped per-axis index offset.
inline double signed_offset(const Grid &g, int axis, int d) {
  const int m = g.points(axis);
  if (d > m / 2) d -= m;
  return g.spacing(axis) * d;
}

inline bool near_offset(const Grid &g, const std::array<int, kMaxDim> &idx) {
  for (int a = 0; a < g.dim(); ++a) {
    int d = idx[a];
    if (d > g.points(a) / 2) d -= g.points(a);
    if (std::abs(d) > kNearCells) return false;
  }
  return true;
}

// Periodized kernel tables indexed by the wrapped index offset: entry d holds
// the sum over lattice images n in {-images..images}^N of K(z_d + n*L) with
// z_d the minimal signed displacement, so the covered displacement region is
// the symmetric box [-(images+1/2)L, (images+1/2)L]^N. The n = 0 term is
// dropped for near offsets: the near box enters through the analytic moment
// correction instead.
inline std::vector<double> lambda_kernel_table(const Grid &g, double alpha,
                                               int images) {
  const int dim = g.dim();
  std::vector<double> table(g.size(), 0.0);
  std::array<int, kMaxDim> idx{};
  const long copies = static_cast<long>(std::pow(2 * images + 1, dim));
  for (std::int64_t d = 1; d < g.size(); ++d) {
    g.decompose(d, idx);
    const bool near = near_offset(g, idx);
    std::array<double, kMaxDim> z0{};
    for (int a = 0; a < dim; ++a) z0[a] = signed_offset(g, a, idx[a]);
    double acc = 0.0;
    for (long c = 0; c < copies; ++c) {
      long rem = c;
      bool base = true;
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const int img = static_cast<int>(rem % (2 * images + 1)) - images;
        rem /= 2 * images + 1;
        if (img != 0) base = false;
        const double z = z0[a] + img * g.length(a);
        r2 += z * z;
      }
      if (base && near) continue;
      acc += std::pow(r2, -0.5 * (dim + alpha));
    }
    table[d] = acc;
  }
  return table;
}

inline std::vector<std::array<double, kMaxDim>> riesz_kernel_table(
    const Grid &g, int images) {
  const int dim = g.dim();
  std::vector<std::array<double, kMaxDim>> table(g.size());
  std::array<int, kMaxDim> idx{};
  const long copies = static_cast<long>(std::pow(2 * images + 1, dim));
  for (std::int64_t d = 1; d < g.size(); ++d) {
    g.decompose(d, idx);
    const bool near = near_offset(g, idx);
    // The Nyquist offset M/2 has two equal-length representatives +-L/2;
    // average over both so the table stays globally odd (constants then map
    // to exactly zero by pairwise cancellation).
    std::array<int, kMaxDim> nyq{};
    int n_nyq = 0;
    for (int a = 0; a < dim; ++a)
      if (idx[a] == g.points(a) / 2) nyq[n_nyq++] = a;
    std::array<double, kMaxDim> acc{};
    for (int variant = 0; variant < (1 << n_nyq); ++variant) {
      std::array<double, kMaxDim> z0{};
      for (int a = 0; a < dim; ++a) z0[a] = signed_offset(g, a, idx[a]);
      for (int b = 0; b < n_nyq; ++b)
        if (variant & (1 << b)) z0[nyq[b]] = -z0[nyq[b]];
      for (long c = 0; c < copies; ++c) {
        long rem = c;
        bool base = true;
        double r2 = 0.0;
        std::array<double, kMaxDim> z{};
        for (int a = 0; a < dim; ++a) {
          const int img = static_cast<int>(rem % (2 * images + 1)) - images;
          rem /= 2 * images + 1;
          if (img != 0) base = false;
          z[a] = z0[a] + img * g.length(a);
          r2 += z[a] * z[a];
        }
        if (base && near) continue;
        const double w = std::pow(r2, -0.5 * (dim + 1));
        for (int a = 0; a < dim; ++a) acc[a] += z[a] * w;
      }
    }
    for (int a = 0; a < dim; ++a) acc[a] /= (1 << n_nyq);
    table[d] = acc;
  }
  return table;
}

}  // namespace detail

// Lambda^alpha theta(x) = C_alpha P.V. int (theta(x)-theta(y))/|x-y|^{N+alpha} dy
// applied to the periodic extension of theta: midpoint cubature with the
// kernel summed over lattice images. Two analytic remainders are added:
//   - the skipped singular cell, via the Taylor term -1/2 sum_a d2f_a * I_cell;
//   - the region beyond the image sum, where the periodic field is replaced
//     by its mean: (theta(x) - mean) * T.
inline PhysicalField lambda_alpha_quadrature(const PhysicalField &f,
                                             double alpha,
                                             const QuadratureSpec &spec = {}) {
  spec.validate();
  if (!(alpha > 0.0 && alpha < 2.0))
    throw UnsupportedOrder("lambda_alpha_quadrature: alpha must be in (0,2)");
  require_localized(f);
  const Grid &g = f.grid();
  const int dim = g.dim();
  const double c_alpha = lambda_constant(dim, alpha);
  const int stride = spec.subsample;
  const double cell = g.cell_volume() * std::pow(stride, dim);
  const std::int64_t n = g.size();
  const int images = dim == 1 ? 30 : dim == 2 ? 4 : 1;

  const std::vector<double> table = detail::lambda_kernel_table(g, alpha, images);
  const double tail = detail::exterior_tail(g, alpha, images);
  const double near_moment = detail::near_second_moment(g, dim + alpha);

  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(n);

  std::vector<std::array<int, kMaxDim>> idx(n);
  std::vector<std::int64_t> ys;
  for (std::int64_t i = 0; i < n; ++i) {
    g.decompose(i, idx[i]);
    bool keep = true;
    for (int a = 0; a < dim; ++a)
      if (idx[i][a] % stride != 0) keep = false;
    if (keep) ys.push_back(i);
  }

  PhysicalField out(g, 1);
  parallel_for(n, [&](std::int64_t begin, std::int64_t end) {
    std::array<int, kMaxDim> off{};
    for (std::int64_t i = begin; i < end; ++i) {
      const double fx = f[i];
      double acc = 0.0;
      for (std::int64_t y : ys) {
        for (int a = 0; a < dim; ++a) {
          off[a] = idx[i][a] - idx[y][a];
          if (off[a] < 0) off[a] += g.points(a);
        }
        acc += (fx - f[y]) * table[g.flatten(off)];
      }
      double corr = 0.0;
      for (int a = 0; a < dim; ++a)
        corr -= 0.5 * detail::fd_second(f, i, a) * near_moment;
      out[i] = c_alpha * (acc * cell + (fx - mean) * tail + corr);
    }
  });
  return out;
}

// R_j theta(x) = C_N P.V. int (x_j - y_j) theta(y) / |x-y|^{N+1} dy applied
// to the periodic extension: image-summed kernel table plus the skipped-cell
// Taylor term -df_j * J_cell. The far field needs no term: the covered
// displacement box is symmetric, so the mean's odd-kernel integral vanishes.
inline PhysicalField riesz_quadrature(const PhysicalField &f,
                                      const QuadratureSpec &spec = {}) {
  spec.validate();
  require_localized(f);
  const Grid &g = f.grid();
  const int dim = g.dim();
  const double c_n = riesz_constant(dim);
  const int stride = spec.subsample;
  const double cell = g.cell_volume() * std::pow(stride, dim);
  const std::int64_t n = g.size();
  const int images = dim == 1 ? 30 : dim == 2 ? 4 : 1;

  const auto table = detail::riesz_kernel_table(g, images);
  const double near_moment = detail::near_second_moment(g, dim + 1);

  std::vector<std::array<int, kMaxDim>> idx(n);
  std::vector<std::int64_t> ys;
  for (std::int64_t i = 0; i < n; ++i) {
    g.decompose(i, idx[i]);
    bool keep = true;
    for (int a = 0; a < dim; ++a)
      if (idx[i][a] % stride != 0) keep = false;
    if (keep) ys.push_back(i);
  }

  PhysicalField out(g, dim);
  parallel_for(n, [&](std::int64_t begin, std::int64_t end) {
    std::array<int, kMaxDim> off{};
    for (std::int64_t i = begin; i < end; ++i) {
      std::array<double, kMaxDim> acc{};
      for (std::int64_t y : ys) {
        for (int a = 0; a < dim; ++a) {
          off[a] = idx[i][a] - idx[y][a];
          if (off[a] < 0) off[a] += g.points(a);
        }
        const auto &k = table[g.flatten(off)];
        for (int a = 0; a < dim; ++a) acc[a] += f[y] * k[a];
      }
      for (int a = 0; a < dim; ++a) {
        const double corr = -detail::fd_first(f, i, a) * near_moment;
        out(a, i) = c_n * (acc[a] * cell + corr);
      }
    }
  });
  return out;
}

struct SymmetrizationResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
};

// int phi f Rf dx  vs  (C_N/2) double-int (x-y).(phi(x)-phi(y)) f(x)f(y)/|x-y|^{N+1},
// both sides summed over vector components. lhs uses the spectral Riesz
// transform, rhs the double midpoint sum skipping x = y.
inline SymmetrizationResult riesz_symmetrization_check(
    const PhysicalField &f, const PhysicalField &phi,
    const QuadratureSpec &spec = {}) {
  spec.validate();
  const Grid &g = f.grid();
  const int dim = g.dim();
  const std::int64_t n = g.size();
  const int stride = spec.subsample;
  double effective = static_cast<double>(n) / std::pow(stride, dim);
  if (effective > std::pow(64.0, dim) + 0.5)
    throw TooExpensive(
        "riesz_symmetrization_check: grid too large; increase subsample");

  SymmetrizationResult res;

  PhysicalField rf = inverse_transform_unchecked(
      riesz_transform(forward_transform(f)));
  const double cell = g.cell_volume();
  for (int a = 0; a < dim; ++a)
    for (std::int64_t i = 0; i < n; ++i)
      res.lhs += phi[i] * f[i] * rf(a, i) * cell;

  std::vector<std::int64_t> pts;
  std::array<int, kMaxDim> idx{};
  for (std::int64_t i = 0; i < n; ++i) {
    g.decompose(i, idx);
    bool keep = true;
    for (int a = 0; a < dim; ++a)
      if (idx[a] % stride != 0) keep = false;
    if (keep) pts.push_back(i);
  }
  std::vector<std::array<double, kMaxDim>> pos(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) g.position(pts[i], pos[i]);

  const double w2 = std::pow(g.cell_volume() * std::pow(stride, dim), 2);
  const double c_n = riesz_constant(dim);
  const std::int64_t np = static_cast<std::int64_t>(pts.size());
  std::vector<double> partial(thread_count(), 0.0);
  parallel_for(np, [&](std::int64_t begin, std::int64_t end) {
    double acc = 0.0;
    for (std::int64_t ii = begin; ii < end; ++ii) {
      const double fx = f[pts[ii]];
      const double px = phi[pts[ii]];
      for (std::int64_t jj = 0; jj < np; ++jj) {
        if (ii == jj) continue;
        double r2 = 0.0, dot = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double d = pos[ii][a] - pos[jj][a];
          r2 += d * d;
          dot += d * (px - phi[pts[jj]]);
        }
        acc += dot * fx * f[pts[jj]] * std::pow(r2, -0.5 * (dim + 1));
      }
    }
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    partial[0] += acc;
  });
  // The skipped diagonal block is restored by a Taylor moment: near y = x
  // the integrand is sum_ab z_a z_b d_b phi(x) f(x)^2 |z|^{-(N+1)}, whose
  // cross moments vanish on the symmetric sampling cell.
  const double diag_moment =
      detail::box_second_moment(g, dim + 1, static_cast<double>(stride));
  const double w1 = g.cell_volume() * std::pow(stride, dim);
  double diag = 0.0;
  for (std::int64_t ii = 0; ii < np; ++ii) {
    double dphi = 0.0;
    for (int a = 0; a < dim; ++a) dphi += detail::fd_first(phi, pts[ii], a);
    diag += f[pts[ii]] * f[pts[ii]] * dphi;
  }
  res.rhs = 0.5 * c_n * (partial[0] * w2 + diag * diag_moment * w1);

  const double scale = std::max({std::abs(res.lhs), std::abs(res.rhs), 1e-300});
  res.rel_err = std::abs(res.lhs - res.rhs) / scale;
  return res;
}

// J_N = double-int Theta(x) Theta(y) |x-y|^{-(N-1)} dx dy (midpoint, skip x=y).
inline double virial_rhs(const PhysicalField &theta_cap,
                         const QuadratureSpec &spec = {}) {
  spec.validate();
  const Grid &g = theta_cap.grid();
  const int dim = g.dim();
  const double floor = -1e-10 * std::max(theta_cap.max_abs(), 1.0);
  for (double v : theta_cap.values())
    if (v < floor) throw SignViolation("virial_rhs: Theta must be >= 0");

  const int stride = spec.subsample;
  const std::int64_t n = g.size();
  std::vector<std::int64_t> pts;
  std::array<int, kMaxDim> idx{};
  for (std::int64_t i = 0; i < n; ++i) {
    g.decompose(i, idx);
    bool keep = true;
    for (int a = 0; a < dim; ++a)
      if (idx[a] % stride != 0) keep = false;
    if (keep) pts.push_back(i);
  }
  std::vector<std::array<double, kMaxDim>> pos(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) g.position(pts[i], pos[i]);

  const double w1 = g.cell_volume() * std::pow(stride, dim);
  const double w2 = w1 * w1;
  const std::int64_t np = static_cast<std::int64_t>(pts.size());
  std::vector<double> sums(1, 0.0);
  parallel_for(np, [&](std::int64_t begin, std::int64_t end) {
    double acc = 0.0;
    for (std::int64_t ii = begin; ii < end; ++ii) {
      const double tx = theta_cap[pts[ii]];
      if (tx == 0.0) continue;
      // Flat kernel in 1-D: the diagonal is regular and must be kept so
      // that J_1 = (int Theta)^2 exactly.
      if (dim == 1) acc += tx * tx;
      for (std::int64_t jj = 0; jj < np; ++jj) {
        if (ii == jj) continue;
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double d = pos[ii][a] - pos[jj][a];
          r2 += d * d;
        }
        acc += tx * theta_cap[pts[jj]] * std::pow(r2, -0.5 * (dim - 1));
      }
    }
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    sums[0] += acc;
  });
  double diag = 0.0;
  if (dim >= 2) {
    // The skipped diagonal cell carries int_cell |z|^{-(N-1)} dz of mass:
    // the kernel is integrable there but not negligible at first order.
    const double cell_moment =
        detail::box_kernel_moment(g, dim - 1, static_cast<double>(stride));
    for (std::int64_t ii = 0; ii < np; ++ii) {
      const double tx = theta_cap[pts[ii]];
      diag += tx * tx * cell_moment;
    }
  }
  return sums[0] * w2 + diag * w1;
}

}  // namespace oracle
}  // namespace cnqg
