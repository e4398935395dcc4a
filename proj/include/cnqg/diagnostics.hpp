#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cnqg/oracle.hpp"
#include "cnqg/solver.hpp"

namespace cnqg {
namespace diagnostics {

struct InequalityReport {
  std::string name;
  long sampled_points = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool pass = true;

  void absorb(double violation) {
    worst_violation = std::max(worst_violation, violation);
    ++sampled_points;
    pass = worst_violation <= tolerance;
  }
};

// (sum |f|^p h^N)^{1/p}; p = inf gives the grid max of |f| (vector magnitude
// for vector fields).
inline double lp_norm(const PhysicalField &f, double p) {
  if (!(p >= 1.0)) throw InvalidExponent("lp_norm: p must be >= 1");
  if (!f.finite()) throw InvalidField("lp_norm: non-finite field");
  const Grid &g = f.grid();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      double mag2 = 0.0;
      for (int c = 0; c < f.components(); ++c) mag2 += f(c, i) * f(c, i);
      m = std::max(m, std::sqrt(mag2));
    }
    return m;
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double mag2 = 0.0;
    for (int c = 0; c < f.components(); ++c) mag2 += f(c, i) * f(c, i);
    s += std::pow(std::sqrt(mag2), p);
  }
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

inline double mass(const PhysicalField &f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

// Homogeneous H^s norm: sqrt(V sum_{k!=0} |k|^{2s} |theta_hat(k)|^2).
inline double hs_norm(const SpectralField &F, double s) {
  const Grid &g = F.grid();
  if (s < 0.0 && std::abs(F(0, 0)) > 1e-13 * std::max(F.max_abs(), 1.0))
    throw MeanNotZero("hs_norm: nonzero mean with s < 0");
  double acc = 0.0;
  for (int c = 0; c < F.components(); ++c) {
    for (std::int64_t i = 1; i < g.size(); ++i) {
      const double kn = g.wavevector_norm(i);
      acc += std::pow(kn, 2.0 * s) * std::norm(F(c, i));
    }
  }
  return std::sqrt(g.volume() * acc);
}

inline double l2_norm_spectral(const SpectralField &F) {
  double acc = 0.0;
  for (const auto &c : F.coeffs()) acc += std::norm(c);
  return std::sqrt(F.grid().volume() * acc);
}

// int |theta|^{p-2} theta Lambda^s theta dx >= (2/p) int (Lambda^{s/2}|theta|^{p/2})^2 dx >= 0.
inline InequalityReport pointwise_lemma_check(const PhysicalField &f, double s,
                                              double p) {
  if (!(s >= 0.0 && s <= 2.0))
    throw InvalidExponent("pointwise_lemma_check: s must lie in [0,2]");
  if (!(p >= 2.0))
    throw InvalidExponent("pointwise_lemma_check: p must be >= 2");
  const Grid &g = f.grid();
  SpectralField F = forward_transform(f);
  if (tail_energy_fraction(F) > 1e-6)
    throw UnderResolved("pointwise_lemma_check: field not spectrally resolved");

  PhysicalField lam = inverse_transform_unchecked(fractional_laplacian(F, s));
  double lhs = 0.0;
  for (std::int64_t i = 0; i < g.size(); ++i)
    lhs += std::pow(std::abs(f[i]), p - 2.0) * f[i] * lam[i];
  lhs *= g.cell_volume();

  PhysicalField half(g, 1);
  for (std::int64_t i = 0; i < g.size(); ++i)
    half[i] = std::pow(std::abs(f[i]), 0.5 * p);
  SpectralField H = forward_transform(half);
  double rhs;
  if (s == 0.0) {
    rhs = 0.0;
    for (const auto &c : H.coeffs()) rhs += std::norm(c);
    rhs *= g.volume();
  } else {
    const double h = hs_norm(H, 0.5 * s);
    rhs = h * h;
  }
  rhs *= 2.0 / p;

  InequalityReport rep;
  rep.name = "pointwise-lemma";
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rep.tolerance = 1e-8 * scale;
  rep.absorb(rhs - lhs);
  return rep;
}

// Discrete energy inequality along a trajectory of nonnegative data:
// (|theta^{n+1}|_2^2 - |theta^n|_2^2)/dt + 2 nu |Lambda^{alpha/2} theta^{n+1}|_2^2 <= tol
// plus the integrated form against |theta_0|_2^2.
inline InequalityReport energy_inequality_check(
    const std::vector<TrajectoryRecord> &traj, const SolverConfig &cfg,
    double tol_factor = 1e-6) {
  InequalityReport rep;
  rep.name = "energy-inequality";
  if (traj.size() < 2) throw InsufficientData("energy_inequality_check");
  std::vector<double> l2sq(traj.size()), disssq(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double n2 = lp_norm(traj[i].theta, 2.0);
    l2sq[i] = n2 * n2;
    const double d =
        hs_norm(forward_transform(traj[i].theta), 0.5 * cfg.alpha);
    disssq[i] = d * d;
  }
  const double scale = l2sq[0];
  rep.tolerance = tol_factor * scale;
  double integral = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double dt = traj[i].t - traj[i - 1].t;
    integral += 0.5 * dt * (disssq[i] + disssq[i - 1]);
    const double rate = (l2sq[i] - l2sq[i - 1]) / dt + 2.0 * cfg.nu * disssq[i];
    rep.absorb(rate * dt);  // per-step violation, scaled to energy units
    rep.absorb(l2sq[i] + 2.0 * cfg.nu * integral - l2sq[0]);
  }
  return rep;
}

// Level-set energy inequality for theta_lambda = (theta - lambda)_+ between
// the first record and every later one (trapezoid-in-time dissipation):
// |theta_lambda(t)|_2^2 + 2 nu int |Lambda^{alpha/2} theta_lambda|_2^2 <= |theta_lambda(0)|_2^2.
inline InequalityReport level_set_energy_check(
    const std::vector<TrajectoryRecord> &traj, double lambda, double nu,
    double alpha, double tol = 0.0) {
  InequalityReport rep;
  rep.name = "level-set-energy";
  if (traj.size() < 2) throw InsufficientData("level_set_energy_check");
  const Grid &g = traj[0].theta.grid();
  std::vector<double> a(traj.size()), d(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    PhysicalField cut(g, 1);
    for (std::int64_t j = 0; j < g.size(); ++j)
      cut[j] = std::max(traj[i].theta[j] - lambda, 0.0);
    const double n2 = lp_norm(cut, 2.0);
    a[i] = n2 * n2;
    const double h = hs_norm(forward_transform(cut), 0.5 * alpha);
    d[i] = h * h;
  }
  const double n0 = lp_norm(traj[0].theta, 2.0);
  rep.tolerance = tol > 0.0 ? tol : 1e-4 * n0 * n0;
  double integral = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double dt = traj[i].t - traj[i - 1].t;
    integral += 0.5 * dt * (d[i] + d[i - 1]);
    rep.absorb(a[i] + 2.0 * nu * integral - a[0]);
  }
  return rep;
}

// |theta|_p non-increasing (p in {2,4,inf}) and min theta bounded below,
// for nonnegative initial data.
inline InequalityReport maximum_principle_check(
    const std::vector<TrajectoryRecord> &traj, double rel_slack = 1e-8,
    double negativity_factor = 1e-6) {
  InequalityReport rep;
  rep.name = "maximum-principle";
  if (traj.empty()) throw InsufficientData("maximum_principle_check");
  const double inf = std::numeric_limits<double>::infinity();
  const double sup0 = lp_norm(traj[0].theta, inf);
  rep.tolerance = 0.0;
  for (double p : {2.0, 4.0, inf}) {
    double prev = lp_norm(traj[0].theta, p);
    for (std::size_t i = 1; i < traj.size(); ++i) {
      const double cur = lp_norm(traj[i].theta, p);
      rep.absorb(cur - prev * (1.0 + rel_slack));
      prev = cur;
    }
  }
  for (const auto &rec : traj)
    rep.absorb(-(rec.theta.min_value()) - negativity_factor * sup0);
  return rep;
}

// A priori spectral bound |theta_hat(k,t)| <= |theta0|_L1 + |k| int_0^t |theta|_2^2,
// with the discrete coefficient rescaled to the continuum convention
// (multiplied by the box volume).
inline InequalityReport spectral_apriori_check(
    const std::vector<TrajectoryRecord> &traj, double tol_factor = 1e-6) {
  InequalityReport rep;
  rep.name = "spectral-apriori";
  if (traj.empty()) throw InsufficientData("spectral_apriori_check");
  const Grid &g = traj[0].theta.grid();
  const double volume = g.volume();
  PhysicalField abs0(g, 1);
  for (std::int64_t i = 0; i < g.size(); ++i)
    abs0[i] = std::abs(traj[0].theta[i]);
  double l1_0 = mass(abs0);
  // For one-signed data |theta_0|_L1 = V |theta0_hat(0)|; using the spectral
  // value keeps the k = 0, t = 0 case an exact identity instead of comparing
  // two differently rounded sums.
  const auto [lo_it, hi_it] = std::minmax_element(
      traj[0].theta.values().begin(), traj[0].theta.values().end());
  const double eps_sign = 1e-12 * traj[0].theta.max_abs();
  if (*lo_it >= -eps_sign || *hi_it <= eps_sign)
    l1_0 = volume * std::abs(forward_transform(traj[0].theta)[0]);
  rep.tolerance = tol_factor * l1_0;

  double integral = 0.0;
  double prev_l2sq = 0.0;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const double n2 = lp_norm(traj[r].theta, 2.0);
    const double l2sq = n2 * n2;
    if (r > 0) {
      const double dt = traj[r].t - traj[r - 1].t;
      integral += 0.5 * dt * (l2sq + prev_l2sq);
    }
    prev_l2sq = l2sq;
    SpectralField F = forward_transform(traj[r].theta);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double kn = g.wavevector_norm(i);
      const double bound = l1_0 + kn * integral;
      rep.absorb(volume * std::abs(F[i]) - bound);
    }
  }
  return rep;
}

struct VirialProbeResult {
  std::vector<double> times;
  std::vector<double> w;                  // second moment of Theta = -theta
  std::vector<double> j;                  // J_N double integral
  std::vector<double> dwdt;               // centered differences (interior times)
  std::vector<double> identity_residual;  // |dw/dt + C_N J| at interior times
  bool lower_bound_ok = true;
  double worst_lower_bound_violation = -std::numeric_limits<double>::infinity();
};

// w(t), J_N(t), the identity residual dw/dt = -C_N J_N, and the algebraic
// lower bound 2^{-(N-1)/2} M^{(N+3)/2} w^{-(N-1)/2} <= J_N.
inline VirialProbeResult virial_probe(const std::vector<TrajectoryRecord> &traj,
                                      const oracle::QuadratureSpec &spec = {},
                                      double bound_rel_slack = 1e-6) {
  if (traj.size() < 3) throw InsufficientData("virial_probe");
  const Grid &g = traj[0].theta.grid();
  const int dim = g.dim();
  const auto center = box_center(g);
  const double c_n = oracle::riesz_constant(dim);

  VirialProbeResult res;
  for (const auto &rec : traj) {
    PhysicalField cap(g, 1);
    double floor = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      cap[i] = -rec.theta[i];
      floor = std::min(floor, cap[i]);
    }
    // Spectral ringing leaves tiny positive excursions of theta even though
    // the sign is preserved in exact arithmetic; reject only genuine sign
    // changes. The moment below keeps the signed values (the |x|^2 weight
    // amplifies the ringing, and clamping it would bias dw/dt); only the
    // kernel quadrature gets a clamped copy to satisfy its sign guard.
    if (floor < -1e-3 * std::max(cap.max_abs(), 1.0))
      throw SignViolation("virial_probe: Theta = -theta must be >= 0");
    PhysicalField cap_clamped = cap;
    for (double &v : cap_clamped.values()) v = std::max(v, 0.0);

    // Support check: periodic images must be negligible in the moment.
    double total = 0.0, outside = 0.0, w = 0.0;
    std::array<double, kMaxDim> x{};
    const double r_max = 0.25 * g.length(0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      g.position(i, x);
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double dxa = x[a] - center[a];
        r2 += dxa * dxa;
      }
      total += cap[i];
      if (r2 > r_max * r_max) outside += cap[i];
      w += r2 * cap[i];
    }
    if (total > 0.0 && outside > 1e-3 * total)
      throw NotLocalized("virial_probe: support radius exceeds L/4");
    res.times.push_back(rec.t);
    res.w.push_back(w * g.cell_volume());
    res.j.push_back(oracle::virial_rhs(cap_clamped, spec));

    const double m = total * g.cell_volume();
    const double bound = std::pow(2.0, -0.5 * (dim - 1)) *
                         std::pow(m, 0.5 * (dim + 3)) *
                         std::pow(res.w.back(), -0.5 * (dim - 1));
    const double viol = bound - res.j.back() * (1.0 + bound_rel_slack);
    res.worst_lower_bound_violation =
        std::max(res.worst_lower_bound_violation, viol);
    if (viol > 0.0) res.lower_bound_ok = false;
  }
  for (std::size_t i = 1; i + 1 < res.times.size(); ++i) {
    const double dwdt =
        (res.w[i + 1] - res.w[i - 1]) / (res.times[i + 1] - res.times[i - 1]);
    res.dwdt.push_back(dwdt);
    res.identity_residual.push_back(std::abs(dwdt + c_n * res.j[i]));
  }
  return res;
}

struct DecayFitResult {
  double exponent = 0.0;  // gamma in quantity ~ (1+t)^{-gamma}
  double r2 = 0.0;
  double expected = 0.0;  // closed-form rate (0 when no formula applies)
};

enum class DecayQuantity { L2, Lp, GradL2 };

inline double expected_decay_exponent(DecayQuantity q, int dim, double alpha,
                                      double p) {
  switch (q) {
    case DecayQuantity::L2:
    case DecayQuantity::GradL2:
      return 0.5 * (dim + 2.0 - 2.0 * alpha) / alpha;  // epsilon -> 0 limit
    case DecayQuantity::Lp:
      return dim * (p - 2.0) / (2.0 * p * alpha);
  }
  return 0.0;
}

// Least-squares fit of log(quantity) against log(1+t) over a window.
inline DecayFitResult decay_fit(const std::vector<double> &times,
                                const std::vector<double> &values, double t_a,
                                double t_b) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_a || times[i] > t_b) continue;
    if (!(values[i] > 0.0)) continue;
    xs.push_back(std::log1p(times[i]));
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 20)
    throw InsufficientData("decay_fit: need >= 20 samples in the window");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - slope * (sxy - sx * sy / n);
  DecayFitResult res;
  res.exponent = -slope;
  res.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return res;
}

// Mean-removed norm series for decay reporting: on a torus the conserved
// mean floors |theta|_2, so only the fluctuation can decay.
inline std::vector<double> fluctuation_series(
    const std::vector<TrajectoryRecord> &traj, DecayQuantity q, double p) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto &rec : traj) {
    const Grid &g = rec.theta.grid();
    const double mean = mass(rec.theta) / g.volume();
    PhysicalField fl(g, 1);
    for (std::int64_t i = 0; i < g.size(); ++i) fl[i] = rec.theta[i] - mean;
    switch (q) {
      case DecayQuantity::L2:
        out.push_back(lp_norm(fl, 2.0));
        break;
      case DecayQuantity::Lp:
        out.push_back(lp_norm(fl, p));
        break;
      case DecayQuantity::GradL2:
        out.push_back(hs_norm(forward_transform(fl), 1.0));
        break;
    }
  }
  return out;
}

struct UniquenessMonitorResult {
  std::vector<double> times;
  std::vector<double> lq_norms;
  std::vector<double> running_integral;  // (int_0^t |theta|_q^p)^{1/p}
};

// Leray-Prodi-Serrin style monitor: requires 1/p + N/(q alpha) = 1 - 1/alpha.
inline UniquenessMonitorResult uniqueness_class_monitor(
    const std::vector<TrajectoryRecord> &traj, double p, double q,
    double alpha) {
  if (!(alpha > 1.0))
    throw InvalidExponents("uniqueness_class_monitor: alpha must be > 1");
  if (traj.empty()) throw InsufficientData("uniqueness_class_monitor");
  const int dim = traj[0].theta.grid().dim();
  const double relation = 1.0 / p + dim / (q * alpha) - (1.0 - 1.0 / alpha);
  if (std::abs(relation) > 1e-12)
    throw InvalidExponents(
        "uniqueness_class_monitor: (p,q,alpha) violate the scaling relation");
  UniquenessMonitorResult res;
  double acc = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double nq = lp_norm(traj[i].theta, q);
    if (i > 0) {
      const double dt = traj[i].t - traj[i - 1].t;
      acc += 0.5 * dt * (std::pow(nq, p) + std::pow(prev, p));
    }
    prev = nq;
    res.times.push_back(traj[i].t);
    res.lq_norms.push_back(nq);
    res.running_integral.push_back(std::pow(acc, 1.0 / p));
  }
  return res;
}

}  // namespace diagnostics
}  // namespace cnqg
