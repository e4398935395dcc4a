#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cnqg/initial_data.hpp"
#include "cnqg/operators.hpp"
#include "cnqg/transform.hpp"

namespace cnqg {

enum class Scheme { IfEuler, Etdrk2 };

struct SolverConfig {
  double alpha = 1.5;
  double nu = 0.05;
  double eps = 0.0;  // regularization viscosity (eps * Laplacian)
  Scheme scheme = Scheme::IfEuler;
  double dealias_fraction = 2.0 / 3.0;
  double cfl = 0.5;
  double dt_max = 0.01;
  double t_end = 1.0;
  int record_every = 1;
  bool nonlinear = true;       // test hook: disable div(u theta)
  bool clip_negative = false;  // zero undershoots after each step
  double grad_blowup_factor = 1e4;     // trip at this multiple of |grad theta0|_inf
  double tail_energy_fraction = 1e-3;  // trip when top-1/3 spectrum holds more

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 2.0))
      throw ConfigError("SolverConfig: alpha outside [0,2]");
    if (nu < 0.0 || eps < 0.0)
      throw ConfigError("SolverConfig: nu, eps must be >= 0");
    if (!(dealias_fraction > 0.5 && dealias_fraction <= 1.0))
      throw ConfigError("SolverConfig: dealias_fraction outside (0.5, 1]");
    if (!(dt_max > 0.0)) throw ConfigError("SolverConfig: dt_max must be > 0");
    if (!(t_end > 0.0)) throw ConfigError("SolverConfig: t_end must be > 0");
    if (record_every < 1)
      throw ConfigError("SolverConfig: record_every must be >= 1");
    if (!(cfl > 0.0)) throw ConfigError("SolverConfig: cfl must be > 0");
  }
};

struct TrajectoryRecord {
  double t = 0.0;
  double dt = 0.0;     // step size used to reach this time (0 at t=0)
  double u_max = 0.0;  // |u|_inf at record time
  PhysicalField theta;
};

enum class RunStatus { Completed, BlowupSuspected, NumericalBlowup };

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::vector<TrajectoryRecord> records;
  long steps = 0;
  std::string message;
};

// Discrete circular convolution with a nonnegative unit-mass bump, realized
// spectrally; preserves the mean exactly and nonnegativity to roundoff.
inline PhysicalField mollify(const PhysicalField &theta0, double eps_mollify) {
  const Grid &g = theta0.grid();
  if (eps_mollify < 2.0 * g.min_spacing())
    throw UnderResolvedMollifier("mollify: eps must cover >= 2 grid cells");
  std::array<double, kMaxDim> origin{};
  PhysicalField psi = compact_bump(g, 1.0, eps_mollify, origin);
  double mass = 0.0;
  for (double v : psi.values()) mass += v;
  mass *= g.cell_volume();
  for (double &v : psi.values()) v /= mass;

  SpectralField psi_hat = forward_transform(psi);
  SpectralField th_hat = forward_transform(theta0);
  const double volume = g.volume();
  for (std::int64_t i = 0; i < g.size(); ++i)
    th_hat[i] *= volume * psi_hat[i];
  return inverse_transform_unchecked(th_hat);
}

namespace detail {

struct NonlinearEval {
  SpectralField term;  // dealiased div(u theta)
  double u_max = 0.0;
};

inline NonlinearEval nonlinear_eval(const SpectralField &theta,
                                    const SolverConfig &cfg) {
  const Grid &g = theta.grid();
  SpectralField thd = dealias(theta, cfg.dealias_fraction);
  PhysicalField u = inverse_transform_unchecked(riesz_transform(thd));
  PhysicalField th = inverse_transform_unchecked(thd);
  NonlinearEval ev{SpectralField(g, g.dim()), 0.0};
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double mag2 = 0.0;
    for (int c = 0; c < g.dim(); ++c) mag2 += u(c, i) * u(c, i);
    ev.u_max = std::max(ev.u_max, std::sqrt(mag2));
  }
  PhysicalField prod(g, g.dim());
  for (int c = 0; c < g.dim(); ++c)
    for (std::int64_t i = 0; i < g.size(); ++i)
      prod(c, i) = u(c, i) * th[i];
  ev.term = dealias(divergence(forward_transform(prod)), cfg.dealias_fraction);
  return ev;
}

}  // namespace detail

// Dealiased div(u theta) with u = R theta, products formed pointwise on the
// truncated spectrum.
inline SpectralField nonlinear_term(const SpectralField &theta,
                                    const SolverConfig &cfg) {
  if (theta.components() != 1)
    throw ArityError("nonlinear_term: scalar input required");
  return detail::nonlinear_eval(theta, cfg).term;
}

// Equivalent advective form u . grad(theta) + theta Lambda(theta), dealiased
// identically; used to cross-check the divergence form.
inline SpectralField nonlinear_term_advective(const SpectralField &theta,
                                              const SolverConfig &cfg) {
  if (theta.components() != 1)
    throw ArityError("nonlinear_term_advective: scalar input required");
  const Grid &g = theta.grid();
  SpectralField thd = dealias(theta, cfg.dealias_fraction);
  PhysicalField u = inverse_transform_unchecked(riesz_transform(thd));
  PhysicalField th = inverse_transform_unchecked(thd);
  PhysicalField grad = inverse_transform_unchecked(gradient(thd));
  PhysicalField lam = inverse_transform_unchecked(fractional_laplacian(thd, 1.0));
  PhysicalField sum(g, 1);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double adv = 0.0;
    for (int c = 0; c < g.dim(); ++c) adv += u(c, i) * grad(c, i);
    sum[i] = adv + th[i] * lam[i];
  }
  return dealias(forward_transform(sum), cfg.dealias_fraction);
}

namespace detail {

inline double phi1(double z) {
  if (std::abs(z) < 1e-4)
    return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return (std::exp(z) - 1.0) / z;
}

inline double phi2(double z) {
  if (std::abs(z) < 1e-4)
    return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0));
  return (std::exp(z) - 1.0 - z) / (z * z);
}

inline double linear_symbol(const Grid &g, std::int64_t i,
                            const SolverConfig &cfg) {
  const double kn = g.wavevector_norm(i);
  const double lam = cfg.alpha == 0.0 ? 1.0 : std::pow(kn, cfg.alpha);
  return cfg.nu * lam + cfg.eps * kn * kn;
}

inline SpectralField step_with_eval(const SpectralField &theta, double dt,
                                    const SolverConfig &cfg,
                                    const NonlinearEval *eval) {
  const Grid &g = theta.grid();
  SpectralField nl(g, 1);
  if (cfg.nonlinear) {
    nl = eval ? eval->term : nonlinear_eval(theta, cfg).term;
  }
  SpectralField out(g, 1);
  if (cfg.scheme == Scheme::IfEuler) {
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double e = std::exp(-linear_symbol(g, i, cfg) * dt);
      out[i] = e * (theta[i] - dt * nl[i]);
    }
    return out;
  }
  // ETDRK2 (Cox-Matthews) for theta' = -c theta - N(theta) with exact e^{-c dt}.
  SpectralField stage(g, 1);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double z = -linear_symbol(g, i, cfg) * dt;
    stage[i] = std::exp(z) * theta[i] - dt * phi1(z) * nl[i];
  }
  SpectralField nl2(g, 1);
  if (cfg.nonlinear) nl2 = nonlinear_eval(stage, cfg).term;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double z = -linear_symbol(g, i, cfg) * dt;
    out[i] = stage[i] - dt * phi2(z) * (nl2[i] - nl[i]);
  }
  return out;
}

}  // namespace detail

// One time step. The linear part is applied by its exact per-mode factor;
// only div(u theta) is treated explicitly.
inline SpectralField step(const SpectralField &theta, double dt,
                          const SolverConfig &cfg) {
  cfg.validate();
  if (dt > cfg.dt_max * (1.0 + 1e-12))
    throw StepTooLarge("step: dt exceeds dt_max");
  if (cfg.nonlinear) {
    detail::NonlinearEval ev = detail::nonlinear_eval(theta, cfg);
    const double limit =
        cfg.cfl * theta.grid().min_spacing() / std::max(ev.u_max, 1e-300);
    if (dt > limit * (1.0 + 1e-12))
      throw StepTooLarge("step: dt violates the CFL bound");
    return detail::step_with_eval(theta, dt, cfg, &ev);
  }
  return detail::step_with_eval(theta, dt, cfg, nullptr);
}

// Fraction of spectral energy carried by the top third of the spectrum
// (any axis alias beyond 2/3 of its Nyquist index).
inline double tail_energy_fraction(const SpectralField &F) {
  const Grid &g = F.grid();
  double total = 0.0, tail = 0.0;
  std::array<int, kMaxDim> idx{};
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (i == 0) continue;  // mean mode carries no resolution information
    const double e = std::norm(F[i]);
    total += e;
    g.decompose(i, idx);
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(g.alias(a, idx[a])) > 2 * (g.points(a) / 2) / 3) {
        tail += e;
        break;
      }
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

using RecordHook = std::function<void(const TrajectoryRecord &)>;

// Advance theta0 to t_end under adaptive CFL time stepping, recording every
// record_every steps. Terminates early on the blow-up/resolution monitors.
inline RunResult run(const PhysicalField &theta0, const SolverConfig &cfg,
                     const std::vector<RecordHook> &hooks = {}) {
  cfg.validate();
  if (!theta0.finite()) throw InvalidField("run: non-finite initial data");
  const Grid &g = theta0.grid();

  RunResult result;
  SpectralField th = forward_transform(theta0);

  PhysicalField grad0 =
      inverse_transform_unchecked(gradient(dealias(th, cfg.dealias_fraction)));
  double grad0_inf = 0.0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double m2 = 0.0;
    for (int c = 0; c < g.dim(); ++c) m2 += grad0(c, i) * grad0(c, i);
    grad0_inf = std::max(grad0_inf, std::sqrt(m2));
  }

  double t = 0.0;
  auto record = [&](double dt_used, double umax) {
    TrajectoryRecord rec{t, dt_used, umax, inverse_transform_unchecked(th)};
    for (const auto &h : hooks) h(rec);
    result.records.push_back(std::move(rec));
  };
  record(0.0, 0.0);

  SpectralField last_good = th;
  while (t < cfg.t_end * (1.0 - 1e-12)) {
    detail::NonlinearEval ev{SpectralField(g, 1), 0.0};
    if (cfg.nonlinear) ev = detail::nonlinear_eval(th, cfg);
    double dt = cfg.dt_max;
    if (cfg.nonlinear && ev.u_max > 0.0)
      dt = std::min(dt, cfg.cfl * g.min_spacing() / ev.u_max);
    dt = std::min(dt, cfg.t_end - t);

    last_good = th;
    th = detail::step_with_eval(th, dt, cfg, cfg.nonlinear ? &ev : nullptr);
    t += dt;
    ++result.steps;

    bool finite = true;
    for (const auto &c : th.coeffs())
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) finite = false;
    if (!finite) {
      th = last_good;
      result.status = RunStatus::NumericalBlowup;
      result.message = "NaN detected; returning last good state";
      record(dt, ev.u_max);
      return result;
    }

    if (cfg.clip_negative) {
      PhysicalField phys = inverse_transform_unchecked(th);
      bool clipped = false;
      for (double &v : phys.values())
        if (v < 0.0) {
          v = 0.0;
          clipped = true;
        }
      if (clipped) th = forward_transform(phys);
    }

    const bool at_end = t >= cfg.t_end * (1.0 - 1e-12);
    if (result.steps % cfg.record_every == 0 || at_end) {
      record(dt, ev.u_max);
      // Blow-up / under-resolution monitors (checked at record cadence).
      const PhysicalField &phys = result.records.back().theta;
      PhysicalField grad = inverse_transform_unchecked(
          gradient(dealias(th, cfg.dealias_fraction)));
      double grad_inf = 0.0;
      for (std::int64_t i = 0; i < g.size(); ++i) {
        double m2 = 0.0;
        for (int c = 0; c < g.dim(); ++c) m2 += grad(c, i) * grad(c, i);
        grad_inf = std::max(grad_inf, std::sqrt(m2));
      }
      (void)phys;
      if (grad0_inf > 0.0 && grad_inf > cfg.grad_blowup_factor * grad0_inf) {
        result.status = RunStatus::BlowupSuspected;
        result.message = "gradient growth threshold exceeded";
        return result;
      }
      if (tail_energy_fraction(th) > cfg.tail_energy_fraction) {
        result.status = RunStatus::BlowupSuspected;
        result.message = "spectral tail energy threshold exceeded";
        return result;
      }
    }
  }
  return result;
}

struct PicardResult {
  std::vector<double> difference_norms;   // sup_t ||theta^{m+1}-theta^m||_2
  std::vector<double> contraction_ratios;
  std::vector<SpectralField> fixed_point;  // trajectory at uniform times
  std::vector<double> times;
  bool converged = false;
  bool diverged = false;  // ratio > 1 for 3 consecutive iterations
};

// Picard iteration of the mild form theta = G(t) theta0 - int_0^t G(t-s)
// div(u theta)(s) ds on a uniform time lattice, trapezoid in time with
// exact semigroup weights.
inline PicardResult picard_iterate(const PhysicalField &theta0, double T,
                                   int n_steps, int max_iters,
                                   const SolverConfig &cfg,
                                   double ratio_tol = 1e-10) {
  if (!(cfg.nu > 0.0) || !(cfg.alpha > 0.0))
    throw ConfigError("picard_iterate: requires nu > 0 and alpha in (0,2]");
  if (n_steps < 16) throw ConfigError("picard_iterate: n_steps must be >= 16");
  const Grid &g = theta0.grid();
  const double dt = T / n_steps;
  const double volume = g.volume();

  SpectralField th0 = forward_transform(theta0);
  const int nt = n_steps + 1;
  PicardResult res;
  res.times.resize(nt);
  for (int i = 0; i < nt; ++i) res.times[i] = i * dt;

  auto semigroup = [&](const SpectralField &f, double t) {
    return semigroup_apply(f, t, cfg.alpha, cfg.nu, cfg.eps);
  };

  std::vector<SpectralField> cur;
  cur.reserve(nt);
  for (int i = 0; i < nt; ++i) cur.push_back(semigroup(th0, res.times[i]));

  auto l2 = [&](const SpectralField &a, const SpectralField &b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
      s += std::norm(a[i] - b[i]);
    return std::sqrt(volume * s);
  };

  int bad_streak = 0;
  for (int m = 0; m < max_iters; ++m) {
    std::vector<SpectralField> nl;
    nl.reserve(nt);
    for (int i = 0; i < nt; ++i) nl.push_back(nonlinear_term(cur[i], cfg));

    std::vector<SpectralField> next;
    next.reserve(nt);
    next.push_back(cur[0]);
    for (int i = 1; i < nt; ++i) {
      SpectralField acc = semigroup(th0, res.times[i]);
      for (int j = 0; j <= i; ++j) {
        const double w = (j == 0 || j == i) ? 0.5 * dt : dt;
        SpectralField contrib = semigroup(nl[j], res.times[i] - res.times[j]);
        for (std::int64_t p = 0; p < g.size(); ++p)
          acc[p] -= w * contrib[p];
      }
      next.push_back(std::move(acc));
    }

    double diff = 0.0;
    for (int i = 0; i < nt; ++i) diff = std::max(diff, l2(next[i], cur[i]));
    res.difference_norms.push_back(diff);
    if (!res.difference_norms.empty() && res.difference_norms.size() > 1) {
      const double prev = res.difference_norms[res.difference_norms.size() - 2];
      const double ratio = prev > 0.0 ? diff / prev : 0.0;
      res.contraction_ratios.push_back(ratio);
      bad_streak = ratio > 1.0 ? bad_streak + 1 : 0;
      if (bad_streak >= 3) {
        res.diverged = true;
        cur = std::move(next);
        break;
      }
    }
    cur = std::move(next);
    if (diff <= ratio_tol) {
      res.converged = true;
      break;
    }
  }
  res.fixed_point = std::move(cur);
  return res;
}

}  // namespace cnqg
