// cnqg: pseudo-spectral simulator and verification CLI for the compressible
// nonlocal dissipative quasi-geostrophic model
//   d_t theta + div(u theta) + nu Lambda^alpha theta = 0,  u = R theta.
//
// Subcommands: run, property-suite, oracle-compare, blowup-probe, decay-fit.
// Exit codes: 0 success, 1 runtime error, 2 config error, 3 blowup suspected,
// 4 numerical blowup, 5 check failures.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cnqg/cnqg.hpp"
#include "json.hpp"

namespace {

using namespace cnqg;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowupSuspected = 3;
constexpr int kExitNumericalBlowup = 4;
constexpr int kExitChecksFailed = 5;

// Shared CLI override flags; only values the user actually passed are applied
// on top of the config file, so file < flag precedence holds per key.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> nu, alpha, eps;
  std::optional<std::string> scheme;
  std::optional<int> trials;
  std::optional<std::string> only;
  std::optional<std::string> window;  // "a:b"
};

void add_common_flags(CLI::App *cmd, Overrides &ov) {
  cmd->add_option("--config", ov.config_path, "key=value config file");
  cmd->add_option("--seed", ov.seed, "RNG seed override");
  cmd->add_option("--out", ov.out, "output directory override");
  cmd->add_option("--nu", ov.nu, "dissipation coefficient override");
  cmd->add_option("--alpha", ov.alpha, "dissipation order override");
  cmd->add_option("--eps", ov.eps, "regularization viscosity override");
  cmd->add_option("--scheme", ov.scheme, "if-euler | etdrk2");
  cmd->add_option("--trials", ov.trials, "randomized trial count");
  cmd->add_option("--only", ov.only, "run only checks whose name contains this");
  cmd->add_option("--window", ov.window, "fit window as a:b");
}

RunManifest build_manifest(const Overrides &ov) {
  RunManifest m;
  if (ov.config_path) {
    m = parse_config(*ov.config_path);
  } else {
    m.solver.dt_max = m.solver.t_end / 200.0;
  }
  if (ov.seed) apply_config_entry(m, "seed", std::to_string(*ov.seed));
  if (ov.out) m.out_dir = *ov.out;
  if (ov.nu) m.solver.nu = *ov.nu;
  if (ov.alpha) m.solver.alpha = *ov.alpha;
  if (ov.eps) m.solver.eps = *ov.eps;
  if (ov.scheme) apply_config_entry(m, "scheme", *ov.scheme);
  if (ov.trials) m.trials = *ov.trials;
  if (ov.window) {
    const auto colon = ov.window->find(':');
    if (colon == std::string::npos)
      throw ConfigError("--window expects a:b");
    m.window_a = detail::parse_double("window", ov.window->substr(0, colon));
    m.window_b = detail::parse_double("window", ov.window->substr(colon + 1));
  }
  validate_manifest(m);
  std::filesystem::create_directories(m.out_dir);
  return m;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// series.csv per record: t, l2, l4, linf, mass, grad_linf, hs_<alpha/2>,
// energy_residual (integrated energy balance relative to t = 0).
void write_series_csv(const std::string &path,
                      const std::vector<TrajectoryRecord> &traj,
                      const SolverConfig &cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "'");
  const double s = 0.5 * cfg.alpha;
  os << "t,l2,l4,linf,mass,grad_linf,hs_" << s << ",energy_residual\n";
  const double inf = std::numeric_limits<double>::infinity();
  double integral = 0.0, prev_diss = 0.0, l2sq0 = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto &rec = traj[i];
    SpectralField F = forward_transform(rec.theta);
    const double l2 = diagnostics::lp_norm(rec.theta, 2.0);
    const double diss = (s > 0.0) ? diagnostics::hs_norm(F, s) : l2;
    const double grad = diagnostics::lp_norm(
        inverse_transform_unchecked(gradient(F)), inf);
    if (i == 0) {
      l2sq0 = l2 * l2;
    } else {
      integral +=
          0.5 * (rec.t - prev_t) * (diss * diss + prev_diss * prev_diss);
    }
    prev_diss = diss;
    prev_t = rec.t;
    const double residual = l2 * l2 + 2.0 * cfg.nu * integral - l2sq0;
    os << g17(rec.t) << ',' << g17(l2) << ','
       << g17(diagnostics::lp_norm(rec.theta, 4.0)) << ','
       << g17(diagnostics::lp_norm(rec.theta, inf)) << ','
       << g17(diagnostics::mass(rec.theta)) << ',' << g17(grad) << ','
       << g17(diss) << ',' << g17(residual) << '\n';
  }
}

int status_exit_code(RunStatus st) {
  switch (st) {
    case RunStatus::Completed: return kExitOk;
    case RunStatus::BlowupSuspected: return kExitBlowupSuspected;
    case RunStatus::NumericalBlowup: return kExitNumericalBlowup;
  }
  return kExitError;
}

int cmd_run(const Overrides &ov) {
  RunManifest m = build_manifest(ov);
  PhysicalField theta0 = m.build_initial_data();
  RunResult res = run(theta0, m.solver);

  write_series_csv(m.out_dir + "/series.csv", res.records, m.solver);
  if (m.checkpoint_every > 0) {
    int idx = 0;
    for (std::size_t i = 0; i < res.records.size();
         i += static_cast<std::size_t>(m.checkpoint_every), ++idx) {
      Checkpoint cp{theta0.grid(), m.solver.alpha, m.solver.nu, m.solver.eps,
                    res.records[i].t, res.records[i].theta};
      save_checkpoint(m.out_dir + "/checkpoint_" + std::to_string(idx) +
                          ".cnqg",
                      cp);
    }
  }
  if (!res.records.empty()) {
    const auto &last = res.records.back();
    Checkpoint cp{theta0.grid(), m.solver.alpha, m.solver.nu, m.solver.eps,
                  last.t, last.theta};
    save_checkpoint(m.out_dir + "/final.cnqg", cp);
  }

  json summary;
  summary["status"] = res.status == RunStatus::Completed ? "completed"
                      : res.status == RunStatus::BlowupSuspected
                          ? "blowup-suspected"
                          : "numerical-blowup";
  summary["steps"] = res.steps;
  summary["records"] = res.records.size();
  summary["t_final"] = res.records.empty() ? 0.0 : res.records.back().t;
  summary["message"] = res.message;
  std::ofstream(m.out_dir + "/summary.json") << summary.dump(2) << '\n';

  std::cout << "run: " << summary["status"].get<std::string>() << " after "
            << res.steps << " steps\n";
  return status_exit_code(res.status);
}

struct SuiteCheck {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  bool pass() const { return worst <= tol; }
};

int cmd_property_suite(const Overrides &ov) {
  RunManifest m = build_manifest(ov);
  const std::string only = ov.only.value_or("");
  std::vector<SuiteCheck> checks;
  auto wants = [&](const std::string &name) {
    return only.empty() || name.find(only) != std::string::npos;
  };
  std::mt19937_64 seeds(m.seed);

  const Grid g = Grid::uniform(2, 64, 2.0 * std::numbers::pi);

  if (wants("div-riesz-identity")) {
    SuiteCheck c{"div-riesz-identity", 0.0, 1e-10};
    for (int t = 0; t < m.trials; ++t) {
      PhysicalField f = random_smooth(g, seeds(), 1.0);
      SpectralField F = forward_transform(f);
      SpectralField lhs = divergence(riesz_transform(F));
      SpectralField rhs = fractional_laplacian(F, 1.0);
      double worst = 0.0;
      for (std::int64_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
      c.worst = std::max(c.worst, worst / std::max(F.max_abs(), 1e-300));
    }
    checks.push_back(c);
  }
  if (wants("parseval")) {
    SuiteCheck c{"parseval", 0.0, 1e-12};
    for (int t = 0; t < m.trials; ++t) {
      PhysicalField f = random_smooth(g, seeds(), 1.0);
      const double a = diagnostics::lp_norm(f, 2.0);
      const double b = diagnostics::l2_norm_spectral(forward_transform(f));
      c.worst = std::max(c.worst, std::abs(a - b) / a);
    }
    checks.push_back(c);
  }
  if (wants("pointwise-lemma")) {
    SuiteCheck c{"pointwise-lemma", 0.0, 0.0};
    std::uniform_real_distribution<double> s_dist(0.1, 2.0);
    std::uniform_real_distribution<double> p_dist(2.0, 6.0);
    for (int t = 0; t < m.trials; ++t) {
      PhysicalField f = random_smooth_positive(g, seeds(), 1.0);
      auto rep = diagnostics::pointwise_lemma_check(f, s_dist(seeds),
                                                    p_dist(seeds));
      c.worst = std::max(c.worst, rep.worst_violation);
      c.tol = std::max(c.tol, rep.tolerance);
    }
    checks.push_back(c);
  }
  if (wants("semigroup-composition")) {
    SuiteCheck c{"semigroup-composition", 0.0, 1e-12};
    std::uniform_real_distribution<double> t_dist(0.01, 0.5);
    for (int t = 0; t < m.trials; ++t) {
      PhysicalField f = random_smooth(g, seeds(), 1.0);
      SpectralField F = forward_transform(f);
      const double t1 = t_dist(seeds), t2 = t_dist(seeds);
      SpectralField a = semigroup_apply(
          semigroup_apply(F, t1, m.solver.alpha, m.solver.nu, m.solver.eps),
          t2, m.solver.alpha, m.solver.nu, m.solver.eps);
      SpectralField b = semigroup_apply(F, t1 + t2, m.solver.alpha, m.solver.nu,
                                        m.solver.eps);
      double worst = 0.0;
      for (std::int64_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
      c.worst = std::max(c.worst, worst / std::max(F.max_abs(), 1e-300));
    }
    checks.push_back(c);
  }
  if (wants("mollify-mass")) {
    SuiteCheck c{"mollify-mass", 0.0, 1e-12};
    for (int t = 0; t < m.trials; ++t) {
      PhysicalField f = random_smooth_positive(g, seeds(), 1.0);
      PhysicalField mf = mollify(f, 0.5);
      const double a = diagnostics::mass(f), b = diagnostics::mass(mf);
      c.worst = std::max(c.worst, std::abs(a - b) / std::abs(a));
    }
    checks.push_back(c);
  }

  json summary = json::array();
  bool all_pass = true;
  for (const auto &c : checks) {
    all_pass = all_pass && c.pass();
    std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name
              << "  worst=" << g17(c.worst) << "  tol=" << g17(c.tol) << '\n';
    summary.push_back({{"name", c.name},
                       {"worst", c.worst},
                       {"tolerance", c.tol},
                       {"pass", c.pass()}});
  }
  std::ofstream(m.out_dir + "/property_suite.json") << summary.dump(2) << '\n';
  if (checks.empty()) {
    std::cerr << "property-suite: no checks matched --only filter\n";
    return kExitConfig;
  }
  return all_pass ? kExitOk : kExitChecksFailed;
}

int cmd_oracle_compare(const Overrides &ov) {
  RunManifest m = build_manifest(ov);
  const Grid g = Grid::uniform(m.dim, m.modes, m.length);
  PhysicalField f = compact_bump(g, m.amplitude,
                                 std::min(m.width, 0.2 * m.length));
  SpectralField F = forward_transform(f);
  oracle::QuadratureSpec spec;

  std::ofstream os(m.out_dir + "/oracle_compare.csv", std::ios::trunc);
  os << "operator,param,interior_rel_l2_error\n";
  bool all_pass = true;

  auto interior_rel = [&](const PhysicalField &a, const PhysicalField &b) {
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      if (!oracle::is_interior(g, i, spec.interior_margin)) continue;
      for (int c = 0; c < a.components(); ++c) {
        num += (a(c, i) - b(c, i)) * (a(c, i) - b(c, i));
        den += b(c, i) * b(c, i);
      }
    }
    return std::sqrt(num / den);
  };

  const double alpha = m.solver.alpha;
  {
    PhysicalField spectral =
        inverse_transform_unchecked(fractional_laplacian(F, alpha));
    PhysicalField quad = oracle::lambda_alpha_quadrature(f, alpha, spec);
    const double err = interior_rel(quad, spectral);
    os << "lambda_alpha," << g17(alpha) << ',' << g17(err) << '\n';
    std::cout << (err <= 0.05 ? "PASS" : "FAIL")
              << " lambda_alpha rel_err=" << g17(err) << '\n';
    all_pass = all_pass && err <= 0.05;
  }
  {
    PhysicalField spectral =
        inverse_transform_unchecked(riesz_transform(F));
    PhysicalField quad = oracle::riesz_quadrature(f, spec);
    const double err = interior_rel(quad, spectral);
    os << "riesz,0," << g17(err) << '\n';
    std::cout << (err <= 0.05 ? "PASS" : "FAIL")
              << " riesz rel_err=" << g17(err) << '\n';
    all_pass = all_pass && err <= 0.05;
  }
  return all_pass ? kExitOk : kExitChecksFailed;
}

int cmd_blowup_probe(const Overrides &ov) {
  RunManifest m = build_manifest(ov);
  m.solver.nu = 0.0;  // the virial identity is inviscid
  PhysicalField theta0 = m.build_initial_data();
  if (theta0.values().empty() ||
      *std::max_element(theta0.values().begin(), theta0.values().end()) >
          1e-12 * theta0.max_abs())
    throw ConfigError("blowup-probe: initial data must satisfy theta0 <= 0");

  RunResult res = run(theta0, m.solver);
  oracle::QuadratureSpec spec;
  if (m.modes > 64) spec.subsample = m.modes / 64;
  auto probe = diagnostics::virial_probe(res.records, spec);

  std::ofstream os(m.out_dir + "/virial.csv", std::ios::trunc);
  os << "t,w,j,dwdt,identity_residual\n";
  for (std::size_t i = 0; i < probe.times.size(); ++i) {
    os << g17(probe.times[i]) << ',' << g17(probe.w[i]) << ','
       << g17(probe.j[i]);
    if (i >= 1 && i - 1 < probe.dwdt.size())
      os << ',' << g17(probe.dwdt[i - 1]) << ','
         << g17(probe.identity_residual[i - 1]);
    else
      os << ",,";
    os << '\n';
  }
  std::cout << "blowup-probe: " << probe.times.size() << " samples, lower bound "
            << (probe.lower_bound_ok ? "holds" : "VIOLATED") << '\n';
  if (!probe.lower_bound_ok) return kExitChecksFailed;
  return status_exit_code(res.status);
}

int cmd_decay_fit(const Overrides &ov) {
  RunManifest m = build_manifest(ov);
  PhysicalField theta0 = m.build_initial_data();
  RunResult res = run(theta0, m.solver);
  if (res.status != RunStatus::Completed) return status_exit_code(res.status);

  const double t_a = m.window_a;
  const double t_b = m.window_b > 0.0 ? m.window_b : m.solver.t_end;
  std::ofstream os(m.out_dir + "/decay_fit.csv", std::ios::trunc);
  os << "quantity,fitted_exponent,expected_exponent,r2,note\n";
  std::vector<double> times;
  for (const auto &rec : res.records) times.push_back(rec.t);
  const int dim = theta0.grid().dim();
  const std::string note =
      dim == 2 ? "outside-theorem-hypotheses-N2" : "";

  struct Item {
    const char *name;
    diagnostics::DecayQuantity q;
    double p;
  };
  for (const Item &item : {Item{"l2", diagnostics::DecayQuantity::L2, 2.0},
                           Item{"l4", diagnostics::DecayQuantity::Lp, 4.0},
                           Item{"grad_l2", diagnostics::DecayQuantity::GradL2,
                                2.0}}) {
    auto series = diagnostics::fluctuation_series(res.records, item.q, item.p);
    auto fit = diagnostics::decay_fit(times, series, t_a, t_b);
    fit.expected = diagnostics::expected_decay_exponent(item.q, dim,
                                                        m.solver.alpha, item.p);
    std::string flag = note;
    if (fit.r2 < 0.9) flag += (flag.empty() ? "" : ";") +
                              std::string("poor-fit-non-algebraic");
    os << item.name << ',' << g17(fit.exponent) << ',' << g17(fit.expected)
       << ',' << g17(fit.r2) << ',' << flag << '\n';
    std::cout << "decay-fit " << item.name << ": fitted=" << g17(fit.exponent)
              << " expected=" << g17(fit.expected) << " r2=" << g17(fit.r2)
              << (flag.empty() ? "" : "  [" + flag + "]") << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"cnqg: nonlocal dissipative quasi-geostrophic toolbox"};
  app.require_subcommand(1);

  Overrides ov;
  auto *c_run = app.add_subcommand("run", "time-step a configured problem");
  auto *c_prop = app.add_subcommand("property-suite",
                                    "randomized operator identity checks");
  auto *c_oracle = app.add_subcommand(
      "oracle-compare", "spectral operators vs direct singular integrals");
  auto *c_blow =
      app.add_subcommand("blowup-probe", "virial identity and moment bound");
  auto *c_decay =
      app.add_subcommand("decay-fit", "fit algebraic decay exponents");
  for (CLI::App *c : {c_run, c_prop, c_oracle, c_blow, c_decay})
    add_common_flags(c, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(ov);
    if (c_prop->parsed()) return cmd_property_suite(ov);
    if (c_oracle->parsed()) return cmd_oracle_compare(ov);
    if (c_blow->parsed()) return cmd_blowup_probe(ov);
    if (c_decay->parsed()) return cmd_decay_fit(ov);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalBlowupError &e) {
    std::cerr << "numerical blowup: " << e.what() << '\n';
    return kExitNumericalBlowup;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
