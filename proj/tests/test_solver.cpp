#include "catch2/catch_amalgamated.hpp"
#include "cnqg/cnqg.hpp"

using namespace cnqg;

namespace {

double mass_of(const PhysicalField &f) { return diagnostics::mass(f); }

double max_coeff_diff(const SpectralField &a, const SpectralField &b) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.grid().size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("mollifier preserves mass, constants and nonnegativity") {
  const Grid g = Grid::uniform(2, 48, 20.0);
  PhysicalField f = gaussian_bump(g, 1.0, 1.5);
  PhysicalField mf = mollify(f, 2.0);
  CHECK(std::abs(mass_of(mf) - mass_of(f)) < 1e-12 * std::abs(mass_of(f)));
  CHECK(mf.min_value() > -1e-12);

  PhysicalField c(g, 1);
  for (double &v : c.values()) v = 2.0;
  PhysicalField mc = mollify(c, 2.0);
  for (std::int64_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(mc[i] - 2.0) < 1e-12);

  CHECK_THROWS_AS(mollify(f, 0.1 * g.min_spacing()), UnderResolvedMollifier);
}

TEST_CASE("nonlinear term is mean-free in divergence form") {
  const Grid g = Grid::uniform(2, 32, 10.0);
  SolverConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    PhysicalField f = random_smooth(g, 500 + trial, 1.0);
    SpectralField nl = nonlinear_term(forward_transform(f), cfg);
    CHECK(std::abs(nl[0]) < 1e-14 * std::max(nl.max_abs(), 1.0));
  }
}

TEST_CASE("divergence and advective forms of the nonlinearity agree") {
  // random_smooth is band-limited well inside the 2/3 cutoff, so the
  // product aliases land entirely in the removed band and the two forms
  // coincide to roundoff.
  const Grid g = Grid::uniform(2, 32, 10.0);
  SolverConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    PhysicalField f = random_smooth(g, 900 + trial, 1.0);
    SpectralField F = forward_transform(f);
    SpectralField a = nonlinear_term(F, cfg);
    SpectralField b = nonlinear_term_advective(F, cfg);
    CHECK(max_coeff_diff(a, b) < 1e-12 * std::max(a.max_abs(), 1.0));
  }
}

TEST_CASE("with the nonlinearity disabled a step is the exact semigroup") {
  const Grid g = Grid::uniform(2, 32, 7.0);
  PhysicalField f = random_smooth(g, 11, 1.0);
  SpectralField F = forward_transform(f);
  SolverConfig cfg;
  cfg.nonlinear = false;
  for (Scheme s : {Scheme::IfEuler, Scheme::Etdrk2}) {
    cfg.scheme = s;
    SpectralField stepped = step(F, cfg.dt_max, cfg);
    SpectralField exact =
        semigroup_apply(F, cfg.dt_max, cfg.alpha, cfg.nu, cfg.eps);
    CHECK(max_coeff_diff(stepped, exact) < 1e-12 * F.max_abs());

    // 100 composed steps equal one long semigroup application.
    SpectralField many = F;
    for (int i = 0; i < 100; ++i) many = step(many, cfg.dt_max, cfg);
    SpectralField once =
        semigroup_apply(F, 100 * cfg.dt_max, cfg.alpha, cfg.nu, cfg.eps);
    CHECK(max_coeff_diff(many, once) < 1e-12 * F.max_abs());
  }
}

TEST_CASE("positive constants are exact equilibria for alpha > 0") {
  const Grid g = Grid::uniform(2, 32, 5.0);
  PhysicalField c(g, 1);
  for (double &v : c.values()) v = 1.7;
  SpectralField F = forward_transform(c);
  SolverConfig cfg;
  SpectralField next = step(F, cfg.dt_max, cfg);
  CHECK(max_coeff_diff(next, F) < 1e-14 * F.max_abs());

  // alpha = 0 damps the mean too: Lambda^0 is the identity.
  cfg.alpha = 0.0;
  cfg.nonlinear = false;
  next = step(F, cfg.dt_max, cfg);
  CHECK(std::abs(next[0] - std::exp(-cfg.nu * cfg.dt_max) * F[0]) < 1e-14);
}

TEST_CASE("mean is conserved over a nonlinear run") {
  const Grid g = Grid::uniform(2, 48, 12.0);
  PhysicalField f = random_smooth_positive(g, 21, 1.0);
  SolverConfig cfg;
  cfg.t_end = 0.3;
  cfg.record_every = 10;
  const double m0 = mass_of(f);
  RunResult r = run(f, cfg);
  REQUIRE(r.status == RunStatus::Completed);
  for (const auto &rec : r.records)
    CHECK(std::abs(mass_of(rec.theta) - m0) < 1e-12 * std::abs(m0));
}

TEST_CASE("oversized steps are rejected") {
  const Grid g = Grid::uniform(2, 32, 5.0);
  PhysicalField f = random_smooth(g, 3, 1.0);
  SpectralField F = forward_transform(f);
  SolverConfig cfg;
  CHECK_THROWS_AS(step(F, 2.0 * cfg.dt_max, cfg), StepTooLarge);

  // Large amplitude makes the CFL bound bite below dt_max.
  PhysicalField big = random_smooth(g, 3, 500.0);
  CHECK_THROWS_AS(step(forward_transform(big), cfg.dt_max, cfg), StepTooLarge);
}

TEST_CASE("solver config validation rejects out-of-range parameters") {
  SolverConfig cfg;
  cfg.alpha = 2.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.nu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dealias_fraction = 0.4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dt_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run records at the requested cadence with increasing times") {
  const Grid g = Grid::uniform(2, 32, 8.0);
  PhysicalField f = random_smooth_positive(g, 8, 0.5);
  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.record_every = 5;
  RunResult r = run(f, cfg);
  REQUIRE(r.status == RunStatus::Completed);
  REQUIRE(r.records.size() >= 2);
  CHECK(r.records.front().t == 0.0);
  CHECK(std::abs(r.records.back().t - cfg.t_end) < 1e-12);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i].t > r.records[i - 1].t);
    CHECK(r.records[i].dt > 0.0);
    CHECK(r.records[i].u_max >= 0.0);
  }
}

TEST_CASE("a draconian tail threshold trips the resolution monitor") {
  const Grid g = Grid::uniform(2, 32, 8.0);
  PhysicalField f = random_smooth_positive(g, 4, 2.0);
  SolverConfig cfg;
  cfg.t_end = 0.5;
  cfg.tail_energy_fraction = 1e-30;
  RunResult r = run(f, cfg);
  CHECK(r.status == RunStatus::BlowupSuspected);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("clip_negative keeps the solution nonnegative") {
  const Grid g = Grid::uniform(2, 32, 10.0);
  PhysicalField f = gaussian_bump(g, 1.0, 1.0);
  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.clip_negative = true;
  cfg.record_every = 5;
  RunResult r = run(f, cfg);
  REQUIRE(r.status == RunStatus::Completed);
  CHECK(r.records.back().theta.min_value() >= -1e-12);
}

TEST_CASE("tail energy fraction separates smooth from rough spectra") {
  const Grid g = Grid::uniform(1, 32, 5.0);
  SpectralField low(g, 1);
  low[1] = 0.5;
  low[g.size() - 1] = 0.5;  // conjugate pair at |k-alias| = 1
  CHECK(tail_energy_fraction(low) == 0.0);
  SpectralField high(g, 1);
  high[12] = 0.5;  // alias 12 > (2/3) * 16
  high[g.size() - 12] = 0.5;
  CHECK(tail_energy_fraction(high) == 1.0);
}

TEST_CASE("Picard iteration: zero data is an exact fixed point") {
  const Grid g = Grid::uniform(1, 64, 10.0);
  PhysicalField zero(g, 1);
  SolverConfig cfg;
  PicardResult pr = picard_iterate(zero, 0.5, 16, 5, cfg);
  CHECK(pr.converged);
  CHECK(pr.difference_norms.front() <= 1e-14);
}

TEST_CASE("Picard iteration contracts and matches the stepped solution") {
  const Grid g = Grid::uniform(1, 64, 20.0);
  PhysicalField f = gaussian_bump(g, 0.2, 2.0);
  SolverConfig cfg;
  cfg.alpha = 1.5;
  cfg.nu = 0.2;
  const double T = 0.2;
  PicardResult pr = picard_iterate(f, T, 32, 12, cfg);
  REQUIRE(pr.contraction_ratios.size() >= 2);
  for (double r : pr.contraction_ratios) CHECK(r < 1.0);
  CHECK_FALSE(pr.diverged);

  cfg.dt_max = T / 32;
  cfg.t_end = T;
  cfg.record_every = 1000;
  RunResult rr = run(f, cfg);
  REQUIRE(rr.status == RunStatus::Completed);
  SpectralField at_t = forward_transform(rr.records.back().theta);
  const double diff = max_coeff_diff(pr.fixed_point.back(), at_t);
  // Both discretizations are first order in their time lattice.
  CHECK(diff < 5e-3 * at_t.max_abs());
}

TEST_CASE("Picard iteration rejects degenerate configurations") {
  const Grid g = Grid::uniform(1, 32, 5.0);
  PhysicalField f = gaussian_bump(g, 0.1, 1.0);
  SolverConfig cfg;
  cfg.nu = 0.0;
  CHECK_THROWS_AS(picard_iterate(f, 0.1, 16, 4, cfg), ConfigError);
  cfg = {};
  CHECK_THROWS_AS(picard_iterate(f, 0.1, 8, 4, cfg), ConfigError);
}
