#include <catch_amalgamated.hpp>

#include "cyma/solver.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cyma;
using Catch::Matchers::WithinAbs;
using oracle::kTwoPi;

namespace {

double sup_diff(const TorusField& a, const TorusField& b) { return sup_abs(a - b); }

/// Random admissible coefficients from a sampled frame of either case.
MACoefficients random_coeffs(std::uint64_t seed) {
  const GroupCase c = seed % 2 ? GroupCase::SolR : GroupCase::NilYT;
  return coefficients(sample_admissible(c, seed));
}

SolverConfig config(int n = 64, Backend b = Backend::Spectral) {
  SolverConfig cfg;
  cfg.grid = TorusGrid(n, n);
  cfg.backend = b;
  return cfg;
}

}  // namespace

TEST_CASE("operator_fields: zero potential gives the constants") {
  const auto c = random_coeffs(3);
  const TorusField u(TorusGrid(16, 16));
  const auto a = operator_fields(u, c, Backend::Spectral);
  CHECK(sup_diff(a.A11, TorusField(u.grid(), c.C11)) == 0.0);
  CHECK(sup_diff(a.A12, TorusField(u.grid(), c.C12)) == 0.0);
  CHECK(sup_diff(a.A22, TorusField(u.grid(), c.C22)) == 0.0);
}

TEST_CASE("operator_fields: single mode on the Nil example") {
  const TorusGrid g(64, 64);
  const double eps = 0.01;
  const auto u = TorusField::sample(g, [&](double, double y) { return eps * std::sin(kTwoPi * y); });
  const auto a = operator_fields(u, fixture::nil_coeffs(), Backend::Spectral);
  CHECK(sup_diff(a.A11, TorusField(g, 2.0)) <= 1e-13);
  CHECK(sup_abs(a.A12) <= 1e-13);
  const auto a22 = TorusField::sample(g, [&](double, double y) {
    return 1 - kTwoPi * kTwoPi * eps * std::sin(kTwoPi * y) + kTwoPi * eps * std::cos(kTwoPi * y);
  });
  CHECK(sup_diff(a.A22, a22) <= 1e-12);
}

TEST_CASE("operator_fields: shifting C11 shifts A11") {
  std::mt19937_64 rng(1);
  const auto u = oracle::random_trig(rng, 5, 0.1).sample(TorusGrid(32, 32));
  auto c = random_coeffs(4);
  const auto a = operator_fields(u, c, Backend::Spectral);
  c.C11 += 0.25;
  const auto b = operator_fields(u, c, Backend::Spectral);
  CHECK(sup_diff(b.A11 - a.A11, TorusField(u.grid(), 0.25)) <= 1e-14 * (1 + sup_abs(a.A11)));
  CHECK(sup_diff(b.A22, a.A22) == 0.0);
}

TEST_CASE("residual: examples") {
  const TorusGrid g(64, 64);
  const auto F = fixture::F_a(g);
  const TorusField zero(g);
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    CHECK(sup_abs(residual(zero, c, F, 0.0, Backend::Spectral)) <= 1e-14);
    CHECK(sup_diff(residual(zero, c, F, 1.0, Backend::Spectral), c.E2 * (1.0 - exp(F))) <= 1e-14);
  }
}

TEST_CASE("residual: unnormalized F is refused") {
  const TorusGrid g(16, 16);
  try {
    residual(TorusField(g), fixture::nil_coeffs(), TorusField(g, 0.5), 0.5, Backend::Spectral);
    FAIL("expected UnnormalizedF");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnnormalizedF);
  }
}

TEST_CASE("property: the residual integrates to zero") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> tau(0, 1);
  const TorusGrid g(64, 64);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_coeffs(static_cast<std::uint64_t>(t));
    const auto u = oracle::random_trig(rng, 10, 0.05).sample(g);
    const auto F = normalize_F(oracle::random_trig(rng, 4, 0.5).sample(g));
    const auto a = operator_fields(u, c, Backend::Spectral);
    const double scale = 1 + std::abs(c.C11 * c.C22) + c.E1 + c.E2;
    REQUIRE(std::abs(integral_mean(a.A11 * a.A22 - a.A12 * a.A12) - (c.E1 + c.E2)) <= 1e-9 * scale);
    REQUIRE(std::abs(integral_mean(residual(u, c, F, tau(rng), Backend::Spectral))) <= 1e-10 * scale);
  }
}

TEST_CASE("ellipticity: examples") {
  const TorusGrid g(32, 32);
  const auto e = ellipticity(TorusField(g), fixture::nil_coeffs(), Backend::Spectral);
  CHECK(e.min_a11 == 2.0);
  CHECK(e.min_a22 == 1.0);
  TorusField spike(g);
  spike(5, 7) = 10.0;
  const auto s = ellipticity(spike, fixture::nil_coeffs(), Backend::Spectral);
  CHECK(s.min_a11 < 0);
  CHECK(s.min_a22 < 0);
  CHECK_FALSE(s.positive());
}

TEST_CASE("apply_jacobian: constant-coefficient example") {
  const TorusGrid g(64, 64);
  const auto w = TorusField::sample(g, [](double x, double) { return std::sin(kTwoPi * x); });
  const auto lw = apply_jacobian(TorusField(g), w, fixture::nil_coeffs(), Backend::Spectral);
  CHECK(sup_diff(lw, -kTwoPi * kTwoPi * w) <= 1e-11);
  CHECK(sup_abs(apply_jacobian(w, TorusField(g), fixture::nil_coeffs(), Backend::Spectral)) == 0.0);
}

TEST_CASE("property: exact Jacobian matches central differences") {
  std::mt19937_64 rng(3);
  const TorusGrid g(32, 32);
  const double h = 1e-5;
  for (int t = 0; t < 50; ++t) {
    const auto c = random_coeffs(static_cast<std::uint64_t>(100 + t));
    const auto v = oracle::random_trig(rng, 4, 0.05).sample(g);
    const auto w = oracle::random_trig(rng, 4, 1.0).sample(g);
    const auto F = normalize_F(oracle::random_trig(rng, 3, 0.3).sample(g));
    const auto tp = residual(v + h * w, c, F, 0.7, Backend::Spectral);
    const auto tm = residual(v - h * w, c, F, 0.7, Backend::Spectral);
    const auto fd = (1.0 / (2 * h)) * (tp - tm);
    const auto lw = apply_jacobian(v, w, c, Backend::Spectral);
    REQUIRE(sup_diff(fd, lw) <= 1e-6 * sup_abs(lw));
  }
}

TEST_CASE("apply_jacobian: shifted operator matches its formula") {
  std::mt19937_64 rng(4);
  const TorusGrid g(32, 32);
  const auto c = random_coeffs(9);
  const auto v = oracle::random_trig(rng, 4, 0.05).sample(g);
  const auto w = oracle::random_trig(rng, 4, 1.0).sample(g);
  const auto a = operator_fields(v, c, Backend::Spectral);
  const auto d = derivatives(w, Backend::Spectral);
  const auto p11 = a.A22 + c.C22, p12 = a.A12 + c.C12, p22 = a.A11 + c.C11;
  const auto ref = p11 * d.d11 - 2.0 * p12 * d.d12 + p22 * d.d22 +
                   (c.B11 * p11 - 2.0 * c.B12 * p12 + c.B22 * p22) * d.d2 + c.D * p11 * w;
  CHECK(sup_diff(apply_jacobian(v, w, c, Backend::Spectral, JacobianMode::Shifted), ref) <= 1e-10 * sup_abs(ref));
}

TEST_CASE("newton_step: a solution is a fixed point") {
  const auto c = fixture::nil_coeffs();
  const auto cfg = config(32);
  const auto F = fixture::F_a(cfg.grid);
  const auto sol = continuity_solve(c, F, cfg);
  const auto [next, stats] = newton_step(sol.u, c, F, 1.0, cfg);
  CHECK(stats.residual_before <= cfg.newton_tol);
  CHECK(stats.step == 1.0);
  CHECK(sup_diff(next, sol.u) <= cfg.newton_tol);
}

TEST_CASE("newton_step: contracts the residual by 10x at small tau") {
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    const auto cfg = config(64);
    const auto F = fixture::F_a(cfg.grid);
    const TorusField u0(cfg.grid);
    const auto [u1, stats] = newton_step(u0, c, F, 0.125, cfg);
    CHECK(stats.residual_after <= 0.1 * stats.residual_before);
    CHECK(std::abs(integral_mean(u1)) <= 1e-15);
  }
}

TEST_CASE("newton_step: non-elliptic iterate violates the contract") {
  const auto cfg = config(32);
  TorusField spike(cfg.grid);
  spike(3, 3) = 10.0;
  try {
    newton_step(spike, fixture::nil_coeffs(), fixture::F_a(cfg.grid), 0.5, cfg);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
}

TEST_CASE("SolverConfig: invalid settings are rejected") {
  SolverConfig c;
  c.tau_steps = 0;
  CHECK_THROWS_AS(c.check(), Error);
  c = SolverConfig{};
  c.newton_tol = 0;
  CHECK_THROWS_AS(c.check(), Error);
  c = SolverConfig{};
  c.line_search.shrink = 1.0;
  CHECK_THROWS_AS(c.check(), Error);
}

TEST_CASE("continuity_solve: zero data needs no Newton work") {
  const auto cfg = config(32);
  const auto r = continuity_solve(fixture::nil_coeffs(), TorusField(cfg.grid), cfg);
  CHECK(sup_abs(r.u) == 0.0);
  CHECK(r.report.total_newton_iterations() == 0);
  CHECK(r.report.stages.size() == static_cast<std::size_t>(cfg.tau_steps + 1));
}

TEST_CASE("continuity_solve: worked examples converge") {
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    const auto cfg = config(64);
    const auto r = continuity_solve(c, fixture::F_a(cfg.grid), cfg);
    const auto& rep = r.report;
    CHECK(rep.final_residual_sup <= 1e-10);
    CHECK(std::abs(rep.u_mean) <= 1e-15);
    CHECK(rep.min_a11 > 0);
    CHECK(rep.min_a22 > 0);
    CHECK(rep.min_C11_plus_Du > 0);
    CHECK(rep.c2_within_bound);
    CHECK(rep.stages.back().tau == 1.0);
    for (const auto& s : rep.stages) {
      CHECK(s.min_a11 > 0);
      CHECK(s.min_a22 > 0);
    }
  }
}

TEST_CASE("continuity_solve: rejects bad inputs") {
  const auto cfg = config(32);
  MACoefficients bad = fixture::nil_coeffs();
  bad.E2 = 0;
  CHECK_THROWS_AS(continuity_solve(bad, TorusField(cfg.grid), cfg), Error);
  try {
    continuity_solve(fixture::nil_coeffs(), TorusField(TorusGrid(16, 16)), cfg);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GridMismatch);
  }
  try {
    continuity_solve(fixture::nil_coeffs(), TorusField(cfg.grid, 0.1), cfg);
    FAIL("expected UnnormalizedF");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnnormalizedF);
  }
}

TEST_CASE("continuity_solve: step underflow reports the last good state") {
  auto cfg = config(32);
  cfg.newton_tol = 1e-30;
  cfg.max_newton = 1;
  try {
    continuity_solve(fixture::nil_coeffs(), fixture::F_a(cfg.grid), cfg);
    FAIL("expected HomotopyFailed");
  } catch (const HomotopyFailure& e) {
    CHECK(e.code() == Errc::HomotopyFailed);
    CHECK(e.last_tau() == 0.0);
    CHECK(sup_abs(e.last_u()) == 0.0);
  }
}

TEST_CASE("continuity_solve: schedule independence") {
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    auto a = config(64), b = config(64);
    a.tau_steps = 4;
    b.tau_steps = 16;
    const auto F = fixture::F_a(a.grid);
    CHECK(sup_diff(continuity_solve(c, F, a).u, continuity_solve(c, F, b).u) <= 1e-8);
  }
}

TEST_CASE("continuity_solve: shifted operator reaches the same solution") {
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    auto exact = config(64), shifted = config(64);
    shifted.jacobian_mode = JacobianMode::Shifted;
    shifted.max_newton = 200;
    const auto F = fixture::F_a(exact.grid);
    const auto a = continuity_solve(c, F, exact);
    const auto b = continuity_solve(c, F, shifted);
    CHECK(b.report.final_residual_sup <= 1e-10);
    CHECK(sup_diff(a.u, b.u) <= 1e-8);
    CHECK(b.report.total_newton_iterations() > a.report.total_newton_iterations());
  }
}

TEST_CASE("continuity_solve: manufactured solution is recovered") {
  for (const auto& c : {fixture::nil_coeffs(), fixture::sol_coeffs()}) {
    const auto cfg = config(64);
    const auto m = fixture::manufactured(c, 0.005, cfg.grid);
    REQUIRE(m.F.has_value());
    CHECK(std::abs(m.mean_expF - 1.0) <= 1e-13);
    const auto r = continuity_solve(c, *m.F, cfg);
    CHECK(sup_diff(r.u, m.u_star.sample(cfg.grid)) <= 1e-10);
  }
}

TEST_CASE("continuity_solve: FD2 and spectral solutions differ at second order") {
  const auto c = fixture::nil_coeffs();
  auto gap = [&](int n) {
    const auto s = continuity_solve(c, fixture::F_a(TorusGrid(n, n)), config(n, Backend::Spectral));
    const auto f = continuity_solve(c, fixture::F_a(TorusGrid(n, n)), config(n, Backend::FD2));
    // compare on the coarse grid points
    const int stride = n / 64;
    double m = 0;
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) m = std::max(m, std::abs(s.u(i * stride, j * stride) - f.u(i * stride, j * stride)));
    return m;
  };
  const double ratio = gap(64) / gap(128);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("continuity_solve: bitwise reproducible") {
  const auto cfg = config(32);
  const auto F = fixture::F_a(cfg.grid);
  const auto a = continuity_solve(fixture::sol_coeffs(), F, cfg);
  const auto b = continuity_solve(fixture::sol_coeffs(), F, cfg);
  CHECK(a.u.values() == b.u.values());
}

TEST_CASE("apriori_bound: examples") {
  CHECK_THAT(apriori_bound(fixture::nil_coeffs()), WithinAbs(2 * std::exp(2.0) + 3, 1e-12));
  CHECK_THAT(apriori_bound(fixture::nil_coeffs()), WithinAbs(17.778, 1e-3));
  CHECK(apriori_bound(fixture::sol_coeffs()) == 4.0);
  MACoefficients c{3, 1, 0, 2, 0, 5, 0, 1, 1, GroupCase::NilYT};
  CHECK(apriori_bound(c) == 7.0);
}
