#include <catch_amalgamated.hpp>

#include "cyma/exterior.hpp"
#include "cyma/reconstruct.hpp"
#include "cyma/solver.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cyma;
using Catch::Matchers::WithinAbs;
using oracle::kTwoPi;

namespace {

double sup_diff(const TorusField& a, const TorusField& b) { return sup_abs(a - b); }

/// Sol components evaluated straight from the closed-form expressions, with
/// every integral done by Gauss-Legendre quadrature of the analytic u.
std::array<TorusField, 4> sol_oracle(const oracle::TrigPoly& u, const FrameSpec& s, const TorusGrid& g) {
  const auto G = [&](int i, int j) { return s.G(i, j); };
  const auto H = [&](int i, int j) { return s.H(i, j); };
  const double e2 = G(2, 3) * G(2, 3) + G(2, 4) * G(2, 4);
  const auto w = [&](double x, double t) { return u(x, t, 2, 0) - u(x, t); };
  std::array<TorusField, 4> a;
  for (auto& f : a) f = TorusField(g);
  for (int i = 0; i < g.n1; ++i) {
    const double x = g.x1(i);
    const double inner =
        oracle::integrate([&](double s1) { return oracle::integrate([&](double t) { return u(s1, t); }, 0, 1, 2); }, 0, x, 2);
    const double ux_avg = oracle::integrate([&](double t) { return u(x, t, 1, 0) - u(0, t, 1, 0); }, 0, 1, 2);
    const double q = inner - ux_avg;
    const double w_full = oracle::integrate([&](double t) { return w(x, t); }, 0, 1, 2);
    for (int j = 0; j < g.n2; ++j) {
      const double y = g.x2(j);
      const double w_run = oracle::integrate([&](double t) { return w(x, t); }, 0, y, 2);
      a[0](i, j) = -(H(1, 1) * G(2, 2) * (u(x, y, 0, 1) - u(x, 0, 0, 1)) + 2 * H(4, 4) * G(4, 3) * (u(x, y) - u(x, 0))) / e2 -
                   G(1, 1) * H(2, 2) / e2 * (w_run - y * w_full);
      a[1](i, j) = -q / e2;
      a[2](i, j) = -(H(2, 2) * G(2, 3) * u(x, y, 1, 0) + H(1, 1) * G(2, 4) * u(x, y, 0, 1) -
                     H(2, 2) * (G(2, 3) - 2 * G(2, 4) * H(4, 4) * G(4, 3)) * u(x, y)) / e2 -
                   H(2, 2) * G(2, 3) / e2 * q;
      a[3](i, j) = -(H(2, 2) * G(2, 4) * u(x, y, 1, 0) - H(1, 1) * G(2, 3) * u(x, y, 0, 1) + H(2, 2) * G(2, 4) * u(x, y)) / e2 -
                   H(2, 2) * G(2, 4) / e2 * q;
    }
  }
  return a;
}

}  // namespace

TEST_CASE("nil_one_form: zero potential") {
  const auto a = nil_one_form(TorusField(TorusGrid(16, 16)), fixture::nil_frame());
  for (const auto& f : a.a) CHECK(sup_abs(f) == 0.0);
}

TEST_CASE("nil_one_form: single mode on the example frame") {
  const TorusGrid g(64, 64);
  const double eps = 0.02;
  const auto u = TorusField::sample(g, [&](double, double t) { return eps * std::cos(kTwoPi * t); });
  const auto a = nil_one_form(u, fixture::nil_frame());
  const auto expected = TorusField::sample(
      g, [&](double, double t) { return kTwoPi * eps * std::sin(kTwoPi * t) - eps * std::cos(kTwoPi * t); });
  CHECK(sup_diff(a[0], expected) <= 1e-13);
  CHECK(sup_diff(a[1], expected) <= 1e-13);
  CHECK(sup_abs(a[2]) <= 1e-15);
  CHECK(sup_abs(a[3]) <= 1e-13);
}

TEST_CASE("nil_one_form: refuses the explicit branch and foreign frames") {
  const TorusField u(TorusGrid(16, 16));
  try {
    nil_one_form(u, FrameSpec(GroupCase::NilYT, oracle::nil_explicit_G()));
    FAIL("expected ExplicitCaseG33Zero");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ExplicitCaseG33Zero);
  }
  try {
    nil_one_form(u, fixture::sol_frame());
    FAIL("expected InvalidFrame");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidFrame);
  }
}

TEST_CASE("property: reconstruction maps are linear") {
  std::mt19937_64 rng(21);
  const TorusGrid g(32, 32);
  for (int t = 0; t < 10; ++t) {
    for (GroupCase c : {GroupCase::NilYT, GroupCase::SolR}) {
      const FrameSpec s = sample_admissible(c, static_cast<std::uint64_t>(t));
      const auto u = oracle::random_trig(rng, 5, 0.1).sample(g);
      const auto v = oracle::random_trig(rng, 5, 0.1).sample(g);
      const auto au = one_form(u, s), av = one_form(v, s), auv = one_form(u + v, s);
      for (int k = 0; k < 4; ++k) CHECK(sup_diff(auv[k], au[k] + av[k]) <= 1e-12 * (1 + sup_abs(auv[k])));
    }
  }
}

TEST_CASE("sol_one_form: zero potential and the mean condition") {
  const TorusGrid g(16, 16);
  const auto a = sol_one_form(TorusField(g), fixture::sol_frame());
  for (const auto& f : a.a) CHECK(sup_abs(f) == 0.0);
  CHECK(a.periodic());
  try {
    sol_one_form(TorusField(g, 1.0), fixture::sol_frame());
    FAIL("expected NonzeroMeanU");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonzeroMeanU);
  }
}

TEST_CASE("sol_one_form: example frame against the quadrature oracle") {
  const TorusGrid g(64, 64);
  oracle::TrigPoly u;
  // ε·sin 2πx·sin 2πy = ½ε(cos 2π(x−y) − cos 2π(x+y))
  const double eps = 0.03;
  u.modes = {{1, -1, 0.5 * eps, 0}, {1, 1, -0.5 * eps, 0}};
  const auto a = sol_one_form(u.sample(g), fixture::sol_frame());
  const auto ref = sol_oracle(u, fixture::sol_frame(), g);
  for (int k = 0; k < 4; ++k) {
    INFO("a" << k + 1);
    CHECK(sup_diff(a[k], ref[k]) <= 1e-9);
  }
}

TEST_CASE("sol_one_form: sampled frames against the quadrature oracle") {
  std::mt19937_64 rng(22);
  const TorusGrid g(32, 32);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const FrameSpec s = sample_admissible(GroupCase::SolR, seed);
    const auto u = oracle::random_trig(rng, 4, 0.05);
    const auto a = sol_one_form(u.sample(g), s);
    const auto ref = sol_oracle(u, s, g);
    for (int k = 0; k < 4; ++k) CHECK(sup_diff(a[k], ref[k]) <= 1e-9 * (1 + sup_abs(ref[k])));
  }
}

TEST_CASE("system_residuals: trivial data") {
  const TorusGrid g(32, 32);
  for (const auto& spec : {fixture::nil_frame(), fixture::sol_frame()}) {
    OneFormField a;
    a.group_case = spec.group_case();
    for (auto& f : a.a) f = TorusField(g);
    const auto r0 = system_residuals(a, TorusField(g), spec, TorusField(g));
    CHECK(r0.max() == 0.0);
    const auto F = fixture::F_a(g);
    const auto r1 = system_residuals(a, TorusField(g), spec, F);
    CHECK(r1.r1_sup == 0.0);
    CHECK(r1.r2_sup == 0.0);
    CHECK(r1.r3_sup == sup_abs(1.0 - exp(F)));
    CHECK(r1.volume_ratio_error == r1.r3_sup);
  }
}

TEST_CASE("system_residuals: grid mismatch") {
  OneFormField a;
  for (auto& f : a.a) f = TorusField(TorusGrid(16, 16));
  try {
    system_residuals(a, TorusField(TorusGrid(16, 16)), fixture::nil_frame(), TorusField(TorusGrid(32, 32)));
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GridMismatch);
  }
}

TEST_CASE("property: first two equations hold for arbitrary potentials") {
  std::mt19937_64 rng(23);
  const TorusGrid g(64, 64);
  for (GroupCase c : {GroupCase::NilYT, GroupCase::SolR}) {
    for (int t = 0; t < 100; ++t) {
      const FrameSpec s = sample_admissible(c, static_cast<std::uint64_t>(1000 + t));
      const auto u = project_zero_mean(oracle::random_trig(rng, 8, 0.1).sample(g));
      const auto a = one_form(u, s);
      const auto r = system_residuals(a, u, s, TorusField(g));
      REQUIRE(r.r1_sup <= 1e-8);
      REQUIRE(r.r2_sup <= 1e-8);
    }
  }
}

TEST_CASE("property: third equation is the Monge-Ampère operator") {
  // A11A22 − A12² = E1 + E2·(third left side) for arbitrary u
  std::mt19937_64 rng(24);
  const TorusGrid g(64, 64);
  for (GroupCase c : {GroupCase::NilYT, GroupCase::SolR}) {
    for (int t = 0; t < 20; ++t) {
      const FrameSpec s = sample_admissible(c, static_cast<std::uint64_t>(2000 + t));
      const auto coeffs = coefficients(s);
      const auto u0 = project_zero_mean(oracle::random_trig(rng, 3, 1.0).sample(g));
      // shrink u until the right side is a positive density
      for (double amp = 0.1;; amp *= 0.5) {
        const TorusField u = amp * u0;
        const auto ops = operator_fields(u, coeffs, Backend::Spectral);
        const auto expF = (1.0 / coeffs.E2) * (ops.A11 * ops.A22 - ops.A12 * ops.A12 - coeffs.E1);
        if (min_value(expF) <= 0.1) continue;
        const auto F = expF.map([](double v) { return std::log(v); });
        const auto r = system_residuals(one_form(u, s), u, s, F);
        REQUIRE(r.r3_sup <= 1e-9 * (1 + sup_abs(expF)));
        REQUIRE(r.volume_ratio_error <= 1e-9 * (1 + sup_abs(expF)));
        break;
      }
    }
  }
}

TEST_CASE("round trip after solving on sampled frames") {
  for (GroupCase c : {GroupCase::NilYT, GroupCase::SolR}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const FrameSpec s = sample_admissible(c, seed);
      SolverConfig cfg;
      const auto F = fixture::F_a(cfg.grid);
      const auto sol = continuity_solve(coefficients(s), F, cfg);
      const auto a = one_form(sol.u, s);
      const auto r = system_residuals(a, sol.u, s, F);
      const double tol = c == GroupCase::NilYT ? 1e-6 : 1e-5;
      CHECK(r.max() <= tol);
      CHECK(std::abs(r.volume_ratio_error - r.r3_sup) <= 1e-6);
      if (c == GroupCase::SolR) CHECK(a.periodic());
    }
  }
}

TEST_CASE("round-trip residual decreases with resolution") {
  const FrameSpec s = fixture::nil_frame();
  auto run = [&](int n) {
    SolverConfig cfg;
    cfg.grid = TorusGrid(n, n);
    const auto F = normalize_F(TorusField::sample(cfg.grid, [](double x, double y) {
      return 0.5 * std::exp(std::sin(kTwoPi * x)) * std::cos(kTwoPi * y);
    }));
    const auto sol = continuity_solve(coefficients(s), F, cfg);
    return system_residuals(one_form(sol.u, s), sol.u, s, F).r3_sup;
  };
  const double coarse = run(16), fine = run(32);
  CHECK(fine < coarse);
}

TEST_CASE("exterior derivative of an invariant form") {
  // a = c·f⁴ on Nil: da = c·df⁴, and with the example frame f⁴ = e⁴ so df⁴ = e¹² = f¹²
  const TorusGrid g(8, 8);
  std::array<TorusField, 4> a{TorusField(g), TorusField(g), TorusField(g), TorusField(g, 2.0)};
  const auto w = exterior_derivative(a, fixture::nil_frame(), Backend::Spectral);
  CHECK(sup_diff(w.at(0, 1), TorusField(g, 2.0)) == 0.0);
  CHECK(sup_abs(w.at(0, 3)) == 0.0);
  CHECK(sup_abs(w.at(2, 3)) == 0.0);
}

TEST_CASE("nil_explicit_g33zero: examples") {
  const FrameSpec s(GroupCase::NilYT, oracle::nil_explicit_G());
  const TorusGrid g(64, 64);
  const auto zero = nil_explicit_g33zero(s, TorusField(g));
  CHECK(sup_diff(zero.p, TorusField(g, 1.0)) == 0.0);
  CHECK(sup_diff(zero.q, TorusField(g, 1.0)) == 0.0);
  CHECK(zero.report.certified());

  const auto F = normalize_F(TorusField::sample(g, [](double x, double) { return 0.4 * std::sin(kTwoPi * x); }));
  const auto sol = nil_explicit_g33zero(s, F);
  CHECK(std::abs(integral_mean(sol.p) - 1.0) <= 1e-12);
  CHECK(sol.report.product_defect == 0.0);
  CHECK(sol.report.certified());
  CHECK_THAT(sol.report.alternative_form_defect, WithinAbs(1.0, 1e-12));

  const auto raw = nil_explicit_g33zero(s, TorusField(g, 0.2));
  CHECK_FALSE(raw.report.exact);
  CHECK_FALSE(raw.report.certified());
}

TEST_CASE("nil_explicit_g33zero: only for G33 = 0") {
  try {
    nil_explicit_g33zero(fixture::nil_frame(), TorusField(TorusGrid(8, 8)));
    FAIL("expected NotExplicitCase");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotExplicitCase);
  }
}

TEST_CASE("nil_explicit_g33zero: sampled frames and random F") {
  std::mt19937_64 rng(25);
  const TorusGrid g(32, 32);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto F = normalize_F(oracle::random_trig(rng, 5, 1.0).sample(g));
    const auto sol = nil_explicit_g33zero(sample_explicit_nil(seed), F);
    CHECK(sol.report.product_defect == 0.0);
    CHECK(sol.report.exactness_defect <= 1e-12);
  }
}
