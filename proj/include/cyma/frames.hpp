#pragma once

// Invariant almost-Kähler frame data on T²-bundles over the 2-torus.
//
// A frame is the 4×4 matrix G with G^i_j = g(e^i, f^j), relating the
// structure coframe (e^i) of the Lie group to an orthonormal adapted coframe
// (f^j). Rows index e, columns index f. Accessors are 1-based to match the
// index notation used throughout the formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cyma/error.hpp"

namespace cyma {

enum class GroupCase {
  NilYT,  ///< Nil³×ℝ, fibration onto the (y,t) torus, non-Lagrangian.
  SolR,   ///< Sol³×ℝ.
};

inline std::string to_string(GroupCase c) { return c == GroupCase::NilYT ? "nil_yt" : "sol_r"; }

inline GroupCase group_case_from_string(const std::string& s) {
  if (s == "nil_yt") return GroupCase::NilYT;
  if (s == "sol_r") return GroupCase::SolR;
  throw Error(Errc::ParseError, "unknown group case '" + s + "'");
}

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline double max_abs(const Mat4& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

inline Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Inverse of a 4×4 matrix by Gauss-Jordan elimination with partial pivoting.
/// Throws SingularMatrix if |det G| < 1e-14·‖G‖max⁴.
inline Mat4 invert_frame(const Mat4& g) {
  const double scale = max_abs(g);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::SingularMatrix, "zero or non-finite matrix");

  std::array<std::array<double, 8>, 4> a{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = g[i][j];
    a[i][4 + i] = 1.0;
  }
  double det = 1.0;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    const double p = a[col][col];
    det *= p;
    if (p == 0.0) break;
    for (double& v : a[col]) v /= p;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 8; ++j) a[r][j] -= f * a[col][j];
    }
  }
  if (std::abs(det) < 1e-14 * std::pow(scale, 4))
    throw Error(Errc::SingularMatrix, "|det G| = " + std::to_string(std::abs(det)) + " below threshold");

  Mat4 h{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h[i][j] = a[i][4 + j];
  return h;
}

/// Frame data in adapted form. H is always derived from G.
class FrameSpec {
 public:
  FrameSpec(GroupCase c, const Mat4& g) : case_(c), g_(g), h_(invert_frame(g)) {}

  GroupCase group_case() const noexcept { return case_; }
  const Mat4& G() const noexcept { return g_; }
  const Mat4& H() const noexcept { return h_; }

  /// G^i_j, 1-based.
  double G(int i, int j) const { return g_[i - 1][j - 1]; }
  /// H^i_j, 1-based.
  double H(int i, int j) const { return h_[i - 1][j - 1]; }

  friend bool operator==(const FrameSpec& a, const FrameSpec& b) {
    return a.case_ == b.case_ && a.g_ == b.g_;
  }

 private:
  GroupCase case_;
  Mat4 g_;
  Mat4 h_;
};

struct Violation {
  std::string constraint;
  double value;      ///< Evaluated left-hand side (on the normalized copy for frames).
  double tolerance;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  void fail(std::string name, double value, double tol) {
    violations.push_back({std::move(name), value, tol});
    valid = false;
  }
  bool has_violation(const std::string& fragment) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.constraint.find(fragment) != std::string::npos; });
  }
};

inline constexpr double kFrameTolerance = 1e-10;
inline constexpr double kDegenerateE2Warning = 1e-12;

namespace detail {

struct ConstraintChecker {
  ValidationReport& report;
  double tol;

  void zero(const std::string& name, double v) {
    if (!(std::abs(v) <= tol)) report.fail(name, v, tol);
  }
  void nonzero(const std::string& name, double v) {
    if (!(std::abs(v) > tol)) report.fail(name, v, tol);
  }
  void nonnegative(const std::string& name, double v) {
    if (!(v >= -tol)) report.fail(name, v, tol);
  }
  void positive(const std::string& name, double v) {
    if (!(v > tol)) report.fail(name, v, tol);
  }
};

}  // namespace detail

/// Evaluates every algebraic constraint of the adapted frame for its case.
/// Problems are reported, never thrown (except SingularMatrix from inversion,
/// which FrameSpec construction already surfaced).
inline ValidationReport validate(const FrameSpec& spec) {
  ValidationReport report;
  const double scale = max_abs(spec.G());
  Mat4 gn = spec.G();
  for (auto& row : gn)
    for (double& v : row) v /= scale;
  const Mat4 hn = invert_frame(gn);
  auto G = [&](int i, int j) { return gn[i - 1][j - 1]; };
  auto H = [&](int i, int j) { return hn[i - 1][j - 1]; };

  detail::ConstraintChecker check{report, kFrameTolerance};

  if (spec.group_case() == GroupCase::NilYT) {
    check.nonzero("G¹₁ ≠ 0", G(1, 1));
    check.zero("G¹₂ = 0", G(1, 2));
    check.zero("G¹₃ = 0", G(1, 3));
    check.zero("G¹₄ = 0", G(1, 4));
    check.zero("G³₂ = 0", G(3, 2));
    check.nonnegative("G³₃G³₄ ≥ 0", G(3, 3) * G(3, 4));
    check.nonzero("non-Lagrangian G³₄ ≠ 0", G(3, 4));
    check.zero("G³₃H³₄ + G³₄H⁴₄ = 0", G(3, 3) * H(3, 4) + G(3, 4) * H(4, 4));
    check.zero("H²₄G²₂ + H³₄G²₃ = 0", H(2, 4) * G(2, 2) + H(3, 4) * G(2, 3));
    check.zero("H²₄G²₄ = 0", H(2, 4) * G(2, 4));
    check.zero("H³₄G²₄ = 0", H(3, 4) * G(2, 4));
    check.zero("G²₄ = 0", G(2, 4));
  } else {
    check.positive("G¹₁ > 0", G(1, 1));
    check.zero("H¹₂ = 0", H(1, 2));
    check.zero("H¹₃ = 0", H(1, 3));
    check.zero("H¹₄ = 0", H(1, 4));
    check.zero("H²₁ = 0", H(2, 1));
    check.zero("H³₁ = 0", H(3, 1));
    check.zero("H³₂ = 0", H(3, 2));
    check.zero("H³₄ = 0", H(3, 4));
    check.zero("H⁴₁ = 0", H(4, 1));
    check.zero("H⁴₂ = 0", H(4, 2));
    check.zero("G³₄ = 0", G(3, 4));
    check.zero("H²₄G²₂ + H⁴₄G²₄ = 0", H(2, 4) * G(2, 2) + H(4, 4) * G(2, 4));
    check.zero("H³₃G⁴₃ + H⁴₃G⁴₄ = 0", H(3, 3) * G(4, 3) + H(4, 3) * G(4, 4));

    const double e2 = spec.G(2, 3) * spec.G(2, 3) + spec.G(2, 4) * spec.G(2, 4);
    if (e2 <= kDegenerateE2Warning)
      report.warnings.push_back("(G²₃)² + (G²₄)² = " + std::to_string(e2) +
                                ": E₂ degenerates, Monge-Ampère reduction unavailable");
  }
  return report;
}

/// Deterministic generator of admissible frames (test data).
inline FrameSpec sample_admissible(GroupCase c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto magnitude = [&](double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  };
  auto signed_magnitude = [&](double lo, double hi) {
    const double m = magnitude(lo, hi);
    return std::bernoulli_distribution(0.5)(rng) ? m : -m;
  };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    Mat4 g{};
    if (c == GroupCase::NilYT) {
      g[0] = {magnitude(0.5, 2.0), 0.0, 0.0, 0.0};
      g[1] = {unit(rng), signed_magnitude(0.5, 2.0), unit(rng), 0.0};
      const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      g[2] = {unit(rng), 0.0, sign * magnitude(0.3, 2.0), sign * magnitude(0.3, 2.0)};
      g[3] = {unit(rng), unit(rng), unit(rng), signed_magnitude(0.5, 2.0)};
    } else {
      Mat4 h{};
      h[0] = {magnitude(0.5, 2.0), 0.0, 0.0, 0.0};
      h[1] = {0.0, signed_magnitude(0.5, 2.0), unit(rng), unit(rng)};
      h[2] = {0.0, 0.0, signed_magnitude(0.5, 2.0), 0.0};
      h[3] = {0.0, 0.0, unit(rng), signed_magnitude(0.5, 2.0)};
      g = invert_frame(h);
      if (g[1][2] * g[1][2] + g[1][3] * g[1][3] < 0.1) continue;
    }
    try {
      FrameSpec spec(c, g);
      if (max_abs(spec.H()) > 10.0) continue;
      if (validate(spec).valid) return spec;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(Errc::ExhaustedRetries, "no admissible frame after 1000 draws");
}

/// Admissible NilYT frame with G³₃ = 0 (the explicitly solvable branch).
inline FrameSpec sample_explicit_nil(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Mat4 g{};
    g[0] = {mag(rng), 0.0, 0.0, 0.0};
    g[1] = {unit(rng), mag(rng), unit(rng), 0.0};
    g[2] = {unit(rng), 0.0, 0.0, mag(rng)};
    g[3] = {unit(rng), unit(rng), mag(rng), unit(rng)};
    try {
      FrameSpec spec(GroupCase::NilYT, g);
      if (max_abs(spec.H()) > 10.0) continue;
      if (validate(spec).valid) return spec;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(Errc::ExhaustedRetries, "no explicit-case frame after 1000 draws");
}

}  // namespace cyma
