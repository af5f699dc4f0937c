#pragma once

// Invariant 2-forms on the 4-dimensional Lie groups, expanded in the
// orthonormal coframe (f^k). Used to build Ω + da from the structure
// equations directly, independent of the component systems.

#include <array>
#include <utility>
#include <vector>

#include "cyma/frames.hpp"
#include "cyma/grid.hpp"

namespace cyma {

/// de^l = Σ coeff·e^p∧e^q (0-based indices).
struct StructureTerm {
  int l, p, q;
  double coeff;
};

struct StructureData {
  std::vector<StructureTerm> de;
  std::array<int, 2> base;  ///< dX₁ = e^{base[0]}, dX₂ = e^{base[1]}
};

/// Nil³×ℝ: de⁴ = e¹², base coordinates (y, t) with dy = e¹, dt = e³.
/// Sol³×ℝ: de³ = e¹³, de⁴ = −e¹⁴, base coordinates (x, y) with dx = e¹, dy = e².
inline StructureData structure_data(GroupCase c) {
  if (c == GroupCase::NilYT) return {{{3, 0, 1, 1.0}}, {0, 2}};
  return {{{2, 0, 2, 1.0}, {3, 0, 3, -1.0}}, {0, 1}};
}

/// Six component fields w[i][j], i < j, of a 2-form Σ w_ij f^i∧f^j.
class TwoFormField {
 public:
  explicit TwoFormField(const TorusGrid& g) {
    for (auto& row : w_)
      for (auto& f : row) f = TorusField(g);
  }

  TorusField& at(int i, int j) { return w_[i][j]; }
  const TorusField& at(int i, int j) const { return w_[i][j]; }

  /// Adds c·f^i∧f^j, folding i > j by antisymmetry.
  void add(int i, int j, const TorusField& c, double s = 1.0) {
    if (i == j) return;
    if (i > j) {
      std::swap(i, j);
      s = -s;
    }
    w_[i][j] += s * c;
  }
  void add_constant(int i, int j, double s) {
    if (i == j) return;
    if (i > j) {
      std::swap(i, j);
      s = -s;
    }
    w_[i][j] += s;
  }

  /// Ratio (w∧w)/(f¹²³⁴-volume), i.e. 2·Pf(w).
  TorusField square_density() const {
    return 2.0 * (w_[0][1] * w_[2][3] - w_[0][2] * w_[1][3] + w_[0][3] * w_[1][2]);
  }

 private:
  std::array<std::array<TorusField, 4>, 4> w_;
};

/// da for a = a_k f^k, with a_k functions of the base coordinates only.
inline TwoFormField exterior_derivative(const std::array<TorusField, 4>& a, const FrameSpec& spec,
                                        Backend backend) {
  const auto& grid = a[0].grid();
  const StructureData sd = structure_data(spec.group_case());
  const Mat4& G = spec.G();
  const Mat4& H = spec.H();
  TwoFormField w(grid);
  for (int k = 0; k < 4; ++k) {
    require_same_grid(a[k], a[0]);
    // d(a_k) ∧ f^k
    for (int axis = 0; axis < 2; ++axis) {
      const TorusField da = derivative(a[k], axis + 1, 1, backend);
      const int m = sd.base[axis];
      for (int j = 0; j < 4; ++j)
        if (G[m][j] != 0.0) w.add(j, k, da, G[m][j]);
    }
    // a_k · df^k, with f^k = H^k_l e^l
    for (const auto& t : sd.de) {
      const double hk = H[k][t.l] * t.coeff;
      if (hk == 0.0) continue;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double s = hk * G[t.p][i] * G[t.q][j];
          if (s != 0.0) w.add(i, j, a[k], s);
        }
    }
  }
  return w;
}

/// The invariant symplectic form in the adapted coframe: Nil f¹⁴ + f²³, Sol f¹² + f³⁴.
inline void add_symplectic_form(TwoFormField& w, GroupCase c) {
  if (c == GroupCase::NilYT) {
    w.add_constant(0, 3, 1.0);
    w.add_constant(1, 2, 1.0);
  } else {
    w.add_constant(0, 1, 1.0);
    w.add_constant(2, 3, 1.0);
  }
}

/// (Ω + da)² / Ω², pointwise.
inline TorusField volume_ratio(const std::array<TorusField, 4>& a, const FrameSpec& spec, Backend backend) {
  TwoFormField w = exterior_derivative(a, spec, backend);
  add_symplectic_form(w, spec.group_case());
  return 0.5 * w.square_density();
}

}  // namespace cyma
