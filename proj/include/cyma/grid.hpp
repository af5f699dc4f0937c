#pragma once

// Doubly periodic scalar fields on the unit torus [0,1)², sampled on a
// uniform n1×n2 grid. value(i, j) = f(i/n1, j/n2), axis 1 is the slow index.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cyma/detail/fftw.hpp"
#include "cyma/error.hpp"

namespace cyma {

struct TorusGrid {
  int n1 = 64;
  int n2 = 64;

  TorusGrid() = default;
  TorusGrid(int a, int b) : n1(a), n2(b) {
    if (n1 < 8 || n2 < 8 || n1 % 2 != 0 || n2 % 2 != 0)
      throw Error(Errc::InvalidGrid,
                  "grid sizes must be even and >= 8, got " + std::to_string(n1) + "x" + std::to_string(n2));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(n1) * n2; }
  double x1(int i) const noexcept { return static_cast<double>(i) / n1; }
  double x2(int j) const noexcept { return static_cast<double>(j) / n2; }
  double h1() const noexcept { return 1.0 / n1; }
  double h2() const noexcept { return 1.0 / n2; }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;
};

enum class Backend { Spectral, FD2 };

inline std::string to_string(Backend b) { return b == Backend::Spectral ? "spectral" : "fd2"; }

inline Backend backend_from_string(const std::string& s) {
  if (s == "spectral") return Backend::Spectral;
  if (s == "fd2") return Backend::FD2;
  throw Error(Errc::ParseError, "unknown backend '" + s + "'");
}

class TorusField {
 public:
  TorusField() = default;
  explicit TorusField(const TorusGrid& g, double fill = 0.0) : grid_(g), values_(g.size(), fill) {}
  TorusField(const TorusGrid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error(Errc::GridMismatch, "value count does not match grid");
  }

  template <class Fn>
  static TorusField sample(const TorusGrid& g, Fn&& f) {
    TorusField out(g);
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) out(i, j) = f(g.x1(i), g.x2(j));
    return out;
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  double& operator()(int i, int j) noexcept { return values_[static_cast<std::size_t>(i) * grid_.n2 + j]; }
  double operator()(int i, int j) const noexcept { return values_[static_cast<std::size_t>(i) * grid_.n2 + j]; }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  template <class Fn>
  TorusField map(Fn&& f) const {
    TorusField out(grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] = f(values_[k]);
    return out;
  }

  TorusField& operator+=(const TorusField& o) { return zip_assign(o, std::plus<>{}); }
  TorusField& operator-=(const TorusField& o) { return zip_assign(o, std::minus<>{}); }
  TorusField& operator*=(const TorusField& o) { return zip_assign(o, std::multiplies<>{}); }
  TorusField& operator+=(double s) {
    for (double& v : values_) v += s;
    return *this;
  }
  TorusField& operator-=(double s) { return *this += -s; }
  TorusField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
  friend TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
  friend TorusField operator*(TorusField a, const TorusField& b) { return a *= b; }
  friend TorusField operator+(TorusField a, double s) { return a += s; }
  friend TorusField operator+(double s, TorusField a) { return a += s; }
  friend TorusField operator-(TorusField a, double s) { return a -= s; }
  friend TorusField operator-(double s, TorusField a) {
    for (double& v : a.values_) v = s - v;
    return a;
  }
  friend TorusField operator*(TorusField a, double s) { return a *= s; }
  friend TorusField operator*(double s, TorusField a) { return a *= s; }
  friend TorusField operator-(TorusField a) { return a *= -1.0; }

 private:
  template <class Op>
  TorusField& zip_assign(const TorusField& o, Op op) {
    if (!(o.grid_ == grid_)) throw Error(Errc::GridMismatch, "fields live on different grids");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = op(values_[k], o.values_[k]);
    return *this;
  }

  TorusGrid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const TorusField& a, const TorusField& b) {
  if (!(a.grid() == b.grid())) throw Error(Errc::GridMismatch, "fields live on different grids");
}

inline double sup_abs(const TorusField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double min_value(const TorusField& f) { return *std::min_element(f.values().begin(), f.values().end()); }
inline double max_value(const TorusField& f) { return *std::max_element(f.values().begin(), f.values().end()); }

inline TorusField exp(const TorusField& f) {
  return f.map([](double v) { return std::exp(v); });
}

/// Mean over the grid, i.e. the integral over the unit torus. Sequential
/// summation so the result does not depend on threading.
inline double integral_mean(const TorusField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

inline TorusField project_zero_mean(const TorusField& f) {
  TorusField out = f - integral_mean(f);
  // a second pass removes the rounding residue of the first subtraction
  out -= integral_mean(out);
  return out;
}

/// Field constant along `axis` holding the mean over that axis, i.e. the
/// definite integral ∫₀¹ f dx_axis.
inline TorusField line_mean(const TorusField& f, int axis) {
  const auto& g = f.grid();
  TorusField out(g);
  if (axis == 1) {
    for (int j = 0; j < g.n2; ++j) {
      double s = 0.0;
      for (int i = 0; i < g.n1; ++i) s += f(i, j);
      s /= g.n1;
      for (int i = 0; i < g.n1; ++i) out(i, j) = s;
    }
  } else {
    for (int i = 0; i < g.n1; ++i) {
      double s = 0.0;
      for (int j = 0; j < g.n2; ++j) s += f(i, j);
      s /= g.n2;
      for (int j = 0; j < g.n2; ++j) out(i, j) = s;
    }
  }
  return out;
}

namespace detail {

inline void require_axis(int axis) {
  if (axis != 1 && axis != 2) throw Error(Errc::InvalidArgument, "axis must be 1 or 2");
}

/// Forward transform of a field, reusable for several spectral multipliers.
class Spectrum {
 public:
  explicit Spectrum(const TorusField& f)
      : grid_(f.grid()),
        fft_(RealFft2D::get(grid_.n1, grid_.n2)),
        coeffs_(fft_.spectral_size()) {
    FftwBuffer<double> in(grid_.size());
    std::copy(f.values().begin(), f.values().end(), in.data());
    fft_.forward(in, coeffs_);
  }

  const TorusGrid& grid() const noexcept { return grid_; }

  /// Apply multiplier m(k1, k2, nyquist1, nyquist2) and transform back.
  /// k1 is the signed wavenumber, k2 ∈ [0, n2/2].
  template <class Multiplier>
  TorusField apply(Multiplier&& m) const {
    const int n1 = grid_.n1, n2h = fft_.n2_half();
    FftwBuffer<fftw_complex> work(coeffs_.size());
    for (int i = 0; i < n1; ++i) {
      const int k1 = i <= n1 / 2 ? i : i - n1;
      const bool nyq1 = (2 * i == n1);
      for (int j = 0; j < n2h; ++j) {
        const bool nyq2 = (2 * j == grid_.n2);
        const std::size_t idx = static_cast<std::size_t>(i) * n2h + j;
        const std::complex<double> c(coeffs_[idx][0], coeffs_[idx][1]);
        const std::complex<double> r = c * std::complex<double>(m(k1, j, nyq1, nyq2));
        work[idx][0] = r.real();
        work[idx][1] = r.imag();
      }
    }
    FftwBuffer<double> out(grid_.size());
    fft_.backward(work, out);
    TorusField result(grid_);
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) result[k] = out[k] * scale;
    return result;
  }

 private:
  TorusGrid grid_;
  const RealFft2D& fft_;
  FftwBuffer<fftw_complex> coeffs_;
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// i·2πk with the Nyquist mode's first derivative set to zero.
inline std::complex<double> first_symbol(int k, bool nyquist) {
  return nyquist ? std::complex<double>(0.0) : std::complex<double>(0.0, kTwoPi * k);
}
inline double second_symbol(int k) { return -(kTwoPi * k) * (kTwoPi * k); }

inline TorusField fd_first(const TorusField& f, int axis) {
  const auto& g = f.grid();
  TorusField out(g);
  if (axis == 1) {
    const double s = 0.5 * g.n1;
    for (int i = 0; i < g.n1; ++i) {
      const int ip = (i + 1) % g.n1, im = (i + g.n1 - 1) % g.n1;
      for (int j = 0; j < g.n2; ++j) out(i, j) = s * (f(ip, j) - f(im, j));
    }
  } else {
    const double s = 0.5 * g.n2;
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) {
        const int jp = (j + 1) % g.n2, jm = (j + g.n2 - 1) % g.n2;
        out(i, j) = s * (f(i, jp) - f(i, jm));
      }
  }
  return out;
}

inline TorusField fd_second(const TorusField& f, int axis) {
  const auto& g = f.grid();
  TorusField out(g);
  if (axis == 1) {
    const double s = static_cast<double>(g.n1) * g.n1;
    for (int i = 0; i < g.n1; ++i) {
      const int ip = (i + 1) % g.n1, im = (i + g.n1 - 1) % g.n1;
      for (int j = 0; j < g.n2; ++j) out(i, j) = s * (f(ip, j) - 2.0 * f(i, j) + f(im, j));
    }
  } else {
    const double s = static_cast<double>(g.n2) * g.n2;
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) {
        const int jp = (j + 1) % g.n2, jm = (j + g.n2 - 1) % g.n2;
        out(i, j) = s * (f(i, jp) - 2.0 * f(i, j) + f(i, jm));
      }
  }
  return out;
}

}  // namespace detail

/// ∂f/∂x_axis (order 1) or ∂²f/∂x_axis² (order 2).
inline TorusField derivative(const TorusField& f, int axis, int order, Backend backend) {
  detail::require_axis(axis);
  if (order != 1 && order != 2) throw Error(Errc::InvalidArgument, "derivative order must be 1 or 2");
  if (backend == Backend::FD2) return order == 1 ? detail::fd_first(f, axis) : detail::fd_second(f, axis);

  const detail::Spectrum s(f);
  if (order == 1)
    return s.apply([axis](int k1, int k2, bool n1, bool n2) {
      return axis == 1 ? detail::first_symbol(k1, n1) : detail::first_symbol(k2, n2);
    });
  return s.apply([axis](int k1, int k2, bool, bool) {
    return std::complex<double>(axis == 1 ? detail::second_symbol(k1) : detail::second_symbol(k2));
  });
}

/// ∂²f/∂x₁∂x₂, as the composition of the two first derivatives.
inline TorusField mixed_derivative(const TorusField& f, Backend backend) {
  if (backend == Backend::FD2) return detail::fd_first(detail::fd_first(f, 2), 1);
  const detail::Spectrum s(f);
  return s.apply([](int k1, int k2, bool n1, bool n2) {
    return detail::first_symbol(k1, n1) * detail::first_symbol(k2, n2);
  });
}

/// All first and second derivatives of a field from a single transform.
struct Derivatives {
  TorusField d1, d2, d11, d12, d22;
};

inline Derivatives derivatives(const TorusField& f, Backend backend) {
  if (backend == Backend::FD2) {
    return {detail::fd_first(f, 1), detail::fd_first(f, 2), detail::fd_second(f, 1),
            detail::fd_first(detail::fd_first(f, 2), 1), detail::fd_second(f, 2)};
  }
  const detail::Spectrum s(f);
  using detail::first_symbol;
  using detail::second_symbol;
  return {
      s.apply([](int k1, int, bool n1, bool) { return first_symbol(k1, n1); }),
      s.apply([](int, int k2, bool, bool n2) { return first_symbol(k2, n2); }),
      s.apply([](int k1, int, bool, bool) { return std::complex<double>(second_symbol(k1)); }),
      s.apply([](int k1, int k2, bool n1, bool n2) { return first_symbol(k1, n1) * first_symbol(k2, n2); }),
      s.apply([](int, int k2, bool, bool) { return std::complex<double>(second_symbol(k2)); }),
  };
}

/// Running integral from coordinate 0 along `axis`. The zero-mean part of
/// each line is integrated spectrally (Nyquist content dropped); the line
/// mean contributes the exact ramp mean·x.
inline TorusField cumulative_integral(const TorusField& f, int axis) {
  detail::require_axis(axis);
  const auto& g = f.grid();
  const detail::Spectrum s(f);
  const TorusField primitive = s.apply([axis](int k1, int k2, bool n1, bool n2) {
    const int k = axis == 1 ? k1 : k2;
    const bool nyq = axis == 1 ? n1 : n2;
    if (k == 0 || nyq) return std::complex<double>(0.0);
    return 1.0 / std::complex<double>(0.0, detail::kTwoPi * k);
  });
  const TorusField mean = line_mean(f, axis);
  TorusField out(g);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      if (axis == 1)
        out(i, j) = primitive(i, j) - primitive(0, j) + mean(i, j) * g.x1(i);
      else
        out(i, j) = primitive(i, j) - primitive(i, 0) + mean(i, j) * g.x2(j);
    }
  return out;
}

/// Discrete sup-norms of a field and of its first and second derivatives.
struct NormReport {
  double c0 = 0, c1 = 0, c2 = 0;
};

inline NormReport sup_norms(const TorusField& f, Backend backend) {
  const Derivatives d = derivatives(f, backend);
  NormReport r;
  r.c0 = sup_abs(f);
  r.c1 = std::max(sup_abs(d.d1), sup_abs(d.d2));
  r.c2 = std::max({sup_abs(d.d11), sup_abs(d.d12), sup_abs(d.d22)});
  return r;
}

/// F = f − log(mean(e^f)), so that the integral of e^F − 1 vanishes.
inline TorusField normalize_F(const TorusField& f_raw) {
  if (!f_raw.all_finite()) throw Error(Errc::InvalidArgument, "F contains non-finite values");
  // shifted by the max so large F cannot overflow
  const TorusField g = f_raw - max_value(f_raw);
  return g - std::log(integral_mean(exp(g)));
}

}  // namespace cyma
