#pragma once

// Thin RAII layer over FFTW's 2D real transforms. Plans are created once per
// grid shape under a lock (the FFTW planner is not thread-safe); execution
// uses the new-array interface, which is.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>

namespace cyma::detail {

template <class T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!data_) throw std::bad_alloc();
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  FftwBuffer(FftwBuffer&& o) noexcept : n_(std::exchange(o.n_, 0)), data_(std::exchange(o.data_, nullptr)) {}
  ~FftwBuffer() { fftw_free(data_); }

  T* data() noexcept { return data_; }
  const T* data() const noexcept { return data_; }
  std::size_t size() const noexcept { return n_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

 private:
  std::size_t n_;
  T* data_;
};

class RealFft2D {
 public:
  RealFft2D(int n1, int n2) : n1_(n1), n2_(n2) {
    FftwBuffer<double> r(static_cast<std::size_t>(n1) * n2);
    FftwBuffer<fftw_complex> c(spectral_size());
    forward_ = fftw_plan_dft_r2c_2d(n1, n2, r.data(), c.data(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_2d(n1, n2, c.data(), r.data(), FFTW_ESTIMATE);
  }
  RealFft2D(const RealFft2D&) = delete;
  RealFft2D& operator=(const RealFft2D&) = delete;
  ~RealFft2D() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  int n2_half() const noexcept { return n2_ / 2 + 1; }
  std::size_t spectral_size() const noexcept { return static_cast<std::size_t>(n1_) * (n2_ / 2 + 1); }

  void forward(FftwBuffer<double>& in, FftwBuffer<fftw_complex>& out) const {
    fftw_execute_dft_r2c(forward_, in.data(), out.data());
  }
  /// Unnormalized inverse; destroys `in`.
  void backward(FftwBuffer<fftw_complex>& in, FftwBuffer<double>& out) const {
    fftw_execute_dft_c2r(backward_, in.data(), out.data());
  }

  static const RealFft2D& get(int n1, int n2) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<RealFft2D>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n1, n2}];
    if (!slot) slot = std::make_unique<RealFft2D>(n1, n2);
    return *slot;
  }

 private:
  int n1_, n2_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace cyma::detail
