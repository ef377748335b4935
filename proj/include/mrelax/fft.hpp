// FFTW wrapper: cached real-to-complex plans and spectral coefficient storage.
//
// Conventions (fixed so snapshots reproduce across implementations):
//   - physical layout is x-fastest, index = ix + n*(iy + n*iz);
//   - spectral coefficients are Fourier-series coefficients, i.e. the raw
//     FFTW forward output divided by n^3, so f(x) = sum_k c_k exp(i k.x);
//   - r2c half-spectrum over x: m_x = 0..n/2, full range over y,z;
//   - wavevector k = (2*pi/L) * m with m in [-n/2, n/2).
#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mrelax/grid.hpp"

namespace mrelax {

// Half-spectrum complex coefficients of one scalar field.
struct SpectralScalar {
  Grid3 grid;
  std::vector<std::complex<double>> c;

  SpectralScalar() = default;
  explicit SpectralScalar(const Grid3& g) : grid(g), c(std::size_t(g.n) * g.n * (g.n / 2 + 1)) {}

  std::size_t nx_half() const { return std::size_t(grid.n) / 2 + 1; }
  std::size_t idx(std::size_t ixh, std::size_t iy, std::size_t iz) const {
    return ixh + nx_half() * (iy + std::size_t(grid.n) * iz);
  }
};

struct SpectralVector {
  Grid3 grid;
  std::array<SpectralScalar, 3> c;

  SpectralVector() = default;
  explicit SpectralVector(const Grid3& g) : grid(g), c{SpectralScalar(g), SpectralScalar(g), SpectralScalar(g)} {}

  SpectralScalar& operator[](int i) { return c[i]; }
  const SpectralScalar& operator[](int i) const { return c[i]; }
};

// Signed integer mode for index i on an axis of n points.
inline int mode_of(int i, int n) { return i <= n / 2 ? i : i - n; }

namespace detail {

// One set of plans per grid size, with aligned scratch buffers.  FFTW plan
// execution via the new-array interface needs matching alignment, so all
// transforms funnel through the scratch owned here.
class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    real_ = fftw_alloc_real(std::size_t(n) * n * n);
    cplx_ = fftw_alloc_complex(std::size_t(n) * n * (n / 2 + 1));
    fwd_ = fftw_plan_dft_r2c_3d(n, n, n, real_, cplx_, FFTW_MEASURE);
    bwd_ = fftw_plan_dft_c2r_3d(n, n, n, cplx_, real_, FFTW_MEASURE);
  }
  ~FftPlans() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(const double* in, std::complex<double>* out) {
    const std::size_t nr = std::size_t(n_) * n_ * n_;
    const std::size_t nc = std::size_t(n_) * n_ * (n_ / 2 + 1);
    std::copy(in, in + nr, real_);
    fftw_execute(fwd_);
    const double scale = 1.0 / double(nr);
    for (std::size_t i = 0; i < nc; ++i)
      out[i] = std::complex<double>(cplx_[i][0] * scale, cplx_[i][1] * scale);
  }

  void backward(const std::complex<double>* in, double* out) {
    const std::size_t nr = std::size_t(n_) * n_ * n_;
    const std::size_t nc = std::size_t(n_) * n_ * (n_ / 2 + 1);
    for (std::size_t i = 0; i < nc; ++i) {
      cplx_[i][0] = in[i].real();
      cplx_[i][1] = in[i].imag();
    }
    fftw_execute(bwd_);
    std::copy(real_, real_ + nr, out);
  }

 private:
  int n_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_, bwd_;
};

inline FftPlans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlans>(n)).first;
  return *it->second;
}

}  // namespace detail

inline SpectralScalar fft_forward(const ScalarField& f) {
  SpectralScalar out(f.grid);
  detail::plans_for(f.grid.n).forward(f.v.data(), out.c.data());
  return out;
}

inline ScalarField fft_backward(const SpectralScalar& s) {
  ScalarField out(s.grid);
  detail::plans_for(s.grid.n).backward(s.c.data(), out.v.data());
  return out;
}

inline SpectralVector fft_forward(const VectorField& f) {
  SpectralVector out(f.grid);
  for (int d = 0; d < 3; ++d) detail::plans_for(f.grid.n).forward(f[d].data(), out[d].c.data());
  return out;
}

inline VectorField fft_backward(const SpectralVector& s) {
  VectorField out(s.grid);
  for (int d = 0; d < 3; ++d) detail::plans_for(s.grid.n).backward(s[d].c.data(), out[d].data());
  return out;
}

// Allocation-free variants for preallocated destinations (hot loops).
inline void fft_forward_into(const VectorField& f, SpectralVector& out) {
  for (int d = 0; d < 3; ++d) detail::plans_for(f.grid.n).forward(f[d].data(), out[d].c.data());
}

inline void fft_backward_into(const SpectralVector& s, VectorField& out) {
  for (int d = 0; d < 3; ++d) detail::plans_for(s.grid.n).backward(s[d].c.data(), out[d].data());
}

// Visits every retained half-spectrum mode. fn(flat, kx, ky, kz, parseval_w)
// where parseval_w is 2 for interior x-modes duplicated by conjugate
// symmetry, else 1.
template <typename Fn>
inline void for_each_mode(const Grid3& g, Fn&& fn) {
  const int n = g.n;
  const double kb = two_pi / g.L;
  const std::size_t nxh = std::size_t(n) / 2 + 1;
  std::size_t flat = 0;
  for (int iz = 0; iz < n; ++iz) {
    const double kz = kb * mode_of(iz, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = kb * mode_of(iy, n);
      for (std::size_t ixh = 0; ixh < nxh; ++ixh, ++flat) {
        const double kx = kb * double(ixh);
        const double w = (ixh == 0 || int(ixh) == n / 2) ? 1.0 : 2.0;
        fn(flat, kx, ky, kz, w);
      }
    }
  }
}

}  // namespace mrelax
