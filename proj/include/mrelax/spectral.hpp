// Periodic-box vector calculus: curl, divergence, Leray projection, vector
// potential, inner products.  Derivatives are exact in the retained modes;
// Nyquist modes are dropped from every derivative (odd-derivative
// convention), and the 2/3 rule is available for products.
#pragma once

#include <complex>

#include "mrelax/fft.hpp"
#include "mrelax/grid.hpp"

namespace mrelax {

namespace detail {
// Derivative wavenumber: Nyquist mode differentiates to zero.
inline double dk(int i, int n, double kb) {
  int m = mode_of(i, n);
  return (m == n / 2 || m == -n / 2) ? 0.0 : kb * m;
}
}  // namespace detail

// fn(flat, kx, ky, kz) with derivative-convention wavenumbers (Nyquist -> 0).
template <typename Fn>
inline void for_each_dmode(const Grid3& g, Fn&& fn) {
  const int n = g.n;
  const double kb = two_pi / g.L;
  const std::size_t nxh = std::size_t(n) / 2 + 1;
  std::size_t flat = 0;
  for (int iz = 0; iz < n; ++iz) {
    const double kz = detail::dk(iz, n, kb);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = detail::dk(iy, n, kb);
      for (std::size_t ixh = 0; ixh < nxh; ++ixh, ++flat) {
        const double kx = (int(ixh) == n / 2) ? 0.0 : kb * double(ixh);
        fn(flat, kx, ky, kz);
      }
    }
  }
}

// --- spectral-domain kernels (used by the time stepper directly) ---

inline void curl_inplace(const Grid3& g, SpectralVector& s) {
  const std::complex<double> I(0.0, 1.0);
  for_each_dmode(g, [&](std::size_t f, double kx, double ky, double kz) {
    const auto fx = s[0].c[f], fy = s[1].c[f], fz = s[2].c[f];
    s[0].c[f] = I * (ky * fz - kz * fy);
    s[1].c[f] = I * (kz * fx - kx * fz);
    s[2].c[f] = I * (kx * fy - ky * fx);
  });
}

inline SpectralVector curl_of(const Grid3& g, const SpectralVector& s) {
  SpectralVector out = s;
  curl_inplace(g, out);
  return out;
}

// Removes the gradient part; the k=0 (mean) mode is untouched.
inline void leray_inplace(const Grid3& g, SpectralVector& s) {
  for_each_dmode(g, [&](std::size_t f, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;
    const std::complex<double> kf = (kx * s[0].c[f] + ky * s[1].c[f] + kz * s[2].c[f]) / k2;
    s[0].c[f] -= kx * kf;
    s[1].c[f] -= ky * kf;
    s[2].c[f] -= kz * kf;
  });
}

// A = -lap^(-1) curl B; zero on modes with no retained derivative wavenumber.
inline SpectralVector vector_potential_of(const Grid3& g, const SpectralVector& s) {
  SpectralVector out(g);
  const std::complex<double> I(0.0, 1.0);
  for_each_dmode(g, [&](std::size_t f, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;
    const auto fx = s[0].c[f], fy = s[1].c[f], fz = s[2].c[f];
    out[0].c[f] = I * (ky * fz - kz * fy) / k2;
    out[1].c[f] = I * (kz * fx - kx * fz) / k2;
    out[2].c[f] = I * (kx * fy - ky * fx) / k2;
  });
  return out;
}

// 2/3-rule truncation of a product's spectrum.
inline void dealias_inplace(const Grid3& g, SpectralVector& s) {
  const int cut = g.n / 3;
  const int n = g.n;
  const std::size_t nxh = std::size_t(n) / 2 + 1;
  std::size_t flat = 0;
  for (int iz = 0; iz < n; ++iz) {
    const bool zc = std::abs(mode_of(iz, n)) > cut;
    for (int iy = 0; iy < n; ++iy) {
      const bool yc = zc || std::abs(mode_of(iy, n)) > cut;
      for (std::size_t ixh = 0; ixh < nxh; ++ixh, ++flat) {
        if (yc || int(ixh) > cut)
          for (int d = 0; d < 3; ++d) s[d].c[flat] = 0.0;
      }
    }
  }
}

inline void zero_mean_inplace(SpectralVector& s) {
  for (int d = 0; d < 3; ++d) s[d].c[0] = 0.0;
}

// Parseval sum of |s|^2 over the full spectrum (coefficient convention).
inline double spectral_energy_density(const Grid3& g, const SpectralVector& s) {
  long double acc = 0.0L;
  for_each_mode(g, [&](std::size_t f, double, double, double, double w) {
    for (int d = 0; d < 3; ++d) acc += w * std::norm(s[d].c[f]);
  });
  return double(acc);
}

// --- field-level operations ---

inline void require_finite(const VectorField& f, const char* who) {
  if (!f.finite()) throw std::invalid_argument(std::string(who) + ": non-finite input field");
}

inline VectorField curl(const VectorField& F) {
  require_finite(F, "curl");
  SpectralVector s = fft_forward(F);
  curl_inplace(F.grid, s);
  zero_mean_inplace(s);
  return fft_backward(s);
}

inline ScalarField divergence(const VectorField& F) {
  require_finite(F, "divergence");
  SpectralVector s = fft_forward(F);
  SpectralScalar d(F.grid);
  const std::complex<double> I(0.0, 1.0);
  for_each_dmode(F.grid, [&](std::size_t f, double kx, double ky, double kz) {
    d.c[f] = I * (kx * s[0].c[f] + ky * s[1].c[f] + kz * s[2].c[f]);
  });
  return fft_backward(d);
}

inline VectorField leray_project(const VectorField& F) {
  require_finite(F, "leray_project");
  SpectralVector s = fft_forward(F);
  leray_inplace(F.grid, s);
  return fft_backward(s);
}

// Relative spectral divergence residual ||div F||_2 / ||F||_2 (grad-norm free).
inline double divergence_residual(const VectorField& F) {
  SpectralVector s = fft_forward(F);
  long double div2 = 0.0L, f2 = 0.0L;
  const std::size_t nxh = std::size_t(F.grid.n) / 2 + 1;
  const int n = F.grid.n;
  for_each_mode(F.grid, [&](std::size_t f, double, double, double, double w) {
    for (int d = 0; d < 3; ++d) f2 += w * std::norm(s[d].c[f]);
  });
  for_each_dmode(F.grid, [&](std::size_t f, double kx, double ky, double kz) {
    const std::size_t ixh = f % nxh;
    const double w = (ixh == 0 || int(ixh) == n / 2) ? 1.0 : 2.0;
    div2 += w * std::norm(kx * s[0].c[f] + ky * s[1].c[f] + kz * s[2].c[f]);
  });
  if (f2 == 0.0L) return 0.0;
  // ||div F|| / ||F||, nondimensionalized by the base wavenumber so the
  // residual is comparable across box sizes.
  return double(sqrtl(div2 / f2)) / (two_pi / F.grid.L);
}

inline double mean_mode_magnitude(const VectorField& F) {
  SpectralVector s = fft_forward(F);
  double m = 0.0;
  for (int d = 0; d < 3; ++d) m += std::norm(s[d].c[0]);
  return std::sqrt(m);
}

inline VectorField zero_mean(const VectorField& F) {
  VectorField out = F;
  for (int d = 0; d < 3; ++d) {
    long double acc = 0.0L;
    for (double x : out[d]) acc += x;
    const double mean = double(acc / (long double)out[d].size());
    for (double& x : out[d]) x -= mean;
  }
  return out;
}

// Discrete L2 inner product h^3 * sum(F.G); trapezoid == midpoint on the
// periodic grid.  Deterministic sequential accumulation.
inline double l2_inner(const VectorField& F, const VectorField& G) {
  F.require_same_grid(G);
  long double acc = 0.0L;
  for (int d = 0; d < 3; ++d) {
    const auto& a = F[d];
    const auto& b = G[d];
    for (std::size_t i = 0; i < a.size(); ++i) acc += (long double)a[i] * b[i];
  }
  const double h = F.grid.h();
  return double(acc) * h * h * h;
}

inline double l2_norm(const VectorField& F) { return std::sqrt(l2_inner(F, F)); }

inline double max_abs(const VectorField& F) {
  double m = 0.0;
  for (int d = 0; d < 3; ++d)
    for (double x : F[d]) m = std::max(m, std::abs(x));
  return m;
}

// Coulomb-gauge vector potential on the torus; rejects fields with a mean
// mode, where helicity would be gauge-ambiguous.
inline VectorField vector_potential(const VectorField& B) {
  require_finite(B, "vector_potential");
  SpectralVector s = fft_forward(B);
  double mean2 = 0.0;
  long double tot2 = 0.0L;
  for (int d = 0; d < 3; ++d) mean2 += std::norm(s[d].c[0]);
  for_each_mode(B.grid, [&](std::size_t f, double, double, double, double w) {
    for (int d = 0; d < 3; ++d) tot2 += w * std::norm(s[d].c[f]);
  });
  if (tot2 > 0.0L && std::sqrt(mean2) > 1e-10 * std::sqrt(double(tot2)))
    throw std::invalid_argument("vector_potential: field has a nonzero mean mode");
  return fft_backward(vector_potential_of(B.grid, s));
}

}  // namespace mrelax
