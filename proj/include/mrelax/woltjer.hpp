// Woltjer's variational problem on the torus: helical curl-eigenmode
// decomposition, the closed-form minimizer over a helicity level set, and a
// constrained gradient-descent cross-check.
#pragma once

#include "mrelax/diagnostics.hpp"

namespace mrelax {

struct HelicalParts {
  VectorField plus, minus;
};

namespace detail {

// Per-mode projectors P_pm = (I pm i khat x .)/2 acting on the half-spectrum.
template <typename Fn>
inline void for_each_helical(const Grid3& g, const SpectralVector& s, Fn&& fn) {
  const double kb = two_pi / g.L;
  const int n = g.n;
  const std::size_t nxh = std::size_t(n) / 2 + 1;
  std::size_t flat = 0;
  for (int iz = 0; iz < n; ++iz) {
    const double kz = kb * mode_of(iz, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = kb * mode_of(iy, n);
      for (std::size_t ixh = 0; ixh < nxh; ++ixh, ++flat) {
        const double kx = kb * double(ixh);
        const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
        const double w = (ixh == 0 || int(ixh) == n / 2) ? 1.0 : 2.0;
        fn(flat, kx, ky, kz, k, w);
      }
    }
  }
}

inline std::array<std::complex<double>, 3> khat_cross(double kx, double ky, double kz, double k,
                                                      const std::complex<double> b[3]) {
  return {(ky * b[2] - kz * b[1]) / k, (kz * b[0] - kx * b[2]) / k, (kx * b[1] - ky * b[0]) / k};
}

}  // namespace detail

// Split B into the two circular polarizations b_pm = (b pm i khat x b)/2,
// the curl eigenmode parts with eigenvalues pm|k|.  The mean mode is left in
// the plus part so B = plus + minus exactly.
inline HelicalParts helical_decompose(const VectorField& B) {
  require_finite(B, "helical_decompose");
  SpectralVector s = fft_forward(B);
  SpectralVector sp(B.grid), sm(B.grid);
  detail::for_each_helical(B.grid, s, [&](std::size_t f, double kx, double ky, double kz, double k, double) {
    std::complex<double> b[3] = {s[0].c[f], s[1].c[f], s[2].c[f]};
    if (k == 0.0) {
      for (int d = 0; d < 3; ++d) sp[d].c[f] = b[d];
      return;
    }
    auto c = detail::khat_cross(kx, ky, kz, k, b);
    const std::complex<double> i(0.0, 1.0);
    for (int d = 0; d < 3; ++d) {
      sp[d].c[f] = 0.5 * (b[d] + i * c[d]);
      sm[d].c[f] = 0.5 * (b[d] - i * c[d]);
    }
  });
  return {fft_backward(sp), fft_backward(sm)};
}

// Helicity from the helical spectrum: V * sum_k (|b+|^2 - |b-|^2)/|k|.
inline double helical_helicity(const VectorField& B) {
  SpectralVector s = fft_forward(B);
  const double V = B.grid.L * B.grid.L * B.grid.L;
  long double acc = 0.0L;
  detail::for_each_helical(B.grid, s, [&](std::size_t f, double kx, double ky, double kz, double k, double w) {
    if (k == 0.0) return;
    std::complex<double> b[3] = {s[0].c[f], s[1].c[f], s[2].c[f]};
    auto c = detail::khat_cross(kx, ky, kz, k, b);
    const std::complex<double> i(0.0, 1.0);
    long double p2 = 0.0L, m2 = 0.0L;
    for (int d = 0; d < 3; ++d) {
      p2 += std::norm(0.5 * (b[d] + i * c[d]));
      m2 += std::norm(0.5 * (b[d] - i * c[d]));
    }
    acc += w * (p2 - m2) / k;
  });
  return double(acc) * V;
}

struct WoltjerSolution {
  VectorField field;
  double lambda = 0;
  double E = 0;
  double H = 0;
};

// Closed-form minimizer of E at fixed helicity c: the lambda = sign(c)*lambda1
// Beltrami eigenfield scaled so helicity = c, with the canonical mode
// k = (0,0,2pi/L) and phase 0; E = lambda1*|c|.
inline WoltjerSolution woltjer_minimizer(double c, const Grid3& g) {
  WoltjerSolution sol;
  sol.field = VectorField(g);
  if (c == 0.0) return sol;
  const double lam1 = two_pi / g.L;
  const double sgn = c > 0 ? 1.0 : -1.0;
  sol.lambda = sgn * lam1;
  const double V = g.L * g.L * g.L;
  const double alpha = std::sqrt(lam1 * std::abs(c) / V);
  for (int iz = 0; iz < g.n; ++iz) {
    const double kz = lam1 * g.x(iz);
    const double cz = alpha * std::cos(kz), sz = alpha * std::sin(kz);
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        std::size_t i = g.idx(ix, iy, iz);
        sol.field[0][i] = cz;
        sol.field[1][i] = -sgn * sz;
      }
  }
  sol.E = lam1 * std::abs(c);
  sol.H = c;
  return sol;
}

struct DescentOptions {
  double tol = 1e-15;        // relative energy decrease per step that stops the loop
  double energy_floor = 1e-9;  // absolute stop for the zero-helicity case
  int max_steps = 20000;
};

struct DescentResult {
  VectorField field;
  double E = 0;
  double H = 0;
  double beltrami_residual = 0;  // ||curl B - (E/H) B|| / ||B||, 0 for tiny fields
  int steps = 0;
  bool converged = false;
};

// Gradient flow of the energy restricted to the helicity-c level set:
// B <- B - tau*(B - mu*A) with mu = H/||A||^2 (first-order helicity
// conservation), then an exact helicity restore by scaling one helical part.
// Runs entirely in spectral space; the coarse Nyquist band is dropped.
inline DescentResult constrained_descent(const VectorField& B0, double c, DescentOptions opts = {}) {
  require_finite(B0, "constrained_descent");
  const Grid3& g = B0.grid;
  const double V = g.L * g.L * g.L;
  const double lam1 = two_pi / g.L;

  SpectralVector s = fft_forward(B0);
  if (std::abs(s[0].c[0]) + std::abs(s[1].c[0]) + std::abs(s[2].c[0]) > 1e-10)
    throw std::invalid_argument("constrained_descent: field has a mean mode");

  // helical amplitudes per retained mode
  struct Mode {
    std::size_t flat;
    double k, w;
    std::complex<double> p[3], m[3];
  };
  std::vector<Mode> modes;
  const int n = g.n;
  detail::for_each_helical(g, s, [&](std::size_t f, double kx, double ky, double kz, double k, double w) {
    int mx = int(std::round(kx / (two_pi / g.L)));
    int my = int(std::round(ky / (two_pi / g.L)));
    int mz = int(std::round(kz / (two_pi / g.L)));
    if (k == 0.0 || std::abs(mx) >= n / 2 || std::abs(my) >= n / 2 || std::abs(mz) >= n / 2) return;
    std::complex<double> b[3] = {s[0].c[f], s[1].c[f], s[2].c[f]};
    if (std::norm(b[0]) + std::norm(b[1]) + std::norm(b[2]) == 0.0) return;
    auto cr = detail::khat_cross(kx, ky, kz, k, b);
    const std::complex<double> i(0.0, 1.0);
    Mode mo{f, k, w, {}, {}};
    for (int d = 0; d < 3; ++d) {
      mo.p[d] = 0.5 * (b[d] + i * cr[d]);
      mo.m[d] = 0.5 * (b[d] - i * cr[d]);
    }
    modes.push_back(mo);
  });

  auto sums = [&](double& E, double& H, double& A2, double& Hp, double& Hm) {
    long double e = 0, hp = 0, hm = 0, a2 = 0;
    for (const Mode& mo : modes) {
      long double p2 = 0, m2 = 0;
      for (int d = 0; d < 3; ++d) {
        p2 += std::norm(mo.p[d]);
        m2 += std::norm(mo.m[d]);
      }
      e += mo.w * (p2 + m2);
      hp += mo.w * p2 / mo.k;
      hm += mo.w * m2 / mo.k;
      a2 += mo.w * (p2 + m2) / (mo.k * mo.k);
    }
    E = double(e) * V;
    Hp = double(hp) * V;
    Hm = -double(hm) * V;
    H = Hp + Hm;
    A2 = double(a2) * V;
  };

  double E, H, A2, Hp, Hm;
  sums(E, H, A2, Hp, Hm);
  const double scale = std::max(E, lam1 * std::abs(c));
  if (std::abs(H - c) > 1e-6 * std::max(1.0, scale))
    throw std::invalid_argument("constrained_descent: helicity(B0) does not match the constraint");

  // exact restore of helicity to c by scaling the helical part that can
  // absorb the correction
  // H = Hp + Hm with Hp >= 0 >= Hm; scaling the plus part by sqrt(s2) moves
  // H to s2*Hp + Hm, so one part always suffices.  Prefer the part whose
  // rescale factor is <= 1 (never increases energy).
  auto scale_part = [&](bool plus, double s2, double& E_, double& H_, double& A2_, double& Hp_, double& Hm_) {
    double fac = std::sqrt(s2);
    for (Mode& mo : modes)
      for (int d = 0; d < 3; ++d) (plus ? mo.p[d] : mo.m[d]) *= fac;
    sums(E_, H_, A2_, Hp_, Hm_);
  };
  auto restore = [&](double& E_, double& H_, double& A2_, double& Hp_, double& Hm_) {
    if (H_ == c) return;
    double s2_plus = Hp_ > 0.0 ? (c - Hm_) / Hp_ : -1.0;   // scale plus part
    double s2_minus = Hm_ < 0.0 ? (c - Hp_) / Hm_ : -1.0;  // scale minus part
    if (s2_plus >= 0.0 && (s2_plus <= 1.0 || s2_minus < 0.0))
      scale_part(true, s2_plus, E_, H_, A2_, Hp_, Hm_);
    else if (s2_minus >= 0.0)
      scale_part(false, s2_minus, E_, H_, A2_, Hp_, Hm_);
  };

  double tau = 0.1 / lam1;
  DescentResult res;
  int step = 0;
  for (; step < opts.max_steps; ++step) {
    if (E <= opts.energy_floor) {
      res.converged = true;
      break;
    }
    std::vector<Mode> saved = modes;
    double mu = A2 > 0 ? H / A2 : 0.0;
    for (Mode& mo : modes) {
      double fp = 1.0 - tau * (1.0 - mu / mo.k);
      double fm = 1.0 - tau * (1.0 + mu / mo.k);
      for (int d = 0; d < 3; ++d) {
        mo.p[d] *= fp;
        mo.m[d] *= fm;
      }
    }
    double En, Hn, A2n, Hpn, Hmn;
    sums(En, Hn, A2n, Hpn, Hmn);
    restore(En, Hn, A2n, Hpn, Hmn);
    if (En > E) {
      modes = saved;
      tau *= 0.5;
      if (tau < 1e-12 / lam1) break;
      continue;
    }
    double drop = E - En;
    E = En;
    H = Hn;
    A2 = A2n;
    Hp = Hpn;
    Hm = Hmn;
    if (drop < opts.tol * std::max(E, opts.energy_floor)) {
      res.converged = true;
      break;
    }
  }

  SpectralVector out(g);
  for (const Mode& mo : modes)
    for (int d = 0; d < 3; ++d) out[d].c[mo.flat] = mo.p[d] + mo.m[d];
  res.field = fft_backward(out);
  res.E = E;
  res.H = H;
  res.steps = step;
  if (E > opts.energy_floor && std::abs(H) > 0) {
    VectorField cb = curl(res.field);
    VectorField diff = cb - (E / H) * res.field;
    res.beltrami_residual = l2_norm(diff) / l2_norm(res.field);
  }
  return res;
}

}  // namespace mrelax
