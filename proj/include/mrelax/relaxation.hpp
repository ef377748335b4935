// Energy-decreasing, helicity-preserving relaxation: the viscous perfectly
// conducting MHD system and the inertia-free instantaneous variant, with
// per-component frozen-in transport under the shared velocity.
#pragma once

#include <functional>

#include "mrelax/woltjer.hpp"

namespace mrelax {

struct RelaxationState {
  ComponentFields components;
  VectorField v;
  double t = 0;
  double rho = 1;
  double mu = 1;
};

inline DiagnosticsRecord record(const RelaxationState& s) {
  return diagnose(s.t, s.components, s.v, s.rho);
}

enum class Scheme { moffatt, vallis };

struct RunConfig {
  Scheme scheme = Scheme::moffatt;
  double t_end = 5.0;
  double cfl = 0.4;
  int record_every = 50;
  double rho = 1.0;
  double mu = 1.0;

  void validate() const {
    if (!(t_end > 0)) throw std::invalid_argument("RunConfig: t_end must be positive");
    // the RK4 stability region reaches ~2.8 on the imaginary axis, which for
    // the dealiased band kmax = (n/3) 2pi/L leaves the Courant edge above 1
    if (!(cfl > 0 && cfl <= 1.0)) throw std::invalid_argument("RunConfig: cfl must be in (0, 1]");
    if (!(rho > 0) || !(mu > 0)) throw std::invalid_argument("RunConfig: rho and mu must be positive");
    if (record_every < 1) throw std::invalid_argument("RunConfig: record_every must be >= 1");
  }
};

// curl(B) x B computed pointwise with the product dealiased by the 2/3 rule.
inline VectorField lorentz_force(const VectorField& B) {
  VectorField J = curl(B);
  const Grid3& g = B.grid;
  VectorField F(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    F[0][i] = J[1][i] * B[2][i] - J[2][i] * B[1][i];
    F[1][i] = J[2][i] * B[0][i] - J[0][i] * B[2][i];
    F[2][i] = J[0][i] * B[1][i] - J[1][i] * B[0][i];
  }
  SpectralVector s = fft_forward(F);
  dealias_inplace(g, s);
  return fft_backward(s);
}

// 0.4 * min(advective, Alfven, viscous) bound; the factor matches the
// RunConfig cfl default and the precondition of the single-step operations.
inline double stable_dt(const RelaxationState& s) {
  const Grid3& g = s.components.grid;
  const double h = g.h();
  double dt = s.rho * h * h / (6.0 * s.mu);
  double vmax = max_abs(s.v);
  if (vmax > 0) dt = std::min(dt, h / vmax);
  double bmax = max_abs(s.components.total());
  if (bmax > 0) dt = std::min(dt, h * std::sqrt(s.rho) / bmax);
  return 0.4 * dt;
}

namespace detail {

// Spectral mirror of the evolving state so a step costs only the transforms
// of the nonlinear terms.
struct SpectralState {
  Grid3 g;
  SpectralVector v;
  std::vector<SpectralVector> B;
  double t = 0;

  static SpectralState from(const RelaxationState& s) {
    SpectralState out;
    out.g = s.components.grid;
    out.v = fft_forward(s.v);
    for (const auto& b : s.components.components) out.B.push_back(fft_forward(b));
    out.t = s.t;
    return out;
  }

  bool finite() const {
    auto ok = [](const SpectralVector& x) {
      for (int d = 0; d < 3; ++d)
        for (const auto& c : x[d].c)
          if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
      return true;
    };
    if (!ok(v)) return false;
    for (const auto& b : B)
      if (!ok(b)) return false;
    return true;
  }
};

struct Rhs {
  SpectralVector v;
  std::vector<SpectralVector> B;
};

struct MaxNorms {
  double vmax = 0;
  double bmax = 0;
};

inline double phys_max_abs(const VectorField& f) { return max_abs(f); }

// Right-hand-side evaluator and RK4 steppers with persistent scratch, so a
// step performs only the unavoidable transforms and fused array passes.
//
// moffatt: dv/dt = P[(J x B)/rho - w x v] (- nu k^2 v when the viscous term
// is in the RHS rather than handled by the integrating factor),
// dB_k/dt = curl(v x B_k).  The rotational advection form differs from
// v.grad v by a gradient, which the projection removes.  vallis: v is the
// instantaneous P[J x B]/mu, recomputed per stage; only the induction terms
// are advanced and the velocity is purely diagnostic.
class Stepper {
 public:
  Stepper(const Grid3& g, Scheme scheme, double rho, double mu, std::size_t K,
          bool viscous_in_rhs)
      : g_(g), scheme_(scheme), rho_(rho), mu_(mu), viscous_(viscous_in_rhs),
        B_(g), J_(g), w_(g), v_(g), F_(g), sT_(g) {
    Bk_.assign(K, VectorField(g));
    for (Rhs* r : {&k1_, &k2_, &k3_, &k4_}) {
      r->v = SpectralVector(g);
      r->B.assign(K, SpectralVector(g));
    }
    u_.g = g;
    u_.v = SpectralVector(g);
    u_.B.assign(K, SpectralVector(g));
  }

  Scheme scheme() const { return scheme_; }

  // Computes the vallis velocity for the current state of su in place;
  // reports the max norms of v and the total field.
  MaxNorms refresh_velocity(SpectralState& su) {
    spectral_total(su, sT_);
    fft_backward_into(sT_, B_);
    curl_inplace(g_, sT_);
    fft_backward_into(sT_, J_);
    cross_into(J_, B_, F_);
    fft_forward_into(F_, su.v);
    dealias_inplace(g_, su.v);
    leray_inplace(g_, su.v);
    zero_mean_inplace(su.v);
    scale(su.v, 1.0 / mu_);
    fft_backward_into(su.v, v_);
    MaxNorms n;
    n.vmax = phys_max_abs(v_);
    n.bmax = phys_max_abs(B_);
    return n;
  }

  MaxNorms max_norms(const SpectralState& su) {
    spectral_total(su, sT_);
    fft_backward_into(sT_, B_);
    fft_backward_into(su.v, v_);
    MaxNorms n;
    n.vmax = phys_max_abs(v_);
    n.bmax = phys_max_abs(B_);
    return n;
  }

  void rhs(SpectralState& su, Rhs& out, bool v_fresh = false) {
    const std::size_t K = su.B.size();
    for (std::size_t k = 0; k < K; ++k) fft_backward_into(su.B[k], Bk_[k]);

    if (scheme_ == Scheme::vallis) {
      // refresh_velocity leaves v_ populated; when the caller already
      // refreshed (for the dt bound) v_ is current too.
      if (!v_fresh) refresh_velocity(su);
    } else {
      spectral_total(su, sT_);
      curl_inplace(g_, sT_);
      fft_backward_into(sT_, J_);
      curl_of_into(su.v, sT_);
      fft_backward_into(sT_, w_);
      fft_backward_into(su.v, v_);
      physical_total(B_);
      const std::size_t nn = g_.size();
      for (std::size_t i = 0; i < nn; ++i) {
        F_[0][i] = (J_[1][i] * B_[2][i] - J_[2][i] * B_[1][i]) / rho_ -
                   (w_[1][i] * v_[2][i] - w_[2][i] * v_[1][i]);
        F_[1][i] = (J_[2][i] * B_[0][i] - J_[0][i] * B_[2][i]) / rho_ -
                   (w_[2][i] * v_[0][i] - w_[0][i] * v_[2][i]);
        F_[2][i] = (J_[0][i] * B_[1][i] - J_[1][i] * B_[0][i]) / rho_ -
                   (w_[0][i] * v_[1][i] - w_[1][i] * v_[0][i]);
      }
      fft_forward_into(F_, out.v);
      dealias_inplace(g_, out.v);
      leray_inplace(g_, out.v);
      zero_mean_inplace(out.v);
      if (viscous_) {
        const double nu = mu_ / rho_;
        for_each_dmode(g_, [&](std::size_t f, double kx, double ky, double kz) {
          const double k2 = kx * kx + ky * ky + kz * kz;
          for (int d = 0; d < 3; ++d) out.v[d].c[f] -= nu * k2 * su.v[d].c[f];
        });
      }
    }

    for (std::size_t k = 0; k < K; ++k) {
      cross_into(v_, Bk_[k], F_);
      fft_forward_into(F_, out.B[k]);
      dealias_inplace(g_, out.B[k]);
      curl_inplace(g_, out.B[k]);
    }
  }

  // One classical RK4 step; re-projection and mean removal after the full
  // step only.  For vallis the velocity is not part of the advanced state.
  void step(SpectralState& s, double dt, bool v_fresh = false) {
    const bool with_v = scheme_ == Scheme::moffatt;
    rhs(s, k1_, v_fresh);
    lincomb(u_, s, 0.5 * dt, k1_, with_v);
    rhs(u_, k2_);
    lincomb(u_, s, 0.5 * dt, k2_, with_v);
    rhs(u_, k3_);
    lincomb(u_, s, dt, k3_, with_v);
    rhs(u_, k4_);
    accumulate(s, dt, with_v);
    finish(s, dt, with_v);
  }

  // Integrating-factor RK4: the stiff -nu k^2 v term is propagated by its
  // exact exponential, so dt is limited only by the nonlinear scales.  Only
  // meaningful for moffatt with the viscous term excluded from the RHS.
  void step_if(SpectralState& s, double dt) {
    const double half = 0.5 * (mu_ / rho_) * dt;
    rhs(s, k1_);
    lincomb(u_, s, 0.5 * dt, k1_, true);
    heat(u_.v, half);
    rhs(u_, k2_);
    lincomb_b(u_, s, 0.5 * dt, k2_);
    copy(u_.v, s.v);
    heat(u_.v, half);
    axpy(u_.v, 0.5 * dt, k2_.v);
    rhs(u_, k3_);
    lincomb_b(u_, s, dt, k3_);
    copy(u_.v, s.v);
    heat(u_.v, 2.0 * half);
    heat(k3_.v, half);
    axpy(u_.v, dt, k3_.v);
    rhs(u_, k4_);
    heat(s.v, 2.0 * half);
    heat(k1_.v, 2.0 * half);
    heat(k2_.v, half);
    accumulate(s, dt, true);  // k3_.v already carries one half-kernel
    finish(s, dt, true);
  }

 private:
  void spectral_total(const SpectralState& su, SpectralVector& out) {
    const std::size_t K = su.B.size();
    for (int d = 0; d < 3; ++d) {
      auto& o = out[d].c;
      const auto& b0 = su.B[0][d].c;
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = b0[i];
      for (std::size_t k = 1; k < K; ++k) {
        const auto& bk = su.B[k][d].c;
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += bk[i];
      }
    }
  }

  void physical_total(VectorField& out) {
    const std::size_t K = Bk_.size();
    for (int d = 0; d < 3; ++d) {
      auto& o = out[d];
      const auto& b0 = Bk_[0][d];
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = b0[i];
      for (std::size_t k = 1; k < K; ++k) {
        const auto& bk = Bk_[k][d];
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += bk[i];
      }
    }
  }

  static void cross_into(const VectorField& a, const VectorField& b, VectorField& out) {
    const std::size_t nn = a[0].size();
    for (std::size_t i = 0; i < nn; ++i) {
      out[0][i] = a[1][i] * b[2][i] - a[2][i] * b[1][i];
      out[1][i] = a[2][i] * b[0][i] - a[0][i] * b[2][i];
      out[2][i] = a[0][i] * b[1][i] - a[1][i] * b[0][i];
    }
  }

  void curl_of_into(const SpectralVector& s, SpectralVector& out) {
    copy(out, s);
    curl_inplace(g_, out);
  }

  static void copy(SpectralVector& dst, const SpectralVector& src) {
    for (int d = 0; d < 3; ++d) dst[d].c = src[d].c;
  }

  static void axpy(SpectralVector& y, double a, const SpectralVector& x) {
    for (int d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < y[d].c.size(); ++i) y[d].c[i] += a * x[d].c[i];
  }

  static void scale(SpectralVector& y, double a) {
    for (int d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < y[d].c.size(); ++i) y[d].c[i] *= a;
  }

  // u = s + a * k, in one pass per array
  void lincomb(SpectralState& u, const SpectralState& s, double a, const Rhs& k, bool with_v) {
    if (with_v)
      for (int d = 0; d < 3; ++d) {
        const auto& sv = s.v[d].c;
        const auto& kv = k.v[d].c;
        auto& uv = u.v[d].c;
        for (std::size_t i = 0; i < uv.size(); ++i) uv[i] = sv[i] + a * kv[i];
      }
    lincomb_b(u, s, a, k);
  }

  void lincomb_b(SpectralState& u, const SpectralState& s, double a, const Rhs& k) {
    for (std::size_t m = 0; m < u.B.size(); ++m)
      for (int d = 0; d < 3; ++d) {
        const auto& sb = s.B[m][d].c;
        const auto& kb = k.B[m][d].c;
        auto& ub = u.B[m][d].c;
        for (std::size_t i = 0; i < ub.size(); ++i) ub[i] = sb[i] + a * kb[i];
      }
  }

  void heat(SpectralVector& v, double nu_t) {
    for_each_dmode(g_, [&](std::size_t f, double kx, double ky, double kz) {
      const double e = std::exp(-nu_t * (kx * kx + ky * ky + kz * kz));
      for (int d = 0; d < 3; ++d) v[d].c[f] *= e;
    });
  }

  // s += dt/6 (k1 + 2 k2 + 2 k3 + k4)
  void accumulate(SpectralState& s, double dt, bool with_v) {
    const double c1 = dt / 6.0, c2 = dt / 3.0;
    if (with_v)
      for (int d = 0; d < 3; ++d) {
        auto& sv = s.v[d].c;
        const auto &a = k1_.v[d].c, &b = k2_.v[d].c, &c = k3_.v[d].c, &e = k4_.v[d].c;
        for (std::size_t i = 0; i < sv.size(); ++i)
          sv[i] += c1 * (a[i] + e[i]) + c2 * (b[i] + c[i]);
      }
    for (std::size_t m = 0; m < s.B.size(); ++m)
      for (int d = 0; d < 3; ++d) {
        auto& sb = s.B[m][d].c;
        const auto &a = k1_.B[m][d].c, &b = k2_.B[m][d].c, &c = k3_.B[m][d].c,
                   &e = k4_.B[m][d].c;
        for (std::size_t i = 0; i < sb.size(); ++i)
          sb[i] += c1 * (a[i] + e[i]) + c2 * (b[i] + c[i]);
      }
  }

  void finish(SpectralState& s, double dt, bool with_v) {
    s.t += dt;
    if (with_v) {
      leray_inplace(g_, s.v);
      zero_mean_inplace(s.v);
    }
    for (auto& b : s.B) {
      leray_inplace(g_, b);
      zero_mean_inplace(b);
    }
    if (!s.finite()) throw std::runtime_error("relaxation step produced a non-finite state");
  }

  Grid3 g_;
  Scheme scheme_;
  double rho_, mu_;
  bool viscous_;
  std::vector<VectorField> Bk_;
  VectorField B_, J_, w_, v_, F_;
  SpectralVector sT_;
  Rhs k1_, k2_, k3_, k4_;
  SpectralState u_;
};

inline RelaxationState to_state(const SpectralState& ss, const RelaxationState& proto,
                                bool keep_v) {
  RelaxationState out;
  out.components.grid = ss.g;
  out.components.labels = proto.components.labels;
  for (const auto& b : ss.B) out.components.components.push_back(fft_backward(b));
  out.v = keep_v ? fft_backward(ss.v) : VectorField(ss.g);
  out.t = ss.t;
  out.rho = proto.rho;
  out.mu = proto.mu;
  return out;
}

inline RelaxationState single_step(const RelaxationState& s, double dt, Scheme scheme) {
  if (!(dt > 0)) throw std::invalid_argument("relaxation step: dt must be positive");
  if (dt > stable_dt(s) * (1.0 + 1e-12))
    throw std::invalid_argument("relaxation step: dt exceeds the stable bound");
  SpectralState ss = SpectralState::from(s);
  Stepper st(ss.g, scheme, s.rho, s.mu, ss.B.size(), true);
  st.step(ss, dt);
  return to_state(ss, s, scheme == Scheme::moffatt);
}

}  // namespace detail

inline RelaxationState step_moffatt(const RelaxationState& s, double dt) {
  return detail::single_step(s, dt, Scheme::moffatt);
}

// The instantaneous scheme stores no velocity: the returned state has v = 0
// and kinetic energy is identically zero in its records.
inline RelaxationState step_vallis(const RelaxationState& s, double dt) {
  return detail::single_step(s, dt, Scheme::vallis);
}

struct RunResult {
  std::vector<DiagnosticsRecord> series;
  RelaxationState final;
  bool aborted = false;
  bool stopped_early = false;
  std::string abort_reason;
};

// Integrate to t_end with adaptive dt, recording every record_every steps.
// moffatt uses the integrating-factor stepper, so the viscous limit does
// not constrain dt; the bound is advective/Alfven.  vallis is a degenerate
// parabolic system (effective diffusivity |B|^2/mu), so its bound adds the
// magnetofriction limit 2 mu / (max|B|^2 kmax^2) on top of the advective
// one.  The monotone total-energy invariant is validated across records;
// violation aborts with the partial series.  An optional stop predicate,
// checked at records, ends the run cleanly before t_end (used when a
// monotone quantity has already crossed its target and the remaining
// horizon adds nothing).
inline RunResult run(const RunConfig& cfg, const RelaxationState& s0,
                     const std::function<void(const DiagnosticsRecord&)>& on_record = {},
                     const std::function<bool(const DiagnosticsRecord&)>& stop = {}) {
  cfg.validate();
  RunResult res;
  RelaxationState proto = s0;
  proto.rho = cfg.rho;
  proto.mu = cfg.mu;
  detail::SpectralState ss = detail::SpectralState::from(s0);
  const bool moffatt = cfg.scheme == Scheme::moffatt;
  detail::Stepper st(ss.g, cfg.scheme, cfg.rho, cfg.mu, ss.B.size(), false);
  const double h = ss.g.h();
  const double kmax = double(ss.g.n / 3) * two_pi / ss.g.L;
  const double kmax2 = 3.0 * kmax * kmax;

  auto make_record = [&](const detail::SpectralState& state) {
    return record(detail::to_state(state, proto, moffatt));
  };

  DiagnosticsRecord r0 = make_record(ss);
  res.series.push_back(r0);
  if (on_record) on_record(r0);
  double E_prev = r0.E_mag + r0.E_kin;
  const double E0 = E_prev;

  int step = 0;
  while (ss.t < cfg.t_end - 1e-12) {
    detail::MaxNorms nm = moffatt ? st.max_norms(ss) : st.refresh_velocity(ss);
    double dt = h * std::sqrt(cfg.rho) / std::max(nm.bmax, 1e-300);
    if (nm.vmax > 0) dt = std::min(dt, h / nm.vmax);
    dt *= cfg.cfl;
    if (!moffatt) dt = std::min(dt, 2.0 * cfg.mu / (nm.bmax * nm.bmax * kmax2));
    dt = std::min(dt, cfg.t_end - ss.t);
    try {
      if (moffatt)
        st.step_if(ss, dt);
      else
        st.step(ss, dt, true);
    } catch (const std::runtime_error& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    }
    ++step;
    if (step % cfg.record_every == 0 || ss.t >= cfg.t_end - 1e-12) {
      DiagnosticsRecord r = make_record(ss);
      double E_tot = r.E_mag + r.E_kin;
      res.series.push_back(r);
      if (on_record) on_record(r);
      if (E_tot > E_prev + 1e-10 * E0) {
        res.aborted = true;
        res.abort_reason = "total energy increased between records";
        break;
      }
      E_prev = E_tot;
      if (stop && stop(r)) {
        res.stopped_early = true;
        break;
      }
    }
  }
  res.final = detail::to_state(ss, proto, moffatt);
  return res;
}

inline RunResult run(const RunConfig& cfg, const LinkConfig& link, const Grid3& g,
                     const std::function<void(const DiagnosticsRecord&)>& on_record = {},
                     const std::function<bool(const DiagnosticsRecord&)>& stop = {}) {
  RelaxationState s0;
  s0.components = build_link_field(link, g);
  s0.v = VectorField(g);
  s0.rho = cfg.rho;
  s0.mu = cfg.mu;
  return run(cfg, s0, on_record, stop);
}

}  // namespace mrelax
