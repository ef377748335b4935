// Energies, helicities, cross-helicity matrix, the Arnold energy-helicity
// bound, and the per-record time series row.  Energy follows the integral
// of ||B||^2 with no 1/2 factor.
#pragma once

#include <iomanip>
#include <sstream>

#include "mrelax/modeled_fields.hpp"

namespace mrelax {

inline double energy(const VectorField& B) {
  require_finite(B, "energy");
  return l2_inner(B, B);
}

inline double helicity(const VectorField& B) { return l2_inner(B, vector_potential(B)); }

inline double cross_helicity(const VectorField& B1, const VectorField& B2) {
  return l2_inner(B1, vector_potential(B2));
}

// energy(B) - lambda1*|helicity(B)|; nonnegative up to rounding on the torus.
inline double arnold_gap(const VectorField& B, double lambda1) { return energy(B) - lambda1 * std::abs(helicity(B)); }

struct DiagnosticsRecord {
  double t = 0;
  double E_mag = 0;
  double E_kin = 0;
  double H_total = 0;
  std::vector<double> H_comp;
  std::vector<std::vector<double>> H_cross;  // symmetric, H_cross[i][i] = H_comp[i]
  double arnold_lhs = 0;                     // lambda1 * sum |H_comp|
  std::vector<double> div_residuals;         // components then velocity
  double max_div_residual = 0;

  // column order: t, E_mag, E_kin, H_total, H_comp..., arnold_lhs, max_div_residual
  std::string csv_row() const {
    std::ostringstream os;
    os << std::setprecision(17) << t << ',' << E_mag << ',' << E_kin << ',' << H_total;
    for (double h : H_comp) os << ',' << h;
    os << ',' << arnold_lhs << ',' << max_div_residual;
    return os.str();
  }
  static std::string csv_header(std::size_t n_comp) {
    std::string s = "t,E_mag,E_kin,H_total";
    for (std::size_t i = 0; i < n_comp; ++i) s += ",H_comp" + std::to_string(i);
    return s + ",arnold_lhs,max_div_residual";
  }
};

inline DiagnosticsRecord diagnose(double t, const ComponentFields& comps, const VectorField& v, double rho) {
  DiagnosticsRecord r;
  r.t = t;
  const std::size_t nc = comps.components.size();
  std::vector<VectorField> pot;
  pot.reserve(nc);
  for (const auto& b : comps.components) pot.push_back(vector_potential(b));
  r.H_cross.assign(nc, std::vector<double>(nc, 0.0));
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = i; j < nc; ++j) {
      // symmetrized so the matrix is exactly symmetric in floating point
      double h = 0.5 * (l2_inner(comps.components[i], pot[j]) + l2_inner(comps.components[j], pot[i]));
      r.H_cross[i][j] = r.H_cross[j][i] = h;
    }
  r.H_comp.resize(nc);
  double lam1 = two_pi / comps.grid.L, abs_sum = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    r.H_comp[i] = r.H_cross[i][i];
    abs_sum += std::abs(r.H_comp[i]);
  }
  r.arnold_lhs = lam1 * abs_sum;
  VectorField total = comps.total();
  r.E_mag = energy(total);
  r.E_kin = rho * energy(v);
  r.H_total = helicity(total);
  for (const auto& b : comps.components) r.div_residuals.push_back(divergence_residual(b));
  r.div_residuals.push_back(divergence_residual(v));
  for (double d : r.div_residuals) r.max_div_residual = std::max(r.max_div_residual, d);
  return r;
}

}  // namespace mrelax
