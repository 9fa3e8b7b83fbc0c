// Asymptotic expansions in 1/k of the contraction, the Laplacian and the
// scalar curvature of omega_k = omega_g + k pi^* omega, together with fiber
// averages, the Sigma_E field, and a generic order-verification harness.
#pragma once

#include <functional>
#include <vector>

#include "ruledk/ruledgeom.hpp"

namespace ruledk::expansion {

// Coefficients of Lambda_{omega_k} alpha = g0 + k^-1 (g1 - g0 f1)
//   + k^-2 (g2 - g1 f1 - g0 f2 + g0 f1^2) + O(k^-3).
struct ContractionTerms {
  double g0, g1, g2, f1, f2;
  double series(double k) const {
    return g0 + (g1 - g0 * f1) / k +
           (g2 - g1 * f1 - g0 * f2 + g0 * f1 * f1) / (k * k);
  }
  // over a 1-dim base the full contraction is the exact rational function
  double exact_ratio(double k) const { return (g0 + g1 / k + g2 / (k * k)) / (1.0 + f1 / k + f2 / (k * k)); }
};
ContractionTerms contraction_g_terms(const TotalFrame& F, const pointalg::FormAtPoint& alpha);

// Delta_k f = l0 + k^-1 l1 + k^-2 l2 + O(k^-3).
struct LaplacianTerms {
  double l0, l1, l2;
  double series(double k) const { return l0 + l1 / k + l2 / (k * k); }
};
LaplacianTerms laplacian_k_series(const TotalFrame& F, const Jet& f);

// Scal(omega_k) = s0 + k^-1 s1 + k^-2 s2 + O(k^-3) with named summands.
struct ExpansionRecord {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  // s1 = s1_base + s1_w
  double s1_base = 0.0;  // pi^* S(omega)
  double s1_w = 0.0;     // 2r Lambda(Tr(lambda i F^0))
  // s2 summands in the order of the statement
  double t_lam2 = 0.0;   // 2 Lam^2((pi^*(Ric - Tr iF) ^ omega_g)_H)
  double t_f1b = 0.0;    // -f1 (S - Lambda Tr iF)
  double t_dv = 0.0;     // Delta_V(f2 - f1^2/2)
  double t_dth = 0.0;    // Delta~_H f1
  double t_quad = 0.0;   // -r f1^2 + 2r f2
  double series(double k) const { return s0 + s1 / k + s2 / (k * k); }
};
ExpansionRecord scal_series(const TotalFrame& F);

// Least-squares slope of log|exact - series| against log k.
struct OrderFit {
  bool saturated = false;
  double slope = 0.0;
  std::vector<double> ks, residuals;
};
OrderFit verify_order(const std::vector<double>& ks,
                      const std::function<double(double)>& exact,
                      const std::function<double(double)>& series,
                      double floor = 1e-13);

// Average of Scal(omega_k) over the fiber P(E^*_x) (FS probability measure).
double fiber_average_scal(const HermitianBundle& E, const BasePoint& x, double k,
                          const FiberQuad& q);
// Fiber average of the series coefficient s2 at x.
double fiber_average_s2(const HermitianBundle& E, const BasePoint& x, const FiberQuad& q);

// Sigma_E as a field on the base:
//   (2/r) Lam^2(Ric ^ tr iF) - (2/(r(r+1))) Lam^2(tr iF ^ tr iF)
//   + (2/(r+1)) Lam^2 tr(iF ^ iF) - mu S(omega) + tr(u_{Xs})/r .
// The Lam^2 terms vanish identically over 1-dimensional bases.  When
// `require_he` is set the Hermitian-Einstein residual is checked first.
BaseField sigma_E(const HermitianBundle& E, const BaseField* u_xs_trace = nullptr,
                  bool require_he = true, double he_tol = 1e-6);

// sup over quadrature nodes of |Lambda(iF_h) - mu I|.
double hermitian_einstein_residual(const HermitianBundle& E);

}  // namespace ruledk::expansion
