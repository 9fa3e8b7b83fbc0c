// Geometry of P(E^*) -> M for split bundles E = O(a_1) + ... + O(a_r) over P^1
// (or flat bundles over a torus), with smooth hermitian perturbations.
//
// Conventions (fixed throughout):
//   sections of E are columns s of frame components, h(s,t) = t^dag H s;
//   E^* elements are rows f with |f|^2_{h^*} = f H^{-1} f^dag;
//   Chern curvature F = dbar(H^{-1} del H); over a 1-dim base F = C dz^dzbar;
//   lambda(v,h), v = f in E^*_x, acts on E as (H^{-1} f^dag f)/(f H^{-1} f^dag);
//   omega_g = i del dbar log(f H^{-1} f^dag) in the affine fiber chart
//   f(xi) = f0 + xi * w around [f0].
//
// All pointwise evaluation happens in a normal frame at the base point
// (H = I, dH = 0 there), where the horizontal/vertical splitting of omega_g
// coincides with the coordinate splitting at the center.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ruledk/basegeom.hpp"
#include "ruledk/pointalg.hpp"

namespace ruledk {

struct Perturbation {
  enum class Kind { None, Diag, OffDiag };
  Kind kind = Kind::None;
  double eps = 0.0;
};

class HermitianBundle {
 public:
  HermitianBundle(const BaseManifold* base, std::vector<int> degrees,
                  Perturbation pert = {});

  const BaseManifold* base() const { return base_; }
  int rank() const { return static_cast<int>(degrees_.size()); }
  const std::vector<int>& degrees() const { return degrees_; }
  const Perturbation& perturbation() const { return pert_; }
  int degree_sum() const;
  double slope() const;  // HE constant: 2*pi*deg / (r * vol)
  bool polystable_split() const;  // all degrees equal

  // Pairing matrix H at a chart point, entries as jets in `nvars` complex
  // variables with the base coordinate at slot 0.
  pointalg::JetMatrix metric_jet(const BasePoint& p, int nvars) const;

 private:
  const BaseManifold* base_;
  std::vector<int> degrees_;
  Perturbation pert_;
};

struct TotalPoint {
  BasePoint x;
  Eigen::RowVectorXcd v;  // representative of the fiber direction in E^*_x
};

// Optional replacement geometry (perturbed bundle metric and/or base form),
// used by finite-difference oracles.
struct GeometryOverride {
  std::function<pointalg::JetMatrix(const BasePoint&, int)> metric;
  std::function<Jet(const BasePoint&, int)> base_potential;
};

// Cached normal-frame data at a TotalPoint.  Jets live in n = m + r - 1
// complex variables: slot 0 the base offset, slots 1..r-1 the fiber offsets.
class TotalFrame {
 public:
  TotalFrame(const HermitianBundle& E, const TotalPoint& pt,
             const GeometryOverride* ov = nullptr);

  int n() const { return n_; }
  int r() const { return r_; }
  const HermitianBundle& bundle() const { return *E_; }
  const TotalPoint& point() const { return pt_; }

  const Jet& ug() const { return ug_; }
  const Jet& base_pot() const { return base_pot_; }
  Jet uk(double k) const { return ug_ + base_pot_ * cplx(k); }

  pointalg::FormAtPoint omega_g() const;
  pointalg::FormAtPoint omega_base() const;           // pi^* omega_inf
  pointalg::FormAtPoint omega_k(double k) const;      // throws if not positive
  pointalg::FormAtPoint base_omega_form() const;      // omega_inf as a base form (n=m)

  const pointalg::JetMatrix& H() const { return H_; }
  const pointalg::JetMatrix& curv_coeff() const { return F_; }  // F = F_ dz^dzbar
  const pointalg::JetMatrix& lambda() const { return lambda_; }
  Jet theta(const pointalg::JetMatrix& u) const;  // Tr(lambda u), jet field
  Jet theta_const(const Eigen::MatrixXcd& u) const;
  // theta for an endomorphism given in the raw chart frame (conjugated into
  // the normal frame first)
  Jet theta_raw(const pointalg::JetMatrix& u_raw) const;
  Jet theta_raw_const(const Eigen::MatrixXcd& u_raw) const;
  // lambda weight Tr(lambda E_ii) in the raw frame (fiber "latitudes")
  Jet lambda_weight_jet(int i) const;
  const pointalg::JetMatrix& frame_change() const { return S_; }  // raw -> normal
  const Eigen::RowVectorXcd& fiber_center() const { return f0_; }
  const Eigen::MatrixXcd& fiber_dirs() const { return wdirs_; }

  // f_j coefficients by the defining wedge quotient; f1 also as a jet field.
  double f1() const;
  double f2() const { return 0.0; }  // zero over 1-dimensional bases
  Jet f1_jet() const;
  Jet log_fsum_jet(double k) const;  // log(1 + f1/k) over 1-dim bases

  // Laplacians by their defining wedge identities (values at the center).
  double delta_V(const Jet& f) const;
  double delta_H(const Jet& f) const;
  double delta_tilde_H(const Jet& f) const;
  double laplace_k(const Jet& f, double k) const;  // exact Delta_k f

  // Horizontal/vertical blocks at the center (valid in the normal frame).
  pointalg::FormAtPoint block_H(const pointalg::FormAtPoint& a) const;  // base form (n=m)
  pointalg::FormAtPoint block_V(const pointalg::FormAtPoint& a) const;  // fiber form
  double mixed_sup(const pointalg::FormAtPoint& a) const;
  // Lambda~ of the vertical block: (r-1) a_V ^ w_V^{r-2} = (Lambda~ a_V) w_V^{r-1}.
  cplx tilde_contract_V(const pointalg::FormAtPoint& a) const;
  // promote a base (1,1) form (n=m) to a horizontal total-space form
  pointalg::FormAtPoint promote(const pointalg::FormAtPoint& base_form) const;

  // curvature pullbacks at the center
  pointalg::FormAtPoint trace_curv_pullback() const;   // pi^* Tr(i F_h)
  pointalg::FormAtPoint base_ricci_pullback() const;   // pi^* Ric(omega_inf)
  pointalg::FormAtPoint trace_curv_vertical() const;   // Tr(i F_{h_FS}) on V
  pointalg::FormAtPoint beta_form() const;             // i Tr(lambda F) horizontal block
  Jet beta_coeff_jet() const;                          // beta = i beta_coeff dz^dzbar

  // exact scalar curvature of omega_k (ground truth; no series)
  double total_scal(double k) const;
  pointalg::FormAtPoint ricci_k(double k) const;

  // exact Scal via the bundle route:
  //   Scal = Lambda_k(pi^*(Ric - Tr iF) + r omega_g) + Delta_k log(sum k^-j f_j)
  double total_scal_bundle_route(double k) const;

 private:
  const HermitianBundle* E_;
  TotalPoint pt_;
  int n_ = 2, r_ = 2, m_ = 1;
  pointalg::JetMatrix H_, Hinv_, F_, lambda_, S_, Sinv_;
  Eigen::RowVectorXcd f0_;
  Eigen::MatrixXcd wdirs_;  // rows: fiber chart directions
  std::vector<std::vector<Jet>> frow_;  // f(xi) as a row of jets (size 1 x r)
  Jet Q_, ug_, base_pot_;
};

// Kaehler operators on jets (shared by expansion/approx/solver).
pointalg::JetMatrix metric_jets_from_potential(const Jet& u);
pointalg::FormAtPoint ricci_from_potential(const Jet& u);
double scal_from_potential(const Jet& u);
Jet scal_jet_from_potential(const Jet& u);  // degree-2 jet of Scal
Jet laplace_jet(const Jet& f, const pointalg::JetMatrix& ginv);
// Fine's linearization of Scal at omega = i del dbar u, applied to phi:
//   L(phi) = (Delta^2 - S Delta) phi + n(n-1) (i dbar del phi ^ Ric ^ w^{n-2}) / w^n
double scal_linearization(const Jet& u, const Jet& phi);
// <grad f, grad g> with respect to i del dbar u (real fields).
double grad_pair_potential(const Jet& u, const Jet& f, const Jet& g);

// Fiber quadrature over P(E^*_x) for r = 2: representatives and FS weights.
struct FiberQuad {
  std::vector<Eigen::RowVectorXcd> v;
  std::vector<double> w;           // weights for omega_FS^{r-1}/(r-1)! measure
  double volume = 0.0;             // total (= 2 pi for r = 2)
};
FiberQuad fiber_quadrature(int nc = 20, int nphi = 24);

// lambda(v,h) as a plain matrix for v in E^*_x given the pairing matrix H(x).
Eigen::MatrixXcd lambda_endo(const Eigen::RowVectorXcd& v, const Eigen::MatrixXcd& H);

// Quadrature points spread over the fiber P(E^*_x) (h(x)-unitary frame).
std::vector<TotalPoint> fiber_points(const HermitianBundle& E, const BasePoint& x,
                                     const FiberQuad& q);

}  // namespace ruledk
