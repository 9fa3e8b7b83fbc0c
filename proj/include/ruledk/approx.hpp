// Order-p approximate solutions of the gauge-fixed extremal equation:
// lifts l_k(b) = b + k^{-1} Tr(u_X lambda), the linearization of Scal at
// omega_k, the S_1/S_{1,1} operators, and the inductive construction of
// (phi_{k,p}, b_{k,p}) for p <= 2.
//
// The equation solved is
//   Scal(omega_k + i dbar del phi) + <grad l_k(b), grad phi>/2 - l_k(b) = 0 ,
// whose sign is pinned by the Hamiltonian perturbation identity
// H_phi = H - <grad H, grad phi>/2 under omega -> omega + i dbar del phi.
#pragma once

#include "ruledk/expansion.hpp"
#include "ruledk/ruledgeom.hpp"

namespace ruledk::approx {

// u_X for the Hamiltonian field of b: the endomorphism solving
//   Lambda del (dbar u - iota_{X^{1,0}} (iF_h)) = 0,  int tr(u) omega = 0
// (diagonal metrics; one Poisson solve per summand, minimal-norm gauge).
struct LiftData {
  BaseField b;
  std::vector<BaseField> u_re, u_im;  // diagonal entries of u_X
  double lift_residual = 0.0;         // sup norm of dbar u - iota_X (iF)
};
LiftData solve_uX(const HermitianBundle& E, const BaseField& b);

// theta_X = Tr(u_X lambda) as a jet at a TotalFrame.
Jet theta_jet(const TotalFrame& F, const LiftData& lift);
// l_k(b) = b + k^{-1} theta_X.
Jet lift_lk_jet(const TotalFrame& F, const LiftData& lift, double k);

// Check that k d(l_k(b)) = iota_{X~} omega_k for a holomorphic X~ with
// pi_* X~ = X: returns (sup |dbar V|, |pi_* V - X|) at the point.
struct LiftCheck {
  double holomorphy = 0.0;
  double projection = 0.0;
};
LiftCheck check_lift(const TotalFrame& F, const LiftData& lift, double k);

// Linearization of the scalar curvature map at omega_k.
double linearize_scal(const TotalFrame& F, const Jet& phi, double k);
// Leading vertical operator Delta_V(Delta_V - r).
double vertical_op(const TotalFrame& F, const Jet& phi);

// S_1 = Tr(A_1 lambda) with A_1 = S(omega) I + (1/2pi) Lambda(iF)^0 (the
// 1/2pi normalization), evaluated at a point; `scale2r` switches to the
// 2r-normalization that matches the k^{-1} coefficient of Scal(omega_k).
double s1(const TotalFrame& F, bool scale2r = false);
// ratio between the 2r- and 1/(2pi)-normalized traceless parts (= 4 pi r)
double s1_normalization_ratio(int r);

// S_{1,1}(eta, Phi): derivative of S_1 along omega_t = omega + i t dbar del eta,
// h_t = h(I + t Phi); requires a Hermitian-Einstein h.  Phi is given in the
// raw chart frame as a constant matrix times a base field.
struct EndoPerturbation {
  Eigen::MatrixXcd mat;  // h-hermitian (H * mat hermitian), traceless
  BaseField amp;
};
double s11(const TotalFrame& F, const BaseField* eta, const EndoPerturbation* Phi,
           bool scale2r = false);
// Finite-difference oracle for s11: centered difference of s1 at step t.
double s11_fd(const HermitianBundle& E, const TotalPoint& pt, const BaseField* eta,
              const EndoPerturbation* Phi, double t, bool scale2r = false);

// ----------------------------------------------------------------------------

struct ApproxSolution {
  const HermitianBundle* E = nullptr;
  int p = 0;
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  // constant vertical endomorphisms entering l at orders k^{-1}, k^{-2}
  Eigen::MatrixXcd U0, U1;
  BaseField eta2;                     // base potential correction (order k^0)
  BaseField psi2;                     // Phi_2 = psi2 * diag(1,-1) (order k^{-1})
  std::vector<BaseField> phi2_modes;  // zonal fiber modes l = 2.. of phi_2 (k^{-2})
  int fiber_band = 8;

  double bkp(double k) const { return b0 + b1 / k + b2 / (k * k); }
  Jet phi_jet(const TotalFrame& F, double k) const;
  Jet l_jet(const TotalFrame& F, double k) const;
  // residual of the gauge-fixed extremal equation at the point
  double residual(const TotalFrame& F, double k) const;
  std::string to_json() const;
};

// Construct the order-p approximate solution (p <= 2).  The bundle metric
// must either be Hermitian-Einstein or have constant Lambda(iF) (natural
// split metrics), so that the order-1 W-obstruction is a holomorphic
// vertical Hamiltonian.
ApproxSolution build_approx(const HermitianBundle& E, int p);

}  // namespace ruledk::approx
