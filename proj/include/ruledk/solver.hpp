// Cohomogeneity-one machinery on P(O(a1)+O(a2))^* over P^1: the momentum
// profile oracle for exact scalar curvature, Calabi extremal profiles, the
// Hermitian-Einstein solve on polystable splits, the discretized linearized
// operator G_{k,p} with its right inverse, and the contraction-mapping solve
// of the gauge-fixed extremal equation on the symmetry-reduced problem.
//
// A U(2)-invariant metric is i del dbar (U(s) + kappa q), s = log|zeta|^2 - n q,
// q = log(1+|z|^2), kappa = k + a1, n = a1 - a2.  With tau = U'(s) in [0,1],
// phi(tau) = U''(s) and p(tau) = kappa - n tau, the scalar curvature is
//   Scal = (2 - (p phi)'') / p .
#pragma once

#include "ruledk/approx.hpp"

namespace ruledk::solver {

struct MomentumProfile {
  Eigen::VectorXd tau;   // Chebyshev-Gauss nodes in (0,1)
  Eigen::VectorXd vals;  // profile values at the nodes
  Eigen::VectorXd cheb;  // Chebyshev coefficients on [0,1]

  static MomentumProfile from_nodes(const Eigen::VectorXd& tau, const Eigen::VectorXd& v);
  static MomentumProfile from_function(const std::function<double(double)>& f, int n);
  double eval(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;
  // boundary data of a smooth compactification: phi(0)=phi(1)=0, phi'(0)=1, phi'(1)=-1
  double boundary_defect() const;
  bool positive_inside(double tol = 1e-12) const;
};

// scalar curvature of the profile metric at moment tau
double momentum_scal(const MomentumProfile& pr, double kappa, int n, double tau);

// the profile of the induced metric omega_k for the natural split metric
MomentumProfile natural_profile(int nnodes = 48);

// moment coordinate of a TotalPoint (the lambda weight of the second summand)
double moment_of(const HermitianBundle& E, const TotalPoint& p);

struct CalabiSolution {
  MomentumProfile profile;
  double c0 = 0.0, c1 = 0.0;  // extremal Scal = c0 + c1 tau
  double ode_residual = 0.0;
};
// solve (p phi)'' = 2 - p (c0 + c1 tau) with the compactification conditions
CalabiSolution calabi_extremal(double kappa, int n, int nnodes = 48);

// ---------------------------------------------------------------------------

struct HeSolveResult {
  std::vector<BaseField> log_corr;  // per-summand corrections: H_d -> H_d e^{-psi_d}
  double residual = 0.0;            // sup |Lambda(iF) - mu I| after the solve
  GeometryOverride metric_override(const HermitianBundle& E) const;
};
// Hermitian-Einstein metric on a polystable split (equal degrees); throws
// "bundle not polystable; HE unattainable" otherwise.
HeSolveResult he_solve(const HermitianBundle& E);

// ---------------------------------------------------------------------------

// The symmetry-reduced gauge-fixed equation at background omega_{k,p}:
// unknowns are a potential phi(tau0) (Chebyshev series in the background
// moment) and b-coordinates (beta0, beta1) multiplying (1, k^{-1}(1-2 tau0)).
class ReducedProblem {
 public:
  ReducedProblem(const HermitianBundle& E, const approx::ApproxSolution* start,
                 double k, int nnodes = 40);

  int nunknowns() const { return nn_ + 2; }
  int nnodes() const { return nn_; }
  double k() const { return k_; }
  const Eigen::VectorXd& tau0() const { return tau0_; }

  // residual of S(omega_phi) - l(b) - <grad l, grad phi>/2 at the nodes
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;  // x = (cheb..., b0, b1)
  // linearization of the residual at x (finite differences column by column)
  Eigen::MatrixXd assemble_G(const Eigen::VectorXd& x) const;

  // final-metric profile data at the nodes for a given iterate
  void profile_of(const Eigen::VectorXd& x, Eigen::VectorXd& tau_new,
                  Eigen::VectorXd& phi_new) const;

  // operator norm of the right inverse P_k (1/sigma_min of weighted G)
  double right_inverse_norm() const;

 private:
  const HermitianBundle* E_;
  const approx::ApproxSolution* start_;
  double k_;
  int nn_;
  Eigen::VectorXd tau0_, weights_;
  std::vector<TotalPoint> pts_;
  Jet phi_total_jet(const TotalFrame& F, const Eigen::VectorXd& x) const;
};

struct FixedPointState {
  Eigen::VectorXd x;           // (cheb coefficients, beta0, beta1)
  std::vector<double> history; // sup-norm residuals per iteration
  int iterations = 0;
  bool converged = false;
  double pk_norm = 0.0;        // operator-norm estimate of the right inverse
  double iterate_norm = 0.0;
};
FixedPointState fixed_point_solve(const ReducedProblem& red, int max_iter = 40,
                                  double tol = 1e-10);

}  // namespace ruledk::solver
