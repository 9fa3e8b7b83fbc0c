#include "ruledk/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "ruledk/sphere.hpp"

namespace ruledk::solver {

using pointalg::JetMatrix;

namespace {

// Chebyshev series on [0,1] (x = 2 tau - 1)
Eigen::VectorXd cheb_from_nodes(const Eigen::VectorXd& vals) {
  const int n = static_cast<int>(vals.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < n; ++m) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double theta = M_PI * (j + 0.5) / n;
      s += vals[j] * std::cos(m * theta);
    }
    c[m] = (m == 0 ? 1.0 : 2.0) * s / n;
  }
  return c;
}

double cheb_eval(const Eigen::VectorXd& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int m = static_cast<int>(c.size()) - 1; m >= 1; --m) {
    const double b0 = 2.0 * x * b1 - b2 + c[m];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

Eigen::VectorXd cheb_deriv(const Eigen::VectorXd& c) {
  // derivative in x, then scaled by dx/dtau = 2
  const int n = static_cast<int>(c.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 2) return d;
  d[n - 2] = 2.0 * (n - 1) * c[n - 1];
  for (int m = n - 3; m >= 0; --m) d[m] = d[m + 2] + 2.0 * (m + 1) * c[m + 1];
  d[0] *= 0.5;
  return 2.0 * d;
}

Jet cheb_eval_jet(const Eigen::VectorXd& c, const Jet& x) {
  const int nv = x.nvars();
  Jet b1(nv), b2(nv);
  for (int m = static_cast<int>(c.size()) - 1; m >= 1; --m) {
    Jet b0 = x * b1 * cplx(2.0) - b2 + cplx(c[m]);
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + cplx(c[0]);
}

}  // namespace

MomentumProfile MomentumProfile::from_nodes(const Eigen::VectorXd& tau,
                                            const Eigen::VectorXd& v) {
  MomentumProfile p;
  p.tau = tau;
  p.vals = v;
  p.cheb = cheb_from_nodes(v);
  return p;
}

MomentumProfile MomentumProfile::from_function(const std::function<double(double)>& f,
                                               int n) {
  Eigen::VectorXd tau(n), v(n);
  for (int j = 0; j < n; ++j) {
    const double x = std::cos(M_PI * (j + 0.5) / n);
    tau[j] = 0.5 * (x + 1.0);
    v[j] = f(tau[j]);
  }
  return from_nodes(tau, v);
}

double MomentumProfile::eval(double t) const { return cheb_eval(cheb, 2.0 * t - 1.0); }
double MomentumProfile::deriv(double t) const {
  return cheb_eval(cheb_deriv(cheb), 2.0 * t - 1.0);
}
double MomentumProfile::deriv2(double t) const {
  return cheb_eval(cheb_deriv(cheb_deriv(cheb)), 2.0 * t - 1.0);
}

double MomentumProfile::boundary_defect() const {
  return std::max({std::abs(eval(0.0)), std::abs(eval(1.0)),
                   std::abs(deriv(0.0) - 1.0), std::abs(deriv(1.0) + 1.0)});
}

bool MomentumProfile::positive_inside(double tol) const {
  for (int j = 0; j < tau.size(); ++j)
    if (vals[j] < tol) return false;
  return true;
}

double momentum_scal(const MomentumProfile& pr, double kappa, int n, double tau) {
  const double p = kappa - n * tau;
  if (p <= 0.0) throw std::runtime_error("momentum_scal: class not positive");
  // (p phi)'' = p phi'' - 2 n phi'
  return (2.0 - p * pr.deriv2(tau) + 2.0 * n * pr.deriv(tau)) / p;
}

MomentumProfile natural_profile(int nnodes) {
  return MomentumProfile::from_function([](double t) { return t * (1.0 - t); }, nnodes);
}

double moment_of(const HermitianBundle& E, const TotalPoint& p) {
  const auto Hj = E.metric_jet(p.x, 1);
  Eigen::MatrixXcd H0(E.rank(), E.rank());
  for (int i = 0; i < E.rank(); ++i)
    for (int j = 0; j < E.rank(); ++j) H0(i, j) = Hj[i][j].value();
  return lambda_endo(p.v, H0)(1, 1).real();
}

CalabiSolution calabi_extremal(double kappa, int n, int nnodes) {
  // unknowns: nnodes Chebyshev coefficients of phi plus (c0, c1)
  const int neq = nnodes + 6;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(neq + 4, nnodes + 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(neq + 4);
  auto basis_rows = [&](double t, Eigen::VectorXd& v, Eigen::VectorXd& dv,
                        Eigen::VectorXd& ddv) {
    v.resize(nnodes);
    dv.resize(nnodes);
    ddv.resize(nnodes);
    for (int m = 0; m < nnodes; ++m) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nnodes);
      e[m] = 1.0;
      v[m] = cheb_eval(e, 2.0 * t - 1.0);
      dv[m] = cheb_eval(cheb_deriv(e), 2.0 * t - 1.0);
      ddv[m] = cheb_eval(cheb_deriv(cheb_deriv(e)), 2.0 * t - 1.0);
    }
  };
  Eigen::VectorXd v, dv, ddv;
  for (int i = 0; i < neq; ++i) {
    const double t = 0.5 * (std::cos(M_PI * (i + 0.5) / neq) + 1.0);
    const double p = kappa - n * t;
    basis_rows(t, v, dv, ddv);
    // (p phi)'' + p (c0 + c1 t) = 2
    A.row(i).head(nnodes) = p * ddv.transpose() - 2.0 * n * dv.transpose();
    A(i, nnodes) = p;
    A(i, nnodes + 1) = p * t;
    rhs[i] = 2.0;
  }
  const double wbc = 10.0;
  for (int b = 0; b < 4; ++b) {
    const double t = (b == 0 || b == 2) ? 0.0 : 1.0;
    basis_rows(t, v, dv, ddv);
    if (b < 2) {
      A.row(neq + b).head(nnodes) = wbc * v.transpose();
      rhs[neq + b] = 0.0;
    } else {
      A.row(neq + b).head(nnodes) = wbc * dv.transpose();
      rhs[neq + b] = wbc * (b == 2 ? 1.0 : -1.0);
    }
  }
  Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);

  CalabiSolution out;
  out.c0 = sol[nnodes];
  out.c1 = sol[nnodes + 1];
  Eigen::VectorXd tau(nnodes), vals(nnodes);
  Eigen::VectorXd coeffs = sol.head(nnodes);
  for (int j = 0; j < nnodes; ++j) {
    const double x = std::cos(M_PI * (j + 0.5) / nnodes);
    tau[j] = 0.5 * (x + 1.0);
    vals[j] = cheb_eval(coeffs, x);
  }
  out.profile = MomentumProfile::from_nodes(tau, vals);
  // residual measured on the scalar curvature: |S(tau) - (c0 + c1 tau)|
  double res = 0.0;
  for (int i = 0; i < 33; ++i) {
    const double t = (i + 0.5) / 33.0;
    res = std::max(res, std::abs(momentum_scal(out.profile, kappa, n, t) -
                                 (out.c0 + out.c1 * t)));
  }
  out.ode_residual = res;
  return out;
}

// ---------------------------------------------------------------------------

GeometryOverride HeSolveResult::metric_override(const HermitianBundle& E) const {
  GeometryOverride ov;
  const auto corr = log_corr;
  ov.metric = [&E, corr](const BasePoint& x, int nv) {
    JetMatrix H = E.metric_jet(x, nv);
    const int r = E.rank();
    for (int d = 0; d < r; ++d) {
      const Jet e = (-corr[d].jet_n(x, nv, 0)).exp();
      for (int j = 0; j < r; ++j) H[d][j] = H[d][j] * e;
    }
    return H;
  };
  return ov;
}

HeSolveResult he_solve(const HermitianBundle& E) {
  if (!E.polystable_split())
    throw std::runtime_error("bundle not polystable; HE unattainable");
  if (E.perturbation().kind == Perturbation::Kind::OffDiag)
    throw std::runtime_error(
        "he_solve: rotate off-diagonal perturbations into a diagonal gauge first");
  const BaseManifold* B = E.base();
  const int r = E.rank();
  HeSolveResult out;

  // Lambda(iF(H_d e^{-psi})) = mu + Delta(log(H_d/H_nat) - psi): the exact
  // correction is the mean-free part of log(H_d/H_nat), one projection per
  // summand.
  for (int d = 0; d < r; ++d) {
    Eigen::VectorXd vals(B->nodes().size());
    for (size_t i = 0; i < B->nodes().size(); ++i) {
      const BasePoint& x = B->nodes()[i].pt;
      const JetMatrix H = E.metric_jet(x, 1);
      double hnat = 1.0;
      if (B->kind() == BaseManifold::Kind::P1)
        hnat = std::pow(1.0 + std::norm(x.z[0]), -E.degrees()[d]);
      vals[i] = std::log(H[d][d].value().real() / hnat);
    }
    BaseField f = B->analyze(vals);
    f.a[0] = 0.0;  // constant conformal factors are gauge
    out.log_corr.push_back(f);
  }

  const GeometryOverride ov = out.metric_override(E);
  const double mu = E.slope();
  double res = 0.0;
  for (size_t i = 0; i < B->nodes().size(); i += 2) {
    const BasePoint& x = B->nodes()[i].pt;
    Eigen::RowVectorXcd e1 = Eigen::RowVectorXcd::Zero(r);
    e1[0] = 1.0;
    TotalFrame F(E, {x, e1}, &ov);
    const double g = F.base_pot().ddbar(0, 0).real();
    Eigen::MatrixXcd lam(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) lam(a, b) = F.curv_coeff()[a][b].value() / g;
    res = std::max(res,
                   (lam - mu * Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff());
  }
  out.residual = res;
  return out;
}

// ---------------------------------------------------------------------------

ReducedProblem::ReducedProblem(const HermitianBundle& E,
                               const approx::ApproxSolution* start, double k,
                               int nnodes)
    : E_(&E), start_(start), k_(k), nn_(nnodes) {
  tau0_.resize(nn_);
  weights_.resize(nn_);
  const int n = E.degrees()[0] - E.degrees()[1];
  const double kappa = k + E.degrees()[0];
  for (int j = 0; j < nn_; ++j) {
    const double x = std::cos(M_PI * (j + 0.5) / nn_);
    tau0_[j] = 0.5 * (x + 1.0);
    weights_[j] =
        (M_PI / nn_) * 0.5 * std::sqrt(1.0 - x * x) * (kappa - n * tau0_[j]);
    TotalPoint p;
    p.x = BasePoint{};
    p.v = Eigen::RowVectorXcd(2);
    p.v << 1.0, std::sqrt(tau0_[j] / (1.0 - tau0_[j]));
    pts_.push_back(p);
  }
}

Jet ReducedProblem::phi_total_jet(const TotalFrame& F, const Eigen::VectorXd& x) const {
  const Jet t0 = F.lambda_weight_jet(1);
  Jet xj = t0 * cplx(2.0) - cplx(1.0);
  Jet phi = cheb_eval_jet(x.head(nn_), xj);
  if (start_ != nullptr) phi += start_->phi_jet(F, k_);
  return phi;
}

Eigen::VectorXd ReducedProblem::residual(const Eigen::VectorXd& x) const {
  Eigen::VectorXd R(nn_);
  for (int j = 0; j < nn_; ++j) {
    TotalFrame F(*E_, pts_[j]);
    const Jet phi = phi_total_jet(F, x);
    Jet l(F.n(), x[nn_]);
    const Jet t0 = F.lambda_weight_jet(1);
    l += (Jet(F.n(), 1.0) - t0 * cplx(2.0)) * cplx(x[nn_ + 1] / k_);
    if (start_ != nullptr) l += start_->l_jet(F, k_);
    const Jet u = F.uk(k_) - phi;
    const double S = scal_from_potential(u);
    const double grad = grad_pair_potential(F.uk(k_), l, phi);
    R[j] = S - l.value().real() + 0.5 * grad;
  }
  return R;
}

Eigen::MatrixXd ReducedProblem::assemble_G(const Eigen::VectorXd& x) const {
  const int nu = nunknowns();
  Eigen::MatrixXd G(nn_, nu);
  const double h = 1e-6;
  for (int c = 0; c < nu; ++c) {
    Eigen::VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    G.col(c) = (residual(xp) - residual(xm)) / (2.0 * h);
  }
  return G;
}

void ReducedProblem::profile_of(const Eigen::VectorXd& x, Eigen::VectorXd& tau_new,
                                Eigen::VectorXd& phi_new) const {
  Eigen::VectorXd tnodes(nn_);
  for (int j = 0; j < nn_; ++j) {
    TotalFrame F(*E_, pts_[j]);
    const Jet u = F.uk(k_) - phi_total_jet(F, x);
    // d/ds along the orbit, pushed to the affine fiber chart by
    // xi'(zeta) = -f0_1 / (w_1 zeta - w_2).  The moment function must use
    // the potential of the projective representative (1, zeta), which
    // differs from the chart potential by log|f0_1 + xi w_1|^2.
    const cplx zeta = pts_[j].v[1] / pts_[j].v[0];
    const cplx f01 = F.fiber_center()[0];
    const cplx w1 = F.fiber_dirs()(0, 0), w2 = F.fiber_dirs()(0, 1);
    const cplx xip = -f01 / (w1 * zeta - w2);
    tnodes[j] = (zeta * xip * (u.d(1) - w1 / f01)).real();
  }
  tau_new = tnodes;
  // phi_new = d tau_new/ds = (d tau_new/d tau0) tau0 (1 - tau0)
  const Eigen::VectorXd cheb = cheb_from_nodes(tnodes);
  const Eigen::VectorXd dcheb = cheb_deriv(cheb);
  phi_new.resize(nn_);
  for (int j = 0; j < nn_; ++j)
    phi_new[j] =
        cheb_eval(dcheb, 2.0 * tau0_[j] - 1.0) * tau0_[j] * (1.0 - tau0_[j]);
}

double ReducedProblem::right_inverse_norm() const {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nunknowns());
  Eigen::MatrixXd G = assemble_G(x0);
  for (int j = 0; j < nn_; ++j) G.row(j) *= std::sqrt(weights_[j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const auto& sv = svd.singularValues();
  return 1.0 / sv[sv.size() - 1];
}

FixedPointState fixed_point_solve(const ReducedProblem& red, int max_iter, double tol) {
  FixedPointState st;
  st.x = Eigen::VectorXd::Zero(red.nunknowns());
  Eigen::MatrixXd G = red.assemble_G(st.x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  st.pk_norm = 1.0 / sv[sv.size() - 1];
  Eigen::VectorXd inv = sv;
  for (int i = 0; i < inv.size(); ++i)
    inv[i] = sv[i] > 1e-10 * sv[0] ? 1.0 / sv[i] : 0.0;

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd R = red.residual(st.x);
    const double rn = R.lpNorm<Eigen::Infinity>();
    st.history.push_back(rn);
    st.iterations = it;
    if (rn < tol) {
      st.converged = true;
      break;
    }
    if (it > 2 && rn > st.history[it - 1]) break;  // diverging: keep diagnostics
    st.x -= svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * R;
  }
  st.iterate_norm = st.x.norm();
  return st;
}

}  // namespace ruledk::solver
