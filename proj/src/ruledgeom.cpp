#include "ruledk/ruledgeom.hpp"

#include <cmath>
#include <stdexcept>

#include "ruledk/sphere.hpp"

namespace ruledk {

using pointalg::FormAtPoint;
using pointalg::JetMatrix;

HermitianBundle::HermitianBundle(const BaseManifold* base, std::vector<int> degrees,
                                 Perturbation pert)
    : base_(base), degrees_(std::move(degrees)), pert_(pert) {
  if (base_->m() != 1)
    throw std::invalid_argument("bundle: only 1-dimensional bases carry bundles here");
  if (base_->kind() == BaseManifold::Kind::Torus)
    for (int a : degrees_)
      if (a != 0) throw std::invalid_argument("bundle: torus bundles must be flat");
  if (pert_.kind == Perturbation::Kind::OffDiag && degrees_.size() >= 2 &&
      degrees_[0] != degrees_[1])
    throw std::invalid_argument(
        "bundle: off-diagonal perturbation needs equal leading degrees");
}

int HermitianBundle::degree_sum() const {
  int d = 0;
  for (int a : degrees_) d += a;
  return d;
}

double HermitianBundle::slope() const {
  return 2.0 * M_PI * degree_sum() / (rank() * base_->volume());
}

bool HermitianBundle::polystable_split() const {
  for (int a : degrees_)
    if (a != degrees_[0]) return false;
  return true;
}

JetMatrix HermitianBundle::metric_jet(const BasePoint& p, int nvars) const {
  const int r = rank();
  const Jet z = Jet::variable(nvars, 0, p.z[0]);
  const Jet rho = z * z.conj();
  JetMatrix H(r, std::vector<Jet>(r, Jet(nvars)));

  Jet chi(nvars), psi(nvars);
  if (base_->kind() == BaseManifold::Kind::P1) {
    chi = (cplx(1.0) - rho) / (cplx(1.0) + rho);  // sphere height
    if (p.chart[0] == 1) chi = -chi;
    psi = (z + z.conj()) / (cplx(1.0) + rho);     // sphere x-coordinate
  } else {
    const cplx ipi(0.0, M_PI);
    Jet e = (z * ipi + z.conj() * ipi).exp();     // exp(2 pi i x)
    chi = (e + e.conj()) * cplx(0.5);
    Jet e2 = (z * M_PI - z.conj() * M_PI).exp();  // exp(2 pi i y)
    psi = (e2 + e2.conj()) * cplx(0.5);
  }

  std::vector<Jet> half(r, Jet(nvars, 1.0));
  if (base_->kind() == BaseManifold::Kind::P1) {
    for (int i = 0; i < r; ++i)
      half[i] = (cplx(1.0) + rho).pow(-0.5 * degrees_[i]);
  }

  // H = H_nat^{1/2} exp(eps M) H_nat^{1/2}
  JetMatrix B = pointalg::jm_identity(r, nvars);
  if (pert_.kind != Perturbation::Kind::None && pert_.eps != 0.0) {
    JetMatrix M(r, std::vector<Jet>(r, Jet(nvars)));
    if (pert_.kind == Perturbation::Kind::Diag) {
      M[0][0] = chi;
      if (r > 1) M[1][1] = -chi;
    } else {
      M[0][1] = psi;
      M[1][0] = psi;
    }
    JetMatrix term = pointalg::jm_identity(r, nvars);
    for (int k = 1; k <= 14; ++k) {
      term = pointalg::jm_scale(pointalg::jm_mul(term, M), pert_.eps / k);
      B = pointalg::jm_add(B, term);
    }
  }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) H[i][j] = half[i] * B[i][j] * half[j];
  return H;
}

namespace {

JetMatrix jm_from_const(const Eigen::MatrixXcd& m, int nvars) {
  JetMatrix out(m.rows(), std::vector<Jet>(m.cols(), Jet(nvars)));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out[i][j] = Jet(nvars, m(i, j));
  return out;
}

Eigen::MatrixXcd jm_value(const JetMatrix& a) {
  Eigen::MatrixXcd m(a.size(), a[0].size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) m(i, j) = a[i][j].value();
  return m;
}

}  // namespace

TotalFrame::TotalFrame(const HermitianBundle& E, const TotalPoint& pt,
                       const GeometryOverride* ov)
    : E_(&E), pt_(pt) {
  r_ = E.rank();
  m_ = 1;
  n_ = m_ + r_ - 1;
  const JetMatrix Hraw =
      (ov && ov->metric) ? ov->metric(pt.x, n_) : E.metric_jet(pt.x, n_);

  // Normal holomorphic frame S(z) = S0 (I + (z - z0) A): the transformed
  // pairing matrix has value I and vanishing first derivatives at the center.
  const Eigen::MatrixXcd H0 = jm_value(Hraw);
  Eigen::LLT<Eigen::MatrixXcd> llt(H0);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("bundle metric not positive-definite");
  const Eigen::MatrixXcd L = llt.matrixL();
  const Eigen::MatrixXcd S0 = L.adjoint().inverse();

  JetMatrix S0j = jm_from_const(S0, n_);
  JetMatrix H1 = pointalg::jm_mul(pointalg::jm_mul(pointalg::jm_adjoint(S0j), Hraw), S0j);
  Eigen::MatrixXcd P(r_, r_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < r_; ++j) P(i, j) = H1[i][j].d(0);
  const Jet dz = Jet::variable(n_, 0, 0.0);
  JetMatrix corr = pointalg::jm_identity(r_, n_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < r_; ++j) corr[i][j] -= dz * P(i, j);
  H_ = pointalg::jm_mul(pointalg::jm_mul(pointalg::jm_adjoint(corr), H1), corr);

  const Eigen::MatrixXcd Hc = jm_value(H_);
  if ((Hc - Eigen::MatrixXcd::Identity(r_, r_)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::logic_error("normal frame: center value not identity");
  Hinv_ = pointalg::jm_inverse(H_);
  S_ = pointalg::jm_mul(S0j, corr);
  Sinv_ = pointalg::jm_inverse(S_);

  // fiber chart f(xi) = f0 + sum_j xi_j w_j, (f0; w_j) unitary rows at center.
  // Row components transform by f -> f S under the frame change.
  Eigen::RowVectorXcd f0 = pt.v * S0;
  f0_ = f0 / f0.norm();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(r_, r_);
  A.col(0) = f0_.adjoint();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  Eigen::MatrixXcd Qm = qr.householderQ();
  cplx ph = (f0_ * Qm.col(0))(0, 0);  // align q0 with f0^dag up to phase
  Qm.col(0) *= std::conj(ph) / std::abs(ph);
  wdirs_ = Eigen::MatrixXcd(r_ - 1, r_);
  for (int j = 1; j < r_; ++j) wdirs_.row(j - 1) = Qm.col(j).adjoint();

  frow_.assign(1, std::vector<Jet>(r_, Jet(n_)));
  for (int i = 0; i < r_; ++i) {
    Jet fi(n_, f0_[i]);
    for (int j = 0; j < r_ - 1; ++j)
      fi += Jet::variable(n_, 1 + j, 0.0) * wdirs_(j, i);
    frow_[0][i] = fi;
  }

  Jet Q(n_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < r_; ++j)
      Q += frow_[0][i] * Hinv_[i][j] * frow_[0][j].conj();
  Q_ = Q;
  ug_ = Q_.log();

  base_pot_ = [&] {
    if (ov && ov->base_potential) return ov->base_potential(pt.x, n_);
    const BaseManifold* B = E.base();
    const Jet z = Jet::variable(n_, 0, pt.x.z[0]);
    if (B->kind() == BaseManifold::Kind::P1)
      return (cplx(1.0) + z * z.conj()).log() * cplx(B->scale());
    return z * z.conj() * cplx(M_PI * B->scale());
  }();

  F_ = pointalg::jm_scale(
      pointalg::jm_dzbar(pointalg::jm_mul(Hinv_, pointalg::jm_dz(H_, 0)), 0), -1.0);
  lambda_.assign(r_, std::vector<Jet>(r_, Jet(n_)));
  const Jet Qinv = Q_.recip();
  for (int i = 0; i < r_; ++i) {
    Jet hf(n_);
    for (int k = 0; k < r_; ++k) hf += Hinv_[i][k] * frow_[0][k].conj();
    for (int j = 0; j < r_; ++j) lambda_[i][j] = hf * frow_[0][j] * Qinv;
  }
}

FormAtPoint TotalFrame::omega_g() const {
  return pointalg::kaehler_form_from_potential(ug_);
}

FormAtPoint TotalFrame::omega_base() const {
  return pointalg::kaehler_form_from_potential(base_pot_);
}

FormAtPoint TotalFrame::omega_k(double k) const {
  FormAtPoint w = omega_g() + omega_base() * cplx(k);
  if (!pointalg::positive_definite(w))
    throw std::runtime_error("k below positivity threshold");
  return w;
}

FormAtPoint TotalFrame::base_omega_form() const {
  Eigen::MatrixXcd g(1, 1);
  g(0, 0) = base_pot_.ddbar(0, 0);
  return FormAtPoint::from_matrix(g);
}

Jet TotalFrame::theta(const JetMatrix& u) const {
  Jet t(n_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < r_; ++j) t += lambda_[i][j] * u[j][i];
  return t;
}

Jet TotalFrame::theta_const(const Eigen::MatrixXcd& u) const {
  return theta(jm_from_const(u, n_));
}

Jet TotalFrame::theta_raw(const pointalg::JetMatrix& u_raw) const {
  // endomorphisms conjugate under the frame change: u_normal = S^{-1} u S
  return theta(pointalg::jm_mul(pointalg::jm_mul(Sinv_, u_raw), S_));
}

Jet TotalFrame::theta_raw_const(const Eigen::MatrixXcd& u_raw) const {
  return theta_raw(jm_from_const(u_raw, n_));
}

Jet TotalFrame::lambda_weight_jet(int i) const {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(r_, r_);
  e(i, i) = 1.0;
  return theta_raw_const(e);
}

double TotalFrame::f1() const {
  const FormAtPoint wg = omega_g();
  const FormAtPoint wb = omega_base();
  const FormAtPoint num = pointalg::wedge_pow(wg, r_);
  const FormAtPoint den =
      pointalg::wedge(pointalg::wedge_pow(wg, r_ - 1), wb) * cplx(static_cast<double>(r_));
  return pointalg::top_form_quotient(num, den).real();
}

Jet TotalFrame::beta_coeff_jet() const {
  Jet b(n_);
  for (int i = 0; i < r_; ++i) {
    Jet fF(n_);
    for (int k = 0; k < r_; ++k) fF += frow_[0][k] * F_[k][i];
    Jet hf(n_);
    for (int j = 0; j < r_; ++j) hf += Hinv_[i][j] * frow_[0][j].conj();
    b += fF * hf;
  }
  return b * Q_.recip();
}

FormAtPoint TotalFrame::beta_form() const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_, n_);
  g(0, 0) = beta_coeff_jet().value();
  return FormAtPoint::from_matrix(g);
}

Jet TotalFrame::f1_jet() const {
  return beta_coeff_jet() * base_pot_.dz(0).dzbar(0).recip();
}

Jet TotalFrame::log_fsum_jet(double k) const {
  return (Jet(n_, 1.0) + f1_jet() * cplx(1.0 / k)).log();
}

double TotalFrame::delta_V(const Jet& f) const {
  const FormAtPoint a = pointalg::i_dbar_del(f);
  const FormAtPoint wg = omega_g();
  const FormAtPoint wb = omega_base();
  const FormAtPoint num =
      pointalg::wedge(pointalg::wedge(a, pointalg::wedge_pow(wg, r_ - 2)), wb) *
      cplx(static_cast<double>(r_ - 1));
  const FormAtPoint den = pointalg::wedge(pointalg::wedge_pow(wg, r_ - 1), wb);
  return pointalg::top_form_quotient(num, den).real();
}

double TotalFrame::delta_H(const Jet& f) const {
  const FormAtPoint a = pointalg::i_dbar_del(f);
  const FormAtPoint wg = omega_g();
  const FormAtPoint wb = omega_base();
  const FormAtPoint num = pointalg::wedge(a, pointalg::wedge_pow(wg, r_ - 1));
  const FormAtPoint den = pointalg::wedge(pointalg::wedge_pow(wg, r_ - 1), wb);
  return pointalg::top_form_quotient(num, den).real();
}

double TotalFrame::delta_tilde_H(const Jet& f) const {
  return delta_H(f) - f1() * delta_V(f);
}

double TotalFrame::laplace_k(const Jet& f, double k) const {
  return pointalg::contract(pointalg::i_dbar_del(f), omega_k(k)).real();
}

FormAtPoint TotalFrame::block_H(const FormAtPoint& a) const {
  Eigen::MatrixXcd g(1, 1);
  g(0, 0) = a.matrix()(0, 0);
  return FormAtPoint::from_matrix(g);
}

FormAtPoint TotalFrame::block_V(const FormAtPoint& a) const {
  const Eigen::MatrixXcd g = a.matrix();
  Eigen::MatrixXcd v = g.bottomRightCorner(r_ - 1, r_ - 1);
  return FormAtPoint::from_matrix(v);
}

double TotalFrame::mixed_sup(const FormAtPoint& a) const {
  const Eigen::MatrixXcd g = a.matrix();
  double m = 0.0;
  for (int j = 1; j < n_; ++j)
    m = std::max({m, std::abs(g(0, j)), std::abs(g(j, 0))});
  return m;
}

cplx TotalFrame::tilde_contract_V(const FormAtPoint& a) const {
  const FormAtPoint av = block_V(a);
  const FormAtPoint wv = block_V(omega_g());
  const FormAtPoint num = pointalg::wedge(av, pointalg::wedge_pow(wv, r_ - 2)) *
                          cplx(static_cast<double>(r_ - 1));
  const FormAtPoint den = pointalg::wedge_pow(wv, r_ - 1);
  return pointalg::top_form_quotient(num, den);
}

FormAtPoint TotalFrame::promote(const FormAtPoint& base_form) const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_, n_);
  g(0, 0) = base_form.matrix()(0, 0);
  return FormAtPoint::from_matrix(g);
}

FormAtPoint TotalFrame::trace_curv_pullback() const {
  Jet tr(n_);
  for (int i = 0; i < r_; ++i) tr += F_[i][i];
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_, n_);
  g(0, 0) = tr.value();
  return FormAtPoint::from_matrix(g);
}

FormAtPoint TotalFrame::base_ricci_pullback() const {
  const Jet g = base_pot_.dz(0).dzbar(0);
  const Jet logg = g.log();
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n_, n_);
  R(0, 0) = -logg.ddbar(0, 0);
  return FormAtPoint::from_matrix(R);
}

FormAtPoint TotalFrame::trace_curv_vertical() const {
  JetMatrix gv(r_ - 1, std::vector<Jet>(r_ - 1, Jet(n_)));
  for (int i = 0; i < r_ - 1; ++i)
    for (int j = 0; j < r_ - 1; ++j) gv[i][j] = ug_.dz(1 + i).dzbar(1 + j);
  const Jet logdet = pointalg::jm_det(gv).log();
  return pointalg::i_dbar_del(logdet);
}

double TotalFrame::total_scal(double k) const {
  omega_k(k);  // positivity gate
  return scal_from_potential(uk(k));
}

FormAtPoint TotalFrame::ricci_k(double k) const { return ricci_from_potential(uk(k)); }

double TotalFrame::total_scal_bundle_route(double k) const {
  FormAtPoint alpha = base_ricci_pullback() - trace_curv_pullback() +
                      omega_g() * cplx(static_cast<double>(r_));
  const double lam = pointalg::contract(alpha, omega_k(k)).real();
  return lam + laplace_k(log_fsum_jet(k), k);
}

JetMatrix metric_jets_from_potential(const Jet& u) {
  const int n = u.nvars();
  JetMatrix g(n, std::vector<Jet>(n, Jet(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g[a][b] = u.dz(a).dzbar(b);
  return g;
}

FormAtPoint ricci_from_potential(const Jet& u) {
  const int n = u.nvars();
  const JetMatrix g = metric_jets_from_potential(u);
  const Jet logdet = pointalg::jm_det(g).log();
  Eigen::MatrixXcd R(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) R(a, b) = -logdet.ddbar(a, b);
  return FormAtPoint::from_matrix(R);
}

double scal_from_potential(const Jet& u) {
  const FormAtPoint ric = ricci_from_potential(u);
  const FormAtPoint w = pointalg::kaehler_form_from_potential(u);
  return pointalg::contract(ric, w).real();
}

Jet scal_jet_from_potential(const Jet& u) {
  const int n = u.nvars();
  const JetMatrix g = metric_jets_from_potential(u);
  const JetMatrix ginv = pointalg::jm_inverse(g);
  const Jet logdet = pointalg::jm_det(g).log();
  Jet s(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s -= ginv[b][a] * logdet.dz(a).dzbar(b);
  return s;
}

Jet laplace_jet(const Jet& f, const JetMatrix& ginv) {
  const int n = f.nvars();
  Jet s(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s -= ginv[b][a] * f.dz(a).dzbar(b);
  return s;
}

double scal_linearization(const Jet& u, const Jet& phi) {
  const int n = u.nvars();
  const JetMatrix g = metric_jets_from_potential(u);
  const JetMatrix ginv = pointalg::jm_inverse(g);
  const Jet lap_phi = laplace_jet(phi, ginv);
  const double lap2 = laplace_jet(lap_phi, ginv).value().real();
  const double S = scal_jet_from_potential(u).value().real();
  const FormAtPoint ric = ricci_from_potential(u);
  const FormAtPoint w = pointalg::kaehler_form_from_potential(u);
  const FormAtPoint a = pointalg::i_dbar_del(phi);
  double ric_term = 0.0;
  if (n >= 2) {
    const FormAtPoint num =
        pointalg::wedge(pointalg::wedge(a, ric), pointalg::wedge_pow(w, n - 2));
    const FormAtPoint den = pointalg::wedge_pow(w, n);
    ric_term = n * (n - 1.0) * pointalg::top_form_quotient(num, den).real();
  }
  return lap2 - S * lap_phi.value().real() + ric_term;
}

double grad_pair_potential(const Jet& u, const Jet& f, const Jet& g) {
  const int n = u.nvars();
  Eigen::MatrixXcd G(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) G(a, b) = u.ddbar(a, b);
  const Eigen::MatrixXcd Ginv = G.inverse();
  cplx s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s += Ginv(b, a) * (f.d(a) * g.dbar(b) + g.d(a) * f.dbar(b));
  return s.real();
}

FiberQuad fiber_quadrature(int nc, int nphi) {
  FiberQuad q;
  const Quad1D gl = gauss_legendre(nc);
  for (int ic = 0; ic < nc; ++ic) {
    const double c = gl.x[ic];
    const double rho = (1.0 - c) / (1.0 + c);
    const double rr = std::sqrt(rho);
    for (int k = 0; k < nphi; ++k) {
      const double phi = 2.0 * M_PI * k / nphi;
      Eigen::RowVectorXcd v(2);
      v[0] = 1.0;
      v[1] = rr * cplx(std::cos(phi), std::sin(phi));
      v /= v.norm();
      q.v.push_back(v);
      q.w.push_back(0.5 * gl.w[ic] * 2.0 * M_PI / nphi);
    }
  }
  q.volume = 2.0 * M_PI;
  return q;
}

Eigen::MatrixXcd lambda_endo(const Eigen::RowVectorXcd& v, const Eigen::MatrixXcd& H) {
  if (v.norm() == 0.0) throw std::invalid_argument("lambda: zero representative");
  const Eigen::MatrixXcd Hinv = H.inverse();
  const cplx Q = (v * Hinv * v.adjoint())(0, 0);
  return (Hinv * v.adjoint() * v) / Q;
}

std::vector<TotalPoint> fiber_points(const HermitianBundle& E, const BasePoint& x,
                                     const FiberQuad& q) {
  const JetMatrix Hj = E.metric_jet(x, 1);
  Eigen::MatrixXcd H0(E.rank(), E.rank());
  for (int i = 0; i < E.rank(); ++i)
    for (int j = 0; j < E.rank(); ++j) H0(i, j) = Hj[i][j].value();
  Eigen::LLT<Eigen::MatrixXcd> llt(H0);
  const Eigen::MatrixXcd Ldag = Eigen::MatrixXcd(llt.matrixL()).adjoint();
  // rows in an h(x)-unitary frame map back by f_raw = f_std * L^dag
  std::vector<TotalPoint> pts;
  pts.reserve(q.v.size());
  for (const auto& v : q.v) pts.push_back({x, v * Ldag});
  return pts;
}

}  // namespace ruledk
