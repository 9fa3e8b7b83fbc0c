#include "ruledk/approx.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ruledk/sphere.hpp"

namespace ruledk::approx {

using pointalg::FormAtPoint;
using pointalg::JetMatrix;

namespace {

// Vertical Laplacian as a jet: the defining wedge identity reduces to the
// trace over the fiber block (the pullback factor saturates all horizontal
// slots), valid at every point of the chart.
Jet delta_V_jet(const TotalFrame& F, const Jet& f) {
  const int n = F.n();
  JetMatrix gv(n - 1, std::vector<Jet>(n - 1, Jet(n)));
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) gv[i - 1][j - 1] = F.ug().dz(i).dzbar(j);
  const JetMatrix gvinv = pointalg::jm_inverse(gv);
  Jet s(n);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) s -= gvinv[j - 1][i - 1] * f.dz(i).dzbar(j);
  return s;
}

Eigen::MatrixXcd jm_value(const JetMatrix& a) {
  Eigen::MatrixXcd m(a.size(), a[0].size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) m(i, j) = a[i][j].value();
  return m;
}

Jet base_potential_jet(const BaseManifold* B, const BasePoint& x, int nvars) {
  const Jet z = Jet::variable(nvars, 0, x.z[0]);
  if (B->kind() == BaseManifold::Kind::P1)
    return (cplx(1.0) + z * z.conj()).log() * cplx(B->scale());
  return z * z.conj() * cplx(M_PI * B->scale());
}

}  // namespace

LiftData solve_uX(const HermitianBundle& E, const BaseField& b) {
  const BaseManifold* B = E.base();
  const int r = E.rank();
  if (E.perturbation().kind == Perturbation::Kind::OffDiag)
    throw std::invalid_argument("solve_uX: diagonal bundle metrics only");

  LiftData lift;
  lift.b = b;
  // Lambda del(dbar u - iota_X iF) = 0 decouples into one scalar Poisson
  // problem per summand:  Delta u_d = -((c_d/g) b_zbar)_z / g.
  const auto& nodes = B->nodes();
  std::vector<Eigen::VectorXd> rhs_re(r, Eigen::VectorXd(nodes.size()));
  std::vector<Eigen::VectorXd> rhs_im(r, Eigen::VectorXd(nodes.size()));
  for (size_t i = 0; i < nodes.size(); ++i) {
    const BasePoint& x = nodes[i].pt;
    const JetMatrix H = E.metric_jet(x, 1);
    const JetMatrix Hinv = pointalg::jm_inverse(H);
    const JetMatrix C = pointalg::jm_scale(
        pointalg::jm_dzbar(pointalg::jm_mul(Hinv, pointalg::jm_dz(H, 0)), 0), -1.0);
    const Jet g = base_potential_jet(B, x, 1).dz(0).dzbar(0);
    const Jet bj = b.jet(x);
    for (int d = 0; d < r; ++d) {
      const Jet w = C[d][d] * g.recip() * bj.dzbar(0);
      const cplx v = -(w.dz(0).value()) / g.value();
      rhs_re[d][i] = v.real();
      rhs_im[d][i] = v.imag();
    }
  }
  for (int d = 0; d < r; ++d) {
    BaseField fr = B->analyze(rhs_re[d]);
    BaseField fi = B->analyze(rhs_im[d]);
    fr.a[0] = 0.0;  // zero-mean gauge: minimal norm + trace normalization
    fi.a[0] = 0.0;
    lift.u_re.push_back(B->poisson_solve(fr));
    lift.u_im.push_back(B->poisson_solve(fi));
  }

  double res = 0.0;
  for (size_t i = 0; i < nodes.size(); i += 3) {
    const BasePoint& x = nodes[i].pt;
    const JetMatrix H = E.metric_jet(x, 1);
    const JetMatrix Hinv = pointalg::jm_inverse(H);
    const JetMatrix C = pointalg::jm_scale(
        pointalg::jm_dzbar(pointalg::jm_mul(Hinv, pointalg::jm_dz(H, 0)), 0), -1.0);
    const Jet g = base_potential_jet(B, x, 1).dz(0).dzbar(0);
    const Jet bj = b.jet(x);
    for (int d = 0; d < r; ++d) {
      const Jet ud = lift.u_re[d].jet(x) + lift.u_im[d].jet(x) * cplx(0.0, 1.0);
      const cplx dev = ud.dbar(0) - (C[d][d].value() / g.value()) * bj.dbar(0);
      res = std::max(res, std::abs(dev) / std::sqrt(g.value().real()));
    }
  }
  lift.lift_residual = res;
  return lift;
}

Jet theta_jet(const TotalFrame& F, const LiftData& lift) {
  const int r = F.r();
  const int n = F.n();
  JetMatrix u(r, std::vector<Jet>(r, Jet(n)));
  for (int d = 0; d < r; ++d)
    u[d][d] = lift.u_re[d].jet_n(F.point().x, n, 0) +
              lift.u_im[d].jet_n(F.point().x, n, 0) * cplx(0.0, 1.0);
  return F.theta_raw(u);
}

Jet lift_lk_jet(const TotalFrame& F, const LiftData& lift, double k) {
  return lift.b.jet_n(F.point().x, F.n(), 0) + theta_jet(F, lift) * cplx(1.0 / k);
}

LiftCheck check_lift(const TotalFrame& F, const LiftData& lift, double k) {
  const int n = F.n();
  const Jet l = lift_lk_jet(F, lift, k);
  const Jet u = F.uk(k);
  const JetMatrix g = metric_jets_from_potential(u);
  const JetMatrix ginv = pointalg::jm_inverse(g);
  // iota_V omega_k = k d(l): V^a = -i k sum_b l_bbar ginv[b][a]
  LiftCheck chk;
  for (int a = 0; a < n; ++a) {
    Jet Va(n);
    for (int bb = 0; bb < n; ++bb) Va += l.dzbar(bb) * ginv[bb][a];
    Va *= cplx(0.0, -k);
    for (int c = 0; c < n; ++c)
      chk.holomorphy = std::max(chk.holomorphy, std::abs(Va.dzbar(c).value()));
    if (a == 0) {
      const Jet bj = lift.b.jet_n(F.point().x, n, 0);
      const cplx Xz = cplx(0.0, -1.0) * bj.dbar(0) / F.base_pot().ddbar(0, 0);
      chk.projection = std::abs(Va.value() - Xz);
    }
  }
  return chk;
}

double linearize_scal(const TotalFrame& F, const Jet& phi, double k) {
  F.omega_k(k);  // positivity gate
  return scal_linearization(F.uk(k), phi);
}

double vertical_op(const TotalFrame& F, const Jet& phi) {
  const Jet dv = delta_V_jet(F, phi);
  return delta_V_jet(F, dv).value().real() - F.r() * dv.value().real();
}

double s1(const TotalFrame& F, bool scale2r) {
  const FormAtPoint wb = F.base_omega_form();
  const double S = pointalg::contract(F.block_H(F.base_ricci_pullback()), wb).real();
  const double ltr =
      pointalg::contract(F.block_H(F.trace_curv_pullback()), wb).real();
  const double traceless = F.f1() - ltr / F.r();
  const double c = scale2r ? 2.0 * F.r() : 1.0 / (2.0 * M_PI);
  return S + c * traceless;
}

double s1_normalization_ratio(int r) { return 4.0 * M_PI * r; }

double s11(const TotalFrame& F, const BaseField* eta, const EndoPerturbation* Phi,
           bool scale2r) {
  const int r = F.r();
  const int n = F.n();
  const double c = scale2r ? 2.0 * r : 1.0 / (2.0 * M_PI);
  double out = 0.0;

  const Jet g = F.base_pot().dz(0).dzbar(0);
  if (eta != nullptr) {
    // D*D eta - <grad S, grad eta>/2; the reference bases are cscK, so the
    // gradient correction vanishes, and the 2 Lam^2(F ^ i dbar del eta) term
    // is a (2,2)-form wedge on a curve.
    const BaseField dd = F.bundle().base()->lichnerowicz(*eta);
    out += dd.value(F.point().x);
  }
  if (Phi != nullptr) {
    JetMatrix raw(r, std::vector<Jet>(r, Jet(n)));
    const Jet amp = Phi->amp.jet_n(F.point().x, n, 0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) raw[i][j] = amp * Phi->mat(i, j);
    JetMatrix Pn = pointalg::jm_mul(
        pointalg::jm_mul(pointalg::jm_inverse(F.frame_change()), raw), F.frame_change());
    // i dbar del_A Phi at the center: entrywise i dbar del plus [F, Phi]
    Eigen::MatrixXcd M(r, r);
    const Eigen::MatrixXcd C = jm_value(F.curv_coeff());
    const Eigen::MatrixXcd P0 = jm_value(Pn);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) M(i, j) = -Pn[i][j].dz(0).dzbar(0).value();
    M += C * P0 - P0 * C;
    M /= g.value();
    M -= (M.trace() / static_cast<double>(r)) * Eigen::MatrixXcd::Identity(r, r);
    const Eigen::MatrixXcd lam = jm_value(F.lambda());
    out += c * (lam * M).trace().real();
  }
  return out;
}

double s11_fd(const HermitianBundle& E, const TotalPoint& pt, const BaseField* eta,
              const EndoPerturbation* Phi, double t, bool scale2r) {
  auto frame_at = [&](double tt) {
    GeometryOverride ov;
    if (Phi != nullptr) {
      ov.metric = [&E, Phi, tt](const BasePoint& x, int nv) {
        JetMatrix H = E.metric_jet(x, nv);
        const Jet amp = Phi->amp.jet_n(x, nv, 0);
        JetMatrix P(E.rank(), std::vector<Jet>(E.rank(), Jet(nv)));
        for (int i = 0; i < E.rank(); ++i)
          for (int j = 0; j < E.rank(); ++j)
            P[i][j] = amp * (Phi->mat(i, j) * tt);
        return pointalg::jm_add(H, pointalg::jm_mul(H, P));  // H (I + t Phi)
      };
    }
    if (eta != nullptr) {
      ov.base_potential = [&E, eta, tt](const BasePoint& x, int nv) {
        return base_potential_jet(E.base(), x, nv) - eta->jet_n(x, nv, 0) * cplx(tt);
      };
    }
    return TotalFrame(E, pt, &ov);
  };
  return (s1(frame_at(t), scale2r) - s1(frame_at(-t), scale2r)) / (2.0 * t);
}

// ----------------------------------------------------------------------------

Jet ApproxSolution::phi_jet(const TotalFrame& F, double k) const {
  const int n = F.n();
  Jet phi = eta2.jet_n(F.point().x, n, 0);
  if (p >= 2) {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = -1.0;
    phi += psi2.jet_n(F.point().x, n, 0) * F.theta_raw_const(D) * cplx(1.0 / k);
    const Jet cf = Jet(n, 1.0) - F.lambda_weight_jet(1) * cplx(2.0);
    for (size_t l = 0; l < phi2_modes.size(); ++l) {
      const int deg = static_cast<int>(l) + 2;
      auto P = legendre_derivs<Jet>(deg, 0, cf);
      phi += phi2_modes[l].jet_n(F.point().x, n, 0) * P[deg][0] * cplx(1.0 / (k * k));
    }
  }
  return phi;
}

Jet ApproxSolution::l_jet(const TotalFrame& F, double k) const {
  Jet l(F.n(), b0 + b1 / k + b2 / (k * k));
  l += F.theta_raw_const(U0) * cplx(1.0 / k);
  l += F.theta_raw_const(U1) * cplx(1.0 / (k * k));
  return l;
}

double ApproxSolution::residual(const TotalFrame& F, double k) const {
  const Jet phi = phi_jet(F, k);
  const Jet l = l_jet(F, k);
  const Jet u = F.uk(k) - phi;
  const double S = scal_from_potential(u);
  const double grad = grad_pair_potential(F.uk(k), l, phi);
  return S - l.value().real() + 0.5 * grad;
}

std::string ApproxSolution::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["b"] = {b0, b1, b2};
  j["vertical_u0_diag"] = {U0(0, 0).real(), U0(1, 1).real()};
  j["vertical_u1_diag"] = {U1(0, 0).real(), U1(1, 1).real()};
  j["eta2"] = std::vector<double>(eta2.a.data(), eta2.a.data() + eta2.a.size());
  j["psi2"] = std::vector<double>(psi2.a.data(), psi2.a.data() + psi2.a.size());
  j["fiber_band"] = fiber_band;
  j["phi2_modes"] = nlohmann::json::array();
  for (const auto& m : phi2_modes)
    j["phi2_modes"].push_back(
        std::vector<double>(m.a.data(), m.a.data() + m.a.size()));
  return j.dump(2);
}

ApproxSolution build_approx(const HermitianBundle& E, int p) {
  if (p > 2) throw std::invalid_argument("build_approx: orders beyond 2 not supported");
  if (E.rank() != 2) throw std::invalid_argument("build_approx: rank-2 bundles only");
  const BaseManifold* B = E.base();

  ApproxSolution sol;
  sol.E = &E;
  sol.p = p;
  sol.b0 = 2.0;
  sol.U0 = Eigen::MatrixXcd::Zero(2, 2);
  sol.U1 = Eigen::MatrixXcd::Zero(2, 2);
  sol.eta2 = B->zero_field();
  sol.psi2 = B->zero_field();

  // fiber sampling: zonal Legendre modes in the latitude c_f = 1 - 2 tau
  const int nc = 10, nphi = 8, lmax = 6;
  const Quad1D gl = gauss_legendre(nc);
  const auto& nodes = B->nodes();
  const size_t nb = nodes.size();

  FiberQuad q;
  std::vector<double> fw;  // probability weights
  for (int ic = 0; ic < nc; ++ic)
    for (int ip = 0; ip < nphi; ++ip) {
      const double c = gl.x[ic];
      const double rho = (1.0 - c) / (1.0 + c);
      const double phi = 2.0 * M_PI * ip / nphi;
      Eigen::RowVectorXcd v(2);
      v[0] = 1.0;
      v[1] = std::sqrt(rho) * cplx(std::cos(phi), std::sin(phi));
      q.v.push_back(v / v.norm());
      q.w.push_back(0.5 * gl.w[ic] * 2.0 * M_PI / nphi);
      fw.push_back(q.w.back() / (2.0 * M_PI));
    }
  q.volume = 2.0 * M_PI;

  // Legendre values at the fiber latitudes, P[ic][l]
  std::vector<std::vector<double>> Pl(nc, std::vector<double>(lmax + 1));
  for (int ic = 0; ic < nc; ++ic) {
    auto P = legendre_derivs<double>(lmax, 0, gl.x[ic]);
    for (int l = 0; l <= lmax; ++l) Pl[ic][l] = P[l][0];
  }

  Eigen::MatrixXd s1_grid(nb, nc * nphi), s2_grid(nb, nc * nphi);
  for (size_t ib = 0; ib < nb; ++ib) {
    auto pts = fiber_points(E, nodes[ib].pt, q);
    for (size_t jf = 0; jf < pts.size(); ++jf) {
      const auto rec = expansion::scal_series(TotalFrame(E, pts[jf]));
      s1_grid(ib, jf) = rec.s1;
      s2_grid(ib, jf) = rec.s2;
    }
  }
  auto fiber_mode = [&](const Eigen::MatrixXd& grid, size_t ib, int l) {
    double s = 0.0;
    for (int ic = 0; ic < nc; ++ic)
      for (int ip = 0; ip < nphi; ++ip)
        s += fw[ic * nphi + ip] * grid(ib, ic * nphi + ip) * Pl[ic][l];
    return (2.0 * l + 1.0) * s;  // <P_l, P_l> = 1/(2l+1), probability measure
  };
  auto fiber_residual = [&](const Eigen::MatrixXd& grid, size_t ib) {
    std::vector<double> coef(lmax + 1);
    for (int l = 0; l <= lmax; ++l) coef[l] = fiber_mode(grid, ib, l);
    double worst = 0.0;
    for (int ic = 0; ic < nc; ++ic)
      for (int ip = 0; ip < nphi; ++ip) {
        double v = grid(ib, ic * nphi + ip);
        for (int l = 0; l <= lmax; ++l) v -= coef[l] * Pl[ic][l];
        worst = std::max(worst, std::abs(v));
      }
    return worst;
  };

  // ---- order 1: b1 from the base part, U0 from the W part -----------------
  Eigen::VectorXd e0(nb), e1(nb);
  for (size_t ib = 0; ib < nb; ++ib) {
    e0[ib] = fiber_mode(s1_grid, ib, 0);
    e1[ib] = fiber_mode(s1_grid, ib, 1);
  }
  const BaseField s1_base = B->analyze(e0);
  sol.b1 = B->integrate(s1_base) / B->volume();
  double dev = 0.0;
  for (size_t ib = 0; ib < nb; ++ib) dev = std::max(dev, std::abs(e0[ib] - sol.b1));
  if (dev > 1e-7)
    throw std::runtime_error(
        "build_approx: base part of s1 is not constant on this cscK base");
  const double c1 = e1.sum() / nb;
  for (size_t ib = 0; ib < nb; ++ib) dev = std::max(dev, std::abs(e1[ib] - c1));
  if (dev > 1e-7)
    throw std::runtime_error(
        "build_approx: order-1 W component is not a holomorphic vertical "
        "Hamiltonian (metric neither Hermitian-Einstein nor natural split)");
  sol.U0 << c1, 0.0, 0.0, -c1;  // theta = c1 P_1(c_f)
  if (p < 2) return sol;

  // ---- order 2 -------------------------------------------------------------
  //   l=0 :  e0 + D*D eta2 - b2 = 0
  //   l=1 :  e1 + 2r Delta psi2 - u1 = 0
  //   l>=2:  e_l + lam_l (lam_l - r) phi2_l = 0
  Eigen::VectorXd f0(nb), f1m(nb);
  std::vector<Eigen::VectorXd> fh(lmax - 1, Eigen::VectorXd(nb));
  double high_res = 0.0;
  for (size_t ib = 0; ib < nb; ++ib) {
    f0[ib] = fiber_mode(s2_grid, ib, 0);
    f1m[ib] = fiber_mode(s2_grid, ib, 1);
    for (int l = 2; l <= lmax; ++l) fh[l - 2][ib] = fiber_mode(s2_grid, ib, l);
    high_res = std::max(high_res, fiber_residual(s2_grid, ib));
  }
  if (high_res > 1e-6)
    throw std::runtime_error(
        "build_approx: vertical solve: residual outside the zonal fiber band "
        "(m != 0 or l > 6 component)");

  BaseField e0f = B->analyze(f0);
  auto ham = B->ham_basis();
  BaseField b2f = B->zero_field();
  for (const auto& hf : ham.n_basis) b2f += hf * B->l2_inner(e0f, hf);
  sol.b2 = b2f.a[0] / std::sqrt(B->volume());
  BaseField rhs = b2f - e0f;
  BaseField eta2 = B->zero_field();
  for (int i = 0; i < B->nbasis(); ++i)
    if (std::abs(B->dsd_eig(i)) > 1e-9) eta2.a[i] = rhs.a[i] / B->dsd_eig(i);
  sol.eta2 = eta2;

  BaseField e1f = B->analyze(f1m);
  const double u1 = B->integrate(e1f) / B->volume();
  sol.U1 << u1, 0.0, 0.0, -u1;
  BaseField prhs = (B->constant_field(u1) - e1f) * (1.0 / (2.0 * E.rank()));
  sol.psi2 = B->poisson_solve(prhs);

  for (int l = 2; l <= lmax; ++l) {
    const double lam = l * (l + 1.0);
    BaseField m = B->analyze(fh[l - 2]);
    sol.phi2_modes.push_back(m * (-1.0 / (lam * (lam - 2.0))));
  }
  sol.fiber_band = lmax;
  return sol;
}

}  // namespace ruledk::approx
