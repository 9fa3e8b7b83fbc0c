#include "ruledk/basegeom.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ruledk/sphere.hpp"

namespace ruledk {

namespace {
const SphereHarmonics& sh_cache(int band, double scale) {
  static std::map<std::pair<int, double>, SphereHarmonics> cache;
  auto key = std::make_pair(band, scale);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, SphereHarmonics(band, scale)).first;
  return it->second;
}
}  // namespace

double BaseField::value(const BasePoint& p) const {
  double v = 0.0;
  for (int i = 0; i < M->nbasis(); ++i)
    if (a[i] != 0.0) v += a[i] * M->basis_value(i, p);
  return v;
}

Jet BaseField::jet(const BasePoint& p) const {
  Jet j(M->m());
  for (int i = 0; i < M->nbasis(); ++i)
    if (a[i] != 0.0) j += M->basis_jet(i, p) * cplx(a[i]);
  return j;
}

Jet BaseField::jet_n(const BasePoint& p, int nvars, int slot) const {
  if (M->kind() == BaseManifold::Kind::P1) {
    // one recurrence sweep for all harmonics
    const auto& sh = sh_cache(M->band(), M->scale());
    auto jets = sh.all_jets(p.chart[0], p.z[0], nvars, slot);
    Jet j(nvars);
    for (int i = 0; i < M->nbasis(); ++i)
      if (a[i] != 0.0) j += jets[i] * cplx(a[i]);
    return j;
  }
  Jet j(nvars);
  for (int i = 0; i < M->nbasis(); ++i)
    if (a[i] != 0.0) j += M->basis_jet_n(i, p, nvars, slot) * cplx(a[i]);
  return j;
}

BaseManifold BaseManifold::p1(int band, double scale) {
  BaseManifold b;
  b.kind_ = Kind::P1;
  b.m_ = 1;
  b.band_ = band;
  b.scale_ = scale;
  b.build_p1();
  return b;
}

BaseManifold BaseManifold::torus(int band, double scale) {
  BaseManifold b;
  b.kind_ = Kind::Torus;
  b.m_ = 1;
  b.band_ = band;
  b.scale_ = scale;
  b.build_torus();
  return b;
}

BaseManifold BaseManifold::p1xp1(int band) {
  BaseManifold b;
  b.kind_ = Kind::P1xP1;
  b.m_ = 2;
  b.band_ = band;
  b.scale_ = 1.0;
  b.build_p1xp1();
  return b;
}

void BaseManifold::build_p1() {
  const auto& sh = sh_cache(band_, scale_);
  for (int i = 0; i < sh.size(); ++i) {
    const auto& ix = sh.index(i);
    sh_.push_back({ix.l, ix.m, ix.parity});
    const double lam = ix.l * (ix.l + 1.0) / scale_;
    lap_.push_back(lam);
    dsd_.push_back(lam * (lam - 2.0 / scale_));
  }
  for (const auto& n : sh.nodes()) {
    Node q;
    q.pt.chart = {n.chart, 0};
    q.pt.z = {n.z, 0.0};
    q.w = n.w;
    nodes_.push_back(q);
  }
}

void BaseManifold::build_torus() {
  // real Fourier modes cos/sin(2 pi (p x + q y)), (p,q) > (0,0) lexicographically
  modes_.push_back({0, 0, 0, 0});
  lap_.push_back(0.0);
  for (int p = 0; p <= band_; ++p) {
    for (int q = -band_; q <= band_; ++q) {
      if (p == 0 && q <= 0) continue;
      for (int parity = 0; parity < 2; ++parity) {
        modes_.push_back({p, q, parity, 0});
        lap_.push_back(M_PI * (p * p + q * q) / scale_);
      }
    }
  }
  for (double l : lap_) dsd_.push_back(l * l);
  const int n1 = 2 * band_ + 3;
  const double vol = 2.0 * M_PI * scale_;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n1; ++j) {
      Node q;
      q.pt.chart = {0, 0};
      q.pt.z = {cplx((i + 0.5) / n1, (j + 0.5) / n1), 0.0};
      q.w = vol / (n1 * n1);
      nodes_.push_back(q);
    }
  }
}

void BaseManifold::build_p1xp1() {
  factor_ = std::make_unique<BaseManifold>(BaseManifold::p1(band_, 1.0));
  const int nb = factor_->nbasis();
  for (int i1 = 0; i1 < nb; ++i1) {
    for (int i2 = 0; i2 < nb; ++i2) {
      modes_.push_back({i1, i2, 0, 0});
      const double lam = factor_->lap_eig(i1) + factor_->lap_eig(i2);
      lap_.push_back(lam);
      dsd_.push_back(lam * (lam - 2.0));
    }
  }
  for (const auto& n1 : factor_->nodes()) {
    for (const auto& n2 : factor_->nodes()) {
      Node q;
      q.pt.chart = {n1.pt.chart[0], n2.pt.chart[0]};
      q.pt.z = {n1.pt.z[0], n2.pt.z[0]};
      q.w = n1.w * n2.w;
      nodes_.push_back(q);
    }
  }
}

double BaseManifold::volume() const {
  if (kind_ == Kind::P1xP1) return 4.0 * M_PI * M_PI;
  return 2.0 * M_PI * scale_;
}

double BaseManifold::scal_reference() const {
  switch (kind_) {
    case Kind::P1: return 2.0 / scale_;
    case Kind::Torus: return 0.0;
    case Kind::P1xP1: return 4.0;
  }
  return 0.0;
}

double BaseManifold::basis_value(int i, const BasePoint& p) const {
  switch (kind_) {
    case Kind::P1:
      return sh_cache(band_, scale_).value(i, p.chart[0], p.z[0]);
    case Kind::Torus: {
      if (i == 0) return 1.0 / std::sqrt(volume());
      const auto& md = modes_[i];
      const double x = p.z[0].real(), y = p.z[0].imag();
      const double arg = 2.0 * M_PI * (md[0] * x + md[1] * y);
      const double nrm = std::sqrt(2.0 / volume());
      return nrm * (md[2] == 0 ? std::cos(arg) : std::sin(arg));
    }
    case Kind::P1xP1: {
      const auto& md = modes_[i];
      BasePoint p1{{p.chart[0], 0}, {p.z[0], 0.0}};
      BasePoint p2{{p.chart[1], 0}, {p.z[1], 0.0}};
      return factor_->basis_value(md[0], p1) * factor_->basis_value(md[1], p2);
    }
  }
  return 0.0;
}

Jet BaseManifold::basis_jet(int i, const BasePoint& p) const {
  return basis_jet_n(i, p, m_, 0);
}

Jet BaseManifold::basis_jet_n(int i, const BasePoint& p, int nvars, int slot) const {
  switch (kind_) {
    case Kind::P1:
      return sh_cache(band_, scale_).jet(i, p.chart[0], p.z[0], nvars, slot);
    case Kind::Torus: {
      if (i == 0) return Jet(nvars, 1.0 / std::sqrt(volume()));
      const auto& md = modes_[i];
      // exp(2 pi i (p x + q y)) in terms of (z, zbar)
      const Jet zj = Jet::variable(nvars, slot, p.z[0]);
      const cplx ip = cplx(0.0, M_PI);
      const Jet arg = zj * (ip * cplx(md[0]) + M_PI * cplx(md[1])) +
                      zj.conj() * (ip * cplx(md[0]) - M_PI * cplx(md[1]));
      const Jet e = arg.exp();
      const double nrm = std::sqrt(2.0 / volume());
      Jet re = (e + e.conj()) * cplx(0.5);
      Jet im = (e - e.conj()) * cplx(0.0, -0.5);
      return (md[2] == 0 ? re : im) * cplx(nrm);
    }
    case Kind::P1xP1: {
      const auto& md = modes_[i];
      const auto& sh = sh_cache(band_, 1.0);
      Jet j1 = sh.jet(md[0], p.chart[0], p.z[0], nvars, slot);
      Jet j2 = sh.jet(md[1], p.chart[1], p.z[1], nvars, slot + 1);
      return j1 * j2;
    }
  }
  return Jet(nvars);
}

Jet BaseManifold::potential_jet(const BasePoint& p) const {
  switch (kind_) {
    case Kind::P1: {
      const Jet zj = Jet::variable(1, 0, p.z[0]);
      return (cplx(1.0) + zj * zj.conj()).log() * cplx(scale_);
    }
    case Kind::Torus: {
      const Jet zj = Jet::variable(1, 0, p.z[0]);
      return zj * zj.conj() * cplx(M_PI * scale_);
    }
    case Kind::P1xP1: {
      const Jet z1 = Jet::variable(2, 0, p.z[0]);
      const Jet z2 = Jet::variable(2, 1, p.z[1]);
      return (cplx(1.0) + z1 * z1.conj()).log() + (cplx(1.0) + z2 * z2.conj()).log();
    }
  }
  return Jet(m_);
}

BaseField BaseManifold::basis_field(int i) const {
  BaseField f = zero_field();
  f.a[i] = 1.0;
  return f;
}

BaseField BaseManifold::constant_field(double c) const {
  BaseField f = zero_field();
  f.a[0] = c * std::sqrt(volume());
  return f;
}

BaseField BaseManifold::analyze(const Eigen::VectorXd& node_values) const {
  if (kind_ == Kind::P1xP1)
    throw std::runtime_error("basegeom: analysis not supported on product bases");
  BaseField f = zero_field();
  for (int i = 0; i < nbasis(); ++i) {
    double s = 0.0;
    for (size_t k = 0; k < nodes_.size(); ++k)
      s += nodes_[k].w * node_values[k] * basis_value(i, nodes_[k].pt);
    f.a[i] = s;
  }
  return f;
}

double BaseManifold::integrate(const Eigen::VectorXd& node_values) const {
  double s = 0.0;
  for (size_t k = 0; k < nodes_.size(); ++k) s += nodes_[k].w * node_values[k];
  return s;
}

double BaseManifold::integrate(const BaseField& f) const {
  return f.a[0] * std::sqrt(volume());
}

BasePoint BaseManifold::random_point(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uc(-1.0, 1.0), uphi(0.0, 2.0 * M_PI),
      u01(0.0, 1.0);
  auto sample_p1 = [&]() -> std::pair<int, cplx> {
    const double c = uc(rng), phi = uphi(rng);
    double rho = (1.0 - std::abs(c)) / (1.0 + std::abs(c));
    cplx z = std::sqrt(rho) * cplx(std::cos(phi), std::sin(phi));
    return {c >= 0.0 ? 0 : 1, z};
  };
  BasePoint p;
  switch (kind_) {
    case Kind::P1: {
      auto [ch, z] = sample_p1();
      p.chart[0] = ch;
      p.z[0] = z;
      break;
    }
    case Kind::Torus:
      p.z[0] = cplx(u01(rng), u01(rng));
      break;
    case Kind::P1xP1: {
      auto [c1, z1] = sample_p1();
      auto [c2, z2] = sample_p1();
      p.chart = {c1, c2};
      p.z = {z1, z2};
      break;
    }
  }
  return p;
}

BasePoint BaseManifold::act_rotation(const BasePoint& p, double angle) const {
  BasePoint q = p;
  const cplx rot(std::cos(angle), std::sin(angle));
  switch (kind_) {
    case Kind::P1:
      q.z[0] = p.chart[0] == 0 ? p.z[0] * rot : p.z[0] * std::conj(rot);
      break;
    case Kind::Torus: {
      double x = p.z[0].real() + angle / (2.0 * M_PI);
      x -= std::floor(x);
      q.z[0] = cplx(x, p.z[0].imag());
      break;
    }
    case Kind::P1xP1:
      q.z[0] = p.chart[0] == 0 ? p.z[0] * rot : p.z[0] * std::conj(rot);
      break;
  }
  return q;
}

BaseField BaseManifold::laplace(const BaseField& f) const {
  BaseField g = f;
  for (int i = 0; i < nbasis(); ++i) g.a[i] *= lap_[i];
  return g;
}

BaseField BaseManifold::poisson_solve(const BaseField& rhs) const {
  const double mean = integrate(rhs);
  if (std::abs(mean) > 1e-9 * (1.0 + rhs.a.norm()))
    throw std::runtime_error("rhs not orthogonal to constants");
  BaseField u = rhs;
  u.a[0] = 0.0;
  for (int i = 1; i < nbasis(); ++i) u.a[i] /= lap_[i];
  return u;
}

BaseField BaseManifold::lichnerowicz(const BaseField& f) const {
  BaseField g = f;
  for (int i = 0; i < nbasis(); ++i) g.a[i] *= dsd_[i];
  return g;
}

pointalg::FormAtPoint BaseManifold::omega_form(const BasePoint& p, const BaseField* eta,
                                               double t) const {
  Jet u = potential_jet(p);
  if (eta != nullptr && t != 0.0) u -= eta->jet(p) * cplx(t);
  return pointalg::kaehler_form_from_potential(u);
}

pointalg::FormAtPoint BaseManifold::ricci(const BasePoint& p, const BaseField* eta,
                                          double t) const {
  Jet u = potential_jet(p);
  if (eta != nullptr && t != 0.0) u -= eta->jet(p) * cplx(t);
  pointalg::JetMatrix g(m_, std::vector<Jet>(m_, Jet(m_)));
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) g[a][b] = u.dz(a).dzbar(b);
  const Jet logdet = pointalg::jm_det(g).log();
  Eigen::MatrixXcd R(m_, m_);
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) R(a, b) = -logdet.ddbar(a, b);
  if (std::abs(pointalg::jm_det(g).value()) < 1e-14)
    throw std::runtime_error("ricci: metric matrix not invertible");
  return pointalg::FormAtPoint::from_matrix(R);
}

double BaseManifold::scal(const BasePoint& p, const BaseField* eta, double t) const {
  const auto ric = ricci(p, eta, t);
  const auto om = omega_form(p, eta, t);
  return pointalg::contract(ric, om).real();
}

double BaseManifold::grad_pair(const Jet& f, const Jet& g,
                               const pointalg::FormAtPoint& omega) const {
  const Eigen::MatrixXcd Ginv = omega.matrix().inverse();
  cplx s = 0.0;
  const int n = f.nvars();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s += Ginv(b, a) * (f.d(a) * g.dbar(b) + g.d(a) * f.dbar(b));
  return s.real();
}

double BaseManifold::poisson_bracket(const Jet& f, const Jet& g,
                                     const pointalg::FormAtPoint& omega) const {
  const Eigen::MatrixXcd Ginv = omega.matrix().inverse();
  cplx s = 0.0;
  const int n = f.nvars();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s += Ginv(b, a) * (f.dbar(b) * g.d(a) - f.d(a) * g.dbar(b));
  return (cplx(0.0, -1.0) * s).real();
}

BaseManifold::HamiltonianSpace BaseManifold::ham_basis(bool trivial_torus) const {
  HamiltonianSpace H;
  std::vector<int> kernel;
  for (int i = 0; i < nbasis(); ++i)
    if (std::abs(dsd_[i]) < 1e-9) kernel.push_back(i);
  for (int i : kernel) H.n_basis.push_back(basis_field(i));

  // tbar: average over the S^1 action (kills the non-invariant kernel elements)
  const int nk = static_cast<int>(kernel.size());
  for (int j = 0; j < nk; ++j) {
    if (trivial_torus) {
      if (kernel[j] == 0) H.tbar.push_back(j);
      continue;
    }
    const auto& f = H.n_basis[j];
    double dev = 0.0;
    for (int s = 1; s <= 4; ++s) {
      const double ang = 2.0 * M_PI * s / 5.0;
      for (size_t k = 0; k < nodes_.size(); k += 7) {
        const auto q = act_rotation(nodes_[k].pt, ang);
        dev = std::max(dev, std::abs(f.value(q) - f.value(nodes_[k].pt)));
      }
    }
    if (dev < 1e-8) H.tbar.push_back(j);
  }

  // kbar: commutant of tbar inside Nbar by Poisson-bracket tests
  for (int j = 0; j < nk; ++j) {
    double dev = 0.0;
    for (int tj : H.tbar) {
      if (kernel[tj] == 0) continue;  // constants commute with everything
      for (size_t k = 0; k < nodes_.size(); k += 11) {
        const auto om = omega_form(nodes_[k].pt);
        const Jet fj = H.n_basis[j].jet(nodes_[k].pt);
        const Jet gj = H.n_basis[tj].jet(nodes_[k].pt);
        dev = std::max(dev, std::abs(poisson_bracket(fj, gj, om)));
      }
    }
    if (dev < 1e-7) H.kbar.push_back(j);
  }
  return H;
}

}  // namespace ruledk
