#include "ruledk/sphere.hpp"

#include <cmath>
#include <stdexcept>

namespace ruledk {

Quad1D gauss_legendre(int n) {
  // Newton iteration on Legendre polynomials (Golub-Welsch is overkill here).
  Quad1D q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 1; l < n; ++l) {
        double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int l = 1; l < n; ++l) {
      double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    q.x[n - 1 - i] = x;
    q.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

SphereHarmonics::SphereHarmonics(int band, double scale) : L_(band), scale_(scale) {
  for (int l = 0; l <= L_; ++l) {
    idx_.push_back({l, 0, 0});
    for (int m = 1; m <= l; ++m) {
      idx_.push_back({l, m, 0});
      idx_.push_back({l, m, 1});
    }
  }
  norm_.resize(idx_.size());
  for (size_t i = 0; i < idx_.size(); ++i) {
    const int l = idx_[i].l, m = idx_[i].m;
    if (m == 0) {
      norm_[i] = std::sqrt((2.0 * l + 1.0) / (2.0 * M_PI * scale_));
    } else {
      double ratio = 1.0;  // (l-m)!/(l+m)!
      for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
      norm_[i] = std::pow(2.0, m - 1) * std::sqrt((2.0 * l + 1.0) * ratio / (M_PI * scale_));
    }
  }
  const int nc = L_ + 4;
  const int nphi = 2 * L_ + 4;
  Quad1D gl = gauss_legendre(nc);
  for (int ic = 0; ic < nc; ++ic) {
    const double c = gl.x[ic];
    const double rho = (1.0 - c) / (1.0 + c);
    const double r = std::sqrt(rho);
    for (int k = 0; k < nphi; ++k) {
      const double phi = 2.0 * M_PI * k / nphi;
      nodes_.push_back({0, r * cplx(std::cos(phi), std::sin(phi)),
                        scale_ * 0.5 * gl.w[ic] * 2.0 * M_PI / nphi});
    }
  }
}

int SphereHarmonics::find(int l, int m, int parity) const {
  for (size_t i = 0; i < idx_.size(); ++i)
    if (idx_[i].l == l && idx_[i].m == m && idx_[i].parity == parity)
      return static_cast<int>(i);
  throw std::invalid_argument("sphere: no such harmonic");
}

double SphereHarmonics::value(int i, int chart, cplx z) const {
  const int l = idx_[i].l, m = idx_[i].m, parity = idx_[i].parity;
  const double rho = std::norm(z);
  double c = (1.0 - rho) / (1.0 + rho);
  if (chart == 1) c = -c;
  auto P = legendre_derivs<double>(l, m, c);
  if (m == 0) return norm_[i] * P[l][0];
  // 2 Re/Im of z^m (1+rho)^{-m} P_l^{(m)}(c); on chart 1 the core is wbar^m.
  cplx core = std::pow(z, m) * std::pow(1.0 + rho, -m);
  if (chart == 1) core = std::conj(core);
  const double re = 2.0 * core.real(), im = 2.0 * core.imag();
  return norm_[i] * (parity == 0 ? re : im) * P[l][m];
}

Jet SphereHarmonics::jet(int i, int chart, cplx z, int nvars, int slot) const {
  const int l = idx_[i].l, m = idx_[i].m, parity = idx_[i].parity;
  const Jet zj = Jet::variable(nvars, slot, z);
  const Jet rho = zj * zj.conj();
  Jet c = (cplx(1.0) - rho) / (cplx(1.0) + rho);
  if (chart == 1) c = -c;
  auto P = legendre_derivs<Jet>(l, m, c);
  if (m == 0) return P[l][0] * cplx(norm_[i]);
  Jet core = zj.powi(m) * (cplx(1.0) + rho).pow(-static_cast<double>(m));
  if (chart == 1) core = core.conj();
  const Jet re = core + core.conj();
  const Jet im = (core - core.conj()) * cplx(0.0, -1.0);
  return (parity == 0 ? re : im) * P[l][m] * cplx(norm_[i]);
}

std::vector<Jet> SphereHarmonics::all_jets(int chart, cplx z, int nvars, int slot) const {
  const Jet zj = Jet::variable(nvars, slot, z);
  const Jet rho = zj * zj.conj();
  Jet c = (cplx(1.0) - rho) / (cplx(1.0) + rho);
  if (chart == 1) c = -c;
  auto P = legendre_derivs<Jet>(L_, L_, c);
  const Jet invr = (cplx(1.0) + rho).recip();
  std::vector<Jet> cores(L_ + 1, Jet(nvars, 1.0));  // (z/(1+rho))^m
  for (int m = 1; m <= L_; ++m) cores[m] = cores[m - 1] * zj * invr;
  if (chart == 1)
    for (int m = 1; m <= L_; ++m) cores[m] = cores[m].conj();
  std::vector<Jet> out;
  out.reserve(idx_.size());
  for (size_t i = 0; i < idx_.size(); ++i) {
    const int l = idx_[i].l, m = idx_[i].m, parity = idx_[i].parity;
    if (m == 0) {
      out.push_back(P[l][0] * cplx(norm_[i]));
      continue;
    }
    const Jet re = cores[m] + cores[m].conj();
    const Jet im = (cores[m] - cores[m].conj()) * cplx(0.0, -1.0);
    out.push_back((parity == 0 ? re : im) * P[l][m] * cplx(norm_[i]));
  }
  return out;
}

}  // namespace ruledk
