// Spherical-harmonic machinery shared by the P^1 base and the P^1 fibers:
// Gauss-Legendre quadrature, Legendre derivative tables (on doubles or jets),
// and a chart-aware real harmonic basis orthonormal for a scaled
// Fubini-Study measure.  Chart 0 has coordinate z (north pole z=0,
// c = (1-|z|^2)/(1+|z|^2)); chart 1 has w = 1/z.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ruledk/jet.hpp"

namespace ruledk {

struct Quad1D {
  Eigen::VectorXd x, w;  // nodes and weights on [-1, 1]
};
Quad1D gauss_legendre(int n);

namespace detail {
inline double make_const(const double&, double v) { return v; }
inline Jet make_const(const Jet& proto, double v) { return Jet(proto.nvars(), v); }
}  // namespace detail

// table[l][m] = d^m P_l / dc^m at c, for l <= L, m <= mmax.
template <class T>
std::vector<std::vector<T>> legendre_derivs(int L, int mmax, const T& c) {
  std::vector<std::vector<T>> P(L + 1, std::vector<T>(mmax + 1, detail::make_const(c, 0.0)));
  P[0][0] = detail::make_const(c, 1.0);
  if (L >= 1) {
    P[1][0] = c;
    if (mmax >= 1) P[1][1] = detail::make_const(c, 1.0);
  }
  for (int l = 1; l < L; ++l) {
    for (int m = 0; m <= std::min(mmax, l + 1); ++m) {
      T rec = c * P[l][m];
      if (m >= 1) rec += P[l][m - 1] * cplx(static_cast<double>(m));
      rec *= cplx(2.0 * l + 1.0);
      rec -= P[l - 1][m] * cplx(static_cast<double>(l));
      rec *= cplx(1.0 / (l + 1.0));
      P[l + 1][m] = rec;
    }
  }
  return P;
}

template <>
inline std::vector<std::vector<double>> legendre_derivs<double>(int L, int mmax,
                                                                const double& c) {
  std::vector<std::vector<double>> P(L + 1, std::vector<double>(mmax + 1, 0.0));
  P[0][0] = 1.0;
  if (L >= 1) {
    P[1][0] = c;
    if (mmax >= 1) P[1][1] = 1.0;
  }
  for (int l = 1; l < L; ++l) {
    for (int m = 0; m <= std::min(mmax, l + 1); ++m) {
      double rec = c * P[l][m] + (m >= 1 ? m * P[l][m - 1] : 0.0);
      rec = ((2.0 * l + 1.0) * rec - l * P[l - 1][m]) / (l + 1.0);
      P[l + 1][m] = rec;
    }
  }
  return P;
}

// Real harmonics orthonormal for the measure (scale/2) dc dphi (total mass
// 2*pi*scale, the Fubini-Study volume of a scale-d P^1).
class SphereHarmonics {
 public:
  SphereHarmonics(int band, double scale);

  int band() const { return L_; }
  int size() const { return static_cast<int>(idx_.size()); }
  struct Idx { int l, m, parity; };  // parity 0: zonal/cos, 1: sin
  const Idx& index(int i) const { return idx_[i]; }
  int find(int l, int m, int parity) const;
  double lap_eig(int i) const { return idx_[i].l * (idx_[i].l + 1.0) / scale_; }

  double value(int i, int chart, cplx z) const;
  // Jet in `nvars` complex variables with the sphere coordinate at `slot`.
  Jet jet(int i, int chart, cplx z, int nvars, int slot) const;
  // all basis jets at once (one recurrence sweep)
  std::vector<Jet> all_jets(int chart, cplx z, int nvars, int slot) const;

  struct Node {
    int chart;
    cplx z;
    double w;
  };
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  int L_;
  double scale_;
  std::vector<Idx> idx_;
  std::vector<double> norm_;
  std::vector<Node> nodes_;
};

}  // namespace ruledk
