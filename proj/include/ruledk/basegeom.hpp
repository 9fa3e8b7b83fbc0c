// Spectral geometry of the base (M, omega): P^1 with the Fubini-Study metric,
// a flat torus, and P^1 x P^1.  Scalar fields are band-limited expansions in
// the Laplace eigenbasis; derivatives are exact derivatives of the truncated
// expansion (no finite differences on the base).
//
// Convention lock: Delta f = Lambda_omega(i dbar del f) has spectrum l(l+1)
// on (P^1, omega_FS), Ric(omega_FS) = 2 omega_FS, Scal = 2, vol = 2 pi.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <random>
#include <vector>

#include "ruledk/jet.hpp"
#include "ruledk/pointalg.hpp"

namespace ruledk {

struct BasePoint {
  std::array<int, 2> chart{0, 0};
  std::array<cplx, 2> z{cplx(0.0), cplx(0.0)};
};

class BaseManifold;

struct BaseField {
  const BaseManifold* M = nullptr;
  Eigen::VectorXd a;

  double value(const BasePoint& p) const;
  Jet jet(const BasePoint& p) const;  // m complex variables, degree 4
  // jet in a larger variable set with the base coordinate(s) at `slot`
  Jet jet_n(const BasePoint& p, int nvars, int slot) const;
  BaseField& operator+=(const BaseField& o) { a += o.a; return *this; }
  BaseField& operator-=(const BaseField& o) { a -= o.a; return *this; }
  BaseField& operator*=(double s) { a *= s; return *this; }
  friend BaseField operator+(BaseField x, const BaseField& y) { x += y; return x; }
  friend BaseField operator-(BaseField x, const BaseField& y) { x -= y; return x; }
  friend BaseField operator*(BaseField x, double s) { x *= s; return x; }
  friend BaseField operator*(double s, BaseField x) { x *= s; return x; }
};

class BaseManifold {
 public:
  enum class Kind { P1, Torus, P1xP1 };

  static BaseManifold p1(int band = 24, double scale = 1.0);
  static BaseManifold torus(int band = 8, double scale = 1.0);
  static BaseManifold p1xp1(int band = 6);

  Kind kind() const { return kind_; }
  int m() const { return m_; }
  int band() const { return band_; }
  double scale() const { return scale_; }
  double volume() const;
  double scal_reference() const;  // S(omega_inf): 2/scale on P1, 0 on torus, 4 on P1xP1

  struct Node {
    BasePoint pt;
    double w;
  };
  const std::vector<Node>& nodes() const { return nodes_; }

  int nbasis() const { return static_cast<int>(lap_.size()); }
  double lap_eig(int i) const { return lap_[i]; }
  double dsd_eig(int i) const { return dsd_[i]; }
  double basis_value(int i, const BasePoint& p) const;
  Jet basis_jet(int i, const BasePoint& p) const;
  Jet basis_jet_n(int i, const BasePoint& p, int nvars, int slot) const;

  // Kaehler potential of omega_inf around p (m complex variables, degree 4).
  Jet potential_jet(const BasePoint& p) const;

  BaseField zero_field() const { return {this, Eigen::VectorXd::Zero(nbasis())}; }
  BaseField basis_field(int i) const;
  BaseField constant_field(double c) const;
  template <class F>
  BaseField project(F&& f) const {  // L2 projection of a node-sampled function
    Eigen::VectorXd vals(nodes_.size());
    for (size_t k = 0; k < nodes_.size(); ++k) vals[k] = f(nodes_[k].pt);
    return analyze(vals);
  }
  BaseField analyze(const Eigen::VectorXd& node_values) const;
  double integrate(const Eigen::VectorXd& node_values) const;
  double integrate(const BaseField& f) const;
  double l2_inner(const BaseField& f, const BaseField& g) const { return f.a.dot(g.a); }

  BasePoint random_point(std::mt19937_64& rng) const;
  // The S^1 action used for torus-invariance checks (rotation of the first
  // factor about its axis; translation on the torus).
  BasePoint act_rotation(const BasePoint& p, double angle) const;

  // -- differential operators ---------------------------------------------
  BaseField laplace(const BaseField& f) const;
  // Poisson solve Delta u = rhs with mean-zero data.
  BaseField poisson_solve(const BaseField& rhs) const;
  // Lichnerowicz operator at the reference cscK metric (diagonal).
  BaseField lichnerowicz(const BaseField& f) const;

  // Ricci form / scalar curvature of omega = omega_inf + i dbar del eta.
  pointalg::FormAtPoint ricci(const BasePoint& p, const BaseField* eta = nullptr,
                              double t = 0.0) const;
  double scal(const BasePoint& p, const BaseField* eta = nullptr, double t = 0.0) const;
  pointalg::FormAtPoint omega_form(const BasePoint& p, const BaseField* eta = nullptr,
                                   double t = 0.0) const;

  // <grad f, grad g>_omega at p (real gradients; m=1: (f_z g_zbar + f_zbar g_z)/g).
  double grad_pair(const Jet& f, const Jet& g, const pointalg::FormAtPoint& omega) const;
  // Poisson bracket {f,g} at p with respect to omega_inf.
  double poisson_bracket(const Jet& f, const Jet& g, const pointalg::FormAtPoint& omega) const;

  // -- Hamiltonian spaces ---------------------------------------------------
  // Orthonormal basis of Nbar = ker(D*D) (includes constants), plus the
  // torus-invariant part tbar and its commutant kbar for the given choice of
  // torus T ("full" = maximal torus of isometries, "trivial" = identity).
  struct HamiltonianSpace {
    std::vector<BaseField> n_basis;
    std::vector<int> tbar;  // indices into n_basis
    std::vector<int> kbar;
  };
  HamiltonianSpace ham_basis(bool trivial_torus = false) const;

 private:
  Kind kind_;
  int m_ = 1;
  int band_ = 0;
  double scale_ = 1.0;
  std::vector<Node> nodes_;
  std::vector<double> lap_, dsd_;
  // P1 basis bookkeeping: for index i, (l, m, parity 0=cos/zonal,1=sin)
  struct ShIndex { int l, m, parity; };
  std::vector<ShIndex> sh_;
  std::vector<std::array<int, 4>> modes_;  // torus: (p,q,parity,-); p1xp1: (i1,i2)
  void build_p1();
  void build_torus();
  void build_p1xp1();
  // single-factor P1 helper used by P1 and P1xP1
  double p1_value(int i, int chart, cplx z) const;
  Jet p1_jet(int i, int chart, cplx z, int nvars, int slot) const;
  std::unique_ptr<BaseManifold> factor_;  // for P1xP1: the P1 factor
};

}  // namespace ruledk
