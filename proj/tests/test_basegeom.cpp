#include "doctest.h"
#include "ruledk/basegeom.hpp"

#include <cmath>
#include <random>

using namespace ruledk;
using pointalg::FormAtPoint;

namespace {
const BaseManifold& P1() {
  static BaseManifold b = BaseManifold::p1(16);
  return b;
}
const BaseManifold& T2() {
  static BaseManifold b = BaseManifold::torus(6);
  return b;
}
}  // namespace

TEST_CASE("volume and basis orthonormality") {
  const auto& M = P1();
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.nodes().size());
  CHECK(M.integrate(ones) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
  // random pair Gram
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, M.nbasis() - 1);
  for (int t = 0; t < 12; ++t) {
    int i = pick(rng), j = pick(rng);
    double s = 0.0;
    for (const auto& nd : M.nodes())
      s += nd.w * M.basis_value(i, nd.pt) * M.basis_value(j, nd.pt);
    CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-8);
  }
  Eigen::VectorXd onest(T2().nodes().size());
  onest.setOnes();
  CHECK(T2().integrate(onest) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("convention lock: Laplace spectrum l(l+1) on P1, pointwise by jets") {
  const auto& M = P1();
  std::mt19937_64 rng(3);
  for (int l : {1, 2, 5}) {
    const int i = l * l;  // first index of degree l (zonal) given ordering
    const BaseField f = M.basis_field(i);
    for (int t = 0; t < 4; ++t) {
      const BasePoint p = M.random_point(rng);
      const Jet fj = f.jet(p);
      const auto om = M.omega_form(p);
      const double lap = pointalg::contract(pointalg::i_dbar_del(fj), om).real();
      CHECK(lap == doctest::Approx(l * (l + 1.0) * f.value(p)).epsilon(1e-8));
    }
  }
}

TEST_CASE("chart consistency of harmonics") {
  const auto& M = P1();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.3, 0.9);
  for (int i : {0, 1, 2, 3, 5, 8, 12}) {
    for (int t = 0; t < 3; ++t) {
      const cplx z(u(rng), u(rng));
      BasePoint p0{{0, 0}, {z, 0.0}};
      BasePoint p1{{1, 0}, {1.0 / z, 0.0}};
      CHECK(M.basis_value(i, p0) == doctest::Approx(M.basis_value(i, p1)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Fubini-Study curvature: Ric = 2 omega, Scal = 2") {
  const auto& M = P1();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 6; ++t) {
    const BasePoint p = M.random_point(rng);
    const auto ric = M.ricci(p);
    const auto om = M.omega_form(p);
    auto diff = ric - om * cplx(2.0);
    CHECK(diff.coeff().lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(M.scal(p) == doctest::Approx(2.0).epsilon(1e-12));
  }
  // scaling: omega -> c omega gives Scal = 2/c
  BaseManifold Mc = BaseManifold::p1(8, 2.5);
  std::mt19937_64 rng2(6);
  const BasePoint p = Mc.random_point(rng2);
  CHECK(Mc.scal(p) == doctest::Approx(2.0 / 2.5).epsilon(1e-12));
}

TEST_CASE("flat torus: Ric = 0") {
  const auto& M = T2();
  std::mt19937_64 rng(9);
  const BasePoint p = M.random_point(rng);
  CHECK(M.ricci(p).coeff().lpNorm<Eigen::Infinity>() < 1e-13);
  CHECK(M.scal(p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perturbed Ricci matches 4th-order finite differences of log det g") {
  const auto& M = P1();
  BaseField eta = M.zero_field();
  eta.a[M.nbasis() > 8 ? 6 : 2] = 0.21;  // some l=2 harmonic
  eta.a[2] = 0.13;
  const double t = 0.17;
  std::mt19937_64 rng(13);
  const BasePoint p = M.random_point(rng);
  const auto ric = M.ricci(p, &eta, t);

  // FD oracle: central 4th-order stencil in z around p of log det g, where
  // g(z) is evaluated by jets at shifted points.
  auto logdetg = [&](cplx dz) {
    BasePoint q = p;
    q.z[0] += dz;
    Jet u = M.potential_jet(q) - eta.jet(q) * cplx(t);
    return std::log(std::abs(u.ddbar(0, 0)));
  };
  const double h = 1e-3;
  auto second = [&](cplx dir1, cplx dir2) {
    // d^2/(ds dt) logdetg(s dir1 + t dir2) via 4th-order cross stencil
    auto f = [&](double s, double tt) { return logdetg(s * dir1 + tt * dir2); };
    double v = 0.0;
    const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        if (c1[i + 2] == 0.0 || c1[j + 2] == 0.0) continue;
        v += c1[i + 2] * c1[j + 2] * f(i * h, j * h);
      }
    return v / (144.0 * h * h);
  };
  // partial_z partial_zbar = 1/4 (dxx + dyy) of logdetg
  const double fxx = second(cplx(1, 0), cplx(1, 0));
  const double fyy = second(cplx(0, 1), cplx(0, 1));
  const double mixed = 0.25 * (fxx + fyy);
  const double ric_coeff = (ric.matrix()(0, 0)).real();
  CHECK(ric_coeff == doctest::Approx(-mixed).epsilon(1e-5));
}

TEST_CASE("Poisson solve: spectral shifts and roundtrip") {
  const auto& M = P1();
  // rhs = eigenfunction Y_l -> u = Y_l / lambda_l
  const int i = 4;  // some l=2 mode
  BaseField rhs = M.basis_field(i);
  BaseField u = M.poisson_solve(rhs);
  CHECK(u.a[i] == doctest::Approx(1.0 / M.lap_eig(i)).epsilon(1e-14));
  // roundtrip on random band-limited field
  std::mt19937_64 rng(17);
  BaseField f = M.zero_field();
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  for (int k = 1; k < M.nbasis(); ++k) f.a[k] = ur(rng);
  BaseField lap_u = M.laplace(M.poisson_solve(f));
  CHECK((lap_u.a - f.a).lpNorm<Eigen::Infinity>() < 1e-12);
  // zero rhs -> zero
  BaseField z = M.poisson_solve(M.zero_field());
  CHECK(z.a.norm() == 0.0);
  // nonzero mean rejected
  BaseField bad = M.constant_field(0.3);
  CHECK_THROWS_WITH(M.poisson_solve(bad), "rhs not orthogonal to constants");
}

TEST_CASE("Lichnerowicz operator: kernel and Legendre-oracle eigenvalue") {
  const auto& M = P1();
  // constants and degree-1 harmonics are annihilated
  for (int i = 0; i < 4; ++i) {
    BaseField f = M.basis_field(i);
    BaseField g = M.lichnerowicz(f);
    CHECK(g.a.lpNorm<Eigen::Infinity>() < 1e-12);
  }
  // Y_2 eigenvalue: lambda(lambda - 2) with lambda from an independent
  // Legendre-ODE evaluation: for P_2(c), the FS Laplacian acts as
  // -d/dc[(1-c^2)/... ] ; the spectral value is l(l+1) = 6, so D*D -> 24.
  const int i2 = 4;
  BaseField f = M.basis_field(i2);
  BaseField g = M.lichnerowicz(f);
  CHECK(g.a[i2] == doctest::Approx(24.0).epsilon(1e-13));

  // variational oracle: D*D eta = d/dt S(omega + t i dbar del eta) at cscK,
  // 4th order finite difference in t, compared pointwise.
  BaseField eta = M.zero_field();
  eta.a[i2] = 1.0;
  eta.a[7] = 0.4;
  BaseField dsd = M.lichnerowicz(eta);
  std::mt19937_64 rng(23);
  for (int t = 0; t < 3; ++t) {
    const BasePoint p = M.random_point(rng);
    const double h = 5e-3;
    double fd = (-M.scal(p, &eta, 2 * h) + 8 * M.scal(p, &eta, h) - 8 * M.scal(p, &eta, -h) +
                 M.scal(p, &eta, -2 * h)) /
                (12 * h);
    CHECK(fd == doctest::Approx(dsd.value(p)).epsilon(3e-5));
  }
}

TEST_CASE("integration by parts for Delta") {
  const auto& M = P1();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  BaseField f = M.zero_field(), g = M.zero_field();
  for (int k = 0; k < M.nbasis(); ++k) {
    f.a[k] = ur(rng);
    g.a[k] = ur(rng);
  }
  const double a = M.l2_inner(M.laplace(f), g);
  const double b = M.l2_inner(f, M.laplace(g));
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("grad_pair product rule: Delta(fg) = f Delta g + g Delta f - <grad f, grad g>") {
  const auto& M = P1();
  std::mt19937_64 rng(31);
  BaseField f = M.basis_field(2), g = M.basis_field(5);
  for (int t = 0; t < 4; ++t) {
    const BasePoint p = M.random_point(rng);
    const auto om = M.omega_form(p);
    const Jet fj = f.jet(p), gj = g.jet(p);
    const Jet prod = fj * gj;
    const double lap_fg = pointalg::contract(pointalg::i_dbar_del(prod), om).real();
    const double lhs = fj.value().real() * pointalg::contract(pointalg::i_dbar_del(gj), om).real() +
                       gj.value().real() * pointalg::contract(pointalg::i_dbar_del(fj), om).real() -
                       M.grad_pair(fj, gj, om);
    CHECK(lap_fg == doctest::Approx(lhs).epsilon(1e-9));
  }
}

TEST_CASE("ham_basis dimensions: P1 -> 4, torus -> 1, P1xP1 -> 7") {
  auto Hp = P1().ham_basis();
  CHECK(Hp.n_basis.size() == 4);
  CHECK(Hp.tbar.size() == 2);  // constants + zonal y10
  CHECK(Hp.kbar.size() == 2);  // commutant of the rotation torus
  auto Hp_triv = P1().ham_basis(true);
  CHECK(Hp_triv.tbar.size() == 1);
  CHECK(Hp_triv.kbar.size() == 4);

  auto Ht = T2().ham_basis();
  CHECK(Ht.n_basis.size() == 1);

  BaseManifold Mpp = BaseManifold::p1xp1(4);
  auto Hpp = Mpp.ham_basis();
  CHECK(Hpp.n_basis.size() == 7);
}

TEST_CASE("D*D eigenvalue check on the product base by jets") {
  BaseManifold M = BaseManifold::p1xp1(3);
  // Fine's formula evaluated pointwise on a (1,0) tensor harmonic must vanish.
  // find a basis index with l1=1,l2=0: factor index 1 is the first l=1 mode.
  int idx = -1;
  for (int i = 0; i < M.nbasis(); ++i)
    if (std::abs(M.dsd_eig(i)) < 1e-12 && M.lap_eig(i) > 0.1) {
      idx = i;
      break;
    }
  REQUIRE(idx >= 0);
  BaseField f = M.basis_field(idx);
  std::mt19937_64 rng(37);
  for (int t = 0; t < 2; ++t) {
    const BasePoint p = M.random_point(rng);
    const double h = 1e-2;
    double fd = (-M.scal(p, &f, 2 * h) + 8 * M.scal(p, &f, h) - 8 * M.scal(p, &f, -h) +
                 M.scal(p, &f, -2 * h)) /
                (12 * h);
    CHECK(std::abs(fd) < 1e-6);  // kernel element of D*D on the cscK product
  }
}
