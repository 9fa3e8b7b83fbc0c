#include "doctest.h"
#include "ruledk/jet.hpp"

#include <cmath>

using namespace ruledk;

TEST_CASE("jet arithmetic against closed forms") {
  // f(z, zbar) = log(1 + z zbar) at z0: derivatives known exactly
  const cplx z0(0.3, -0.4);
  Jet z = Jet::variable(1, 0, z0);
  Jet f = (cplx(1.0) + z * z.conj()).log();
  const double rho = std::norm(z0);
  CHECK(std::abs(f.value() - std::log(1.0 + rho)) < 1e-15);
  CHECK(std::abs(f.d(0) - std::conj(z0) / (1.0 + rho)) < 1e-14);
  // f_{z zbar} = 1/(1+rho)^2
  CHECK(std::abs(f.ddbar(0, 0) - 1.0 / ((1.0 + rho) * (1.0 + rho))) < 1e-14);
  // fourth mixed derivative of log(1+|z|^2): d^2/dz^2 d^2/dzbar^2 -> coeff
  // (z^2 zbar^2 Taylor coefficient) of log(1+rho) expansion: series sum_k (-1)^{k+1} rho^k / k
  // around 0; test at z0=0 instead:
  Jet w = Jet::variable(1, 0, 0.0);
  Jet g = (cplx(1.0) + w * w.conj()).log();
  std::vector<int> e22 = {2, 2};
  CHECK(std::abs(g.coeff(e22) - cplx(-0.5)) < 1e-15);  // -rho^2/2 term
}

TEST_CASE("jet exp/log/recip roundtrips") {
  const cplx z0(0.2, 0.1);
  Jet z = Jet::variable(2, 0, z0);
  Jet w = Jet::variable(2, 1, cplx(-0.7, 0.05));
  Jet f = cplx(1.3) + z * w.conj() + w * w * cplx(0.25) + z.conj();
  Jet r1 = f.log().exp() - f;
  CHECK(r1.max_abs() < 1e-13);
  Jet r2 = f * f.recip() - Jet(2, 1.0);
  CHECK(r2.max_abs() < 1e-13);
  Jet r3 = f.pow(2.0) - f * f;
  CHECK(r3.max_abs() < 1e-12);
}

TEST_CASE("jet derivative operators compose") {
  const cplx z0(0.11, 0.22);
  Jet z = Jet::variable(1, 0, z0);
  Jet f = (z * z.conj() * cplx(2.0) + z * cplx(0.5)).exp();
  // d/dz then d/dzbar equals mixed Taylor coefficient
  Jet fz = f.dz(0);
  CHECK(std::abs(fz.dzbar(0).value() - f.ddbar(0, 0)) < 1e-13);
  // conj is an involution intertwining dz and dzbar
  Jet a = f.conj().dz(0) - f.dzbar(0).conj();
  CHECK(a.max_abs() < 1e-13);
}
