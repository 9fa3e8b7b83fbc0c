// Truncated Taylor ("jet") arithmetic in n complex variables and their
// conjugates, up to total degree 4.  A Jet represents the germ of a
// real-analytic function at a point: the constant term is the value at the
// point and the monomials are offsets (dz_1,...,dz_n, dzbar_1,...,dzbar_n).
// Degree 4 is enough for one scalar curvature (two derivatives of a metric
// which is itself two derivatives of a potential).
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ruledk {

using cplx = std::complex<double>;

constexpr int kJetDegree = 4;

// Monomial tables for a fixed number of complex variables.
struct JetTables {
  int nvars = 0;                    // complex variables; 2*nvars exponent slots
  std::vector<std::vector<int>> exps;  // exponent tuples, graded order
  std::vector<int> degree;             // total degree per monomial
  std::vector<int> conj_index;         // index after swapping z <-> zbar
  std::vector<int32_t> prod;           // [i*size+j] -> index of product, -1 if truncated
  int size() const { return static_cast<int>(exps.size()); }
  static const JetTables& get(int nvars);
};

class Jet {
 public:
  Jet() = default;
  explicit Jet(int nvars, cplx value = 0.0)
      : n_(nvars), c_(JetTables::get(nvars).size(), cplx(0.0)) {
    c_[0] = value;
  }

  static Jet variable(int nvars, int i, cplx value);   // value + dz_i
  static Jet constant(int nvars, cplx value) { return Jet(nvars, value); }

  int nvars() const { return n_; }
  cplx value() const { return c_.empty() ? cplx(0.0) : c_[0]; }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx& raw(int idx) { return c_[idx]; }
  const cplx& raw(int idx) const { return c_[idx]; }

  // Taylor coefficient of dz^a dzbar^b; exponents packed as in JetTables.
  cplx coeff(const std::vector<int>& exp) const;

  // First and mixed second derivatives at the point.
  cplx d(int i) const;          // d/dz_i
  cplx dbar(int i) const;       // d/dzbar_i
  cplx ddbar(int i, int j) const;  // d^2/(dz_i dzbar_j)

  // Derivative operators (drop the top degree).
  Jet dz(int i) const;
  Jet dzbar(int i) const;

  Jet conj() const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(cplx s) { c_[0] += s; return *this; }
  Jet& operator-=(cplx s) { c_[0] -= s; return *this; }
  Jet& operator*=(cplx s);

  friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
  friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
  friend Jet operator+(Jet a, cplx s) { a += s; return a; }
  friend Jet operator+(cplx s, Jet a) { a += s; return a; }
  friend Jet operator-(Jet a, cplx s) { a -= s; return a; }
  friend Jet operator-(cplx s, const Jet& a) { Jet r = -a; r += s; return r; }
  friend Jet operator*(Jet a, cplx s) { a *= s; return a; }
  friend Jet operator*(cplx s, Jet a) { a *= s; return a; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.recip(); }
  friend Jet operator/(Jet a, cplx s) { a *= cplx(1.0) / s; return a; }
  friend Jet operator/(cplx s, const Jet& b) { return b.recip() * s; }

  Jet recip() const;
  Jet log() const;
  Jet exp() const;
  Jet powi(int k) const;
  Jet pow(double s) const;   // principal branch; value must avoid the cut

  // g(f) for a univariate Taylor series g around f.value(): sum g_k (f-f0)^k.
  Jet compose(const double* series, int nterms) const;

  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<cplx> c_;
};

}  // namespace ruledk
