// Exact pointwise complex multilinear algebra for (p,q)-forms and
// endomorphism-valued forms in a fixed coordinate frame.  Coefficients are
// stored densely over strictly increasing multi-indices; a (p,q)-form is
//   sum_{|I|=p,|J|=q} c_{IJ} dz^I wedge dzbar^J.
// Real (1,1)-forms are i*g with g a hermitian matrix.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ruledk/jet.hpp"

namespace ruledk::pointalg {

using cplx = std::complex<double>;

// Combinations of {0..n-1} of size k in lexicographic order, with bitmask
// lookup.
struct ComboTable {
  std::vector<uint32_t> masks;
  std::vector<int> index_of_mask;  // indexed by bitmask, -1 if wrong popcount
  static const ComboTable& get(int n, int k);
};

class FormAtPoint {
 public:
  FormAtPoint() = default;
  FormAtPoint(int n, int p, int q);

  int n() const { return n_; }
  int p() const { return p_; }
  int q() const { return q_; }
  Eigen::VectorXcd& coeff() { return c_; }
  const Eigen::VectorXcd& coeff() const { return c_; }

  cplx& at(uint32_t maskI, uint32_t maskJ);
  cplx at(uint32_t maskI, uint32_t maskJ) const;

  static FormAtPoint zero(int n, int p, int q) { return FormAtPoint(n, p, q); }
  // i * sum g_{jk} dz_j wedge dzbar_k ; real iff g hermitian.
  static FormAtPoint from_matrix(const Eigen::MatrixXcd& g);
  Eigen::MatrixXcd matrix() const;  // the g with form = i*g dz^j dzbar^k

  FormAtPoint conj() const;
  bool is_real(double tol = 1e-12) const;

  FormAtPoint operator-() const;
  FormAtPoint& operator+=(const FormAtPoint& o);
  FormAtPoint& operator-=(const FormAtPoint& o);
  FormAtPoint& operator*=(cplx s);
  friend FormAtPoint operator+(FormAtPoint a, const FormAtPoint& b) { a += b; return a; }
  friend FormAtPoint operator-(FormAtPoint a, const FormAtPoint& b) { a -= b; return a; }
  friend FormAtPoint operator*(FormAtPoint a, cplx s) { a *= s; return a; }
  friend FormAtPoint operator*(cplx s, FormAtPoint a) { a *= s; return a; }

  // Pull back along the coframe substitution dz_i = sum_j S(i,j) dw_j.
  FormAtPoint transform(const Eigen::MatrixXcd& S) const;

 private:
  int n_ = 0, p_ = 0, q_ = 0;
  Eigen::VectorXcd c_;
};

FormAtPoint wedge(const FormAtPoint& a, const FormAtPoint& b);
FormAtPoint wedge_pow(const FormAtPoint& a, int k);

// Single coefficient division of top-degree (n,n)-forms: num = q * den.
cplx top_form_quotient(const FormAtPoint& num, const FormAtPoint& den);

// Lambda^j_omega alpha defined by  C(n,j) alpha wedge omega^{n-j} = Lambda^j alpha * omega^n.
cplx contract_j(const FormAtPoint& alpha, const FormAtPoint& omega, int j);
inline cplx contract(const FormAtPoint& alpha, const FormAtPoint& omega) {
  return contract_j(alpha, omega, 1);
}

bool positive_definite(const FormAtPoint& omega, double tol = 1e-12);

// Endomorphism-valued forms: an r x r matrix of equal-bidegree forms.
class EndForm {
 public:
  EndForm() = default;
  EndForm(int r, int n, int p, int q);
  static EndForm from_constant(const Eigen::MatrixXcd& m, int n);  // (0,0)-forms
  int r() const { return r_; }
  FormAtPoint& at(int i, int j) { return e_[i * r_ + j]; }
  const FormAtPoint& at(int i, int j) const { return e_[i * r_ + j]; }
  FormAtPoint trace() const;
  EndForm traceless() const;  // A - tr(A)/r * I
  EndForm operator*(cplx s) const;
  EndForm operator+(const EndForm& o) const;
  EndForm operator-(const EndForm& o) const;

 private:
  int r_ = 0;
  std::vector<FormAtPoint> e_;
};

// Entrywise wedge followed by matrix product: (A ^ B)_{ik} = sum_j A_{ij} ^ B_{jk}.
EndForm wedge(const EndForm& a, const EndForm& b);
FormAtPoint trace_wedge(const EndForm& a, const EndForm& b);

// (1,1)-form from a jet: i d dbar-potential, coefficient matrix g_{ab} = u_{z_a zbar_b}.
FormAtPoint kaehler_form_from_potential(const Jet& u);
// i bar-del del f = -i del bar-del f; coefficient matrix -Hess(f).
FormAtPoint i_dbar_del(const Jet& f);

// Matrix of jets helpers (small r).
using JetMatrix = std::vector<std::vector<Jet>>;
JetMatrix jm_identity(int r, int nvars);
JetMatrix jm_mul(const JetMatrix& a, const JetMatrix& b);
JetMatrix jm_add(const JetMatrix& a, const JetMatrix& b);
JetMatrix jm_scale(const JetMatrix& a, cplx s);
JetMatrix jm_adjoint(const JetMatrix& a);    // conjugate transpose (jets conjugated)
JetMatrix jm_inverse(const JetMatrix& a);
Jet jm_det(const JetMatrix& a);
Jet jm_trace(const JetMatrix& a);
JetMatrix jm_dz(const JetMatrix& a, int i);
JetMatrix jm_dzbar(const JetMatrix& a, int i);

}  // namespace ruledk::pointalg
