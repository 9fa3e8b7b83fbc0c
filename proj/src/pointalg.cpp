#include "ruledk/pointalg.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ruledk::pointalg {

namespace {

int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return static_cast<int>(r);
}

// Sign of merging two disjoint increasing index sets (a then b) into one
// increasing set: parity of the number of pairs (i in a, j in b) with i > j.
int merge_sign(uint32_t a, uint32_t b) {
  int inversions = 0;
  while (b) {
    uint32_t low = b & (~b + 1);
    inversions += std::popcount(a & ~(low - 1) & ~low);
    b ^= low;
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

}  // namespace

const ComboTable& ComboTable::get(int n, int k) {
  static std::map<std::pair<int, int>, ComboTable> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, k);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  ComboTable t;
  t.index_of_mask.assign(1u << n, -1);
  for (uint32_t m = 0; m < (1u << n); ++m) {
    if (std::popcount(m) == k) {
      t.index_of_mask[m] = static_cast<int>(t.masks.size());
      t.masks.push_back(m);
    }
  }
  auto [ins, ok] = cache.emplace(key, std::move(t));
  return ins->second;
}

FormAtPoint::FormAtPoint(int n, int p, int q) : n_(n), p_(p), q_(q) {
  if (p > n || q > n || p < 0 || q < 0)
    throw std::invalid_argument("form: degree exceeds 2n");
  c_ = Eigen::VectorXcd::Zero(binom(n, p) * binom(n, q));
}

cplx& FormAtPoint::at(uint32_t maskI, uint32_t maskJ) {
  const auto& ti = ComboTable::get(n_, p_);
  const auto& tj = ComboTable::get(n_, q_);
  return c_[ti.index_of_mask[maskI] * tj.masks.size() + tj.index_of_mask[maskJ]];
}

cplx FormAtPoint::at(uint32_t maskI, uint32_t maskJ) const {
  const auto& ti = ComboTable::get(n_, p_);
  const auto& tj = ComboTable::get(n_, q_);
  return c_[ti.index_of_mask[maskI] * tj.masks.size() + tj.index_of_mask[maskJ]];
}

FormAtPoint FormAtPoint::from_matrix(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  FormAtPoint f(n, 1, 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      f.at(1u << a, 1u << b) = cplx(0.0, 1.0) * g(a, b);
  return f;
}

Eigen::MatrixXcd FormAtPoint::matrix() const {
  if (p_ != 1 || q_ != 1) throw std::invalid_argument("form: not a (1,1)-form");
  Eigen::MatrixXcd g(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      g(a, b) = at(1u << a, 1u << b) / cplx(0.0, 1.0);
  return g;
}

FormAtPoint FormAtPoint::conj() const {
  FormAtPoint r(n_, q_, p_);
  const auto& ti = ComboTable::get(n_, p_);
  const auto& tj = ComboTable::get(n_, q_);
  const double sgn = (p_ * q_) % 2 == 0 ? 1.0 : -1.0;
  for (size_t i = 0; i < ti.masks.size(); ++i)
    for (size_t j = 0; j < tj.masks.size(); ++j)
      r.at(tj.masks[j], ti.masks[i]) =
          sgn * std::conj(c_[i * tj.masks.size() + j]);
  return r;
}

bool FormAtPoint::is_real(double tol) const {
  if (p_ != q_) return false;
  FormAtPoint d = conj();
  d -= *this;
  return d.coeff().lpNorm<Eigen::Infinity>() <= tol;
}

FormAtPoint FormAtPoint::operator-() const {
  FormAtPoint r = *this;
  r.c_ = -r.c_;
  return r;
}

FormAtPoint& FormAtPoint::operator+=(const FormAtPoint& o) {
  if (n_ != o.n_ || p_ != o.p_ || q_ != o.q_)
    throw std::invalid_argument("form: bidegree mismatch");
  c_ += o.c_;
  return *this;
}

FormAtPoint& FormAtPoint::operator-=(const FormAtPoint& o) {
  if (n_ != o.n_ || p_ != o.p_ || q_ != o.q_)
    throw std::invalid_argument("form: bidegree mismatch");
  c_ -= o.c_;
  return *this;
}

FormAtPoint& FormAtPoint::operator*=(cplx s) {
  c_ *= s;
  return *this;
}

FormAtPoint FormAtPoint::transform(const Eigen::MatrixXcd& S) const {
  FormAtPoint r(n_, p_, q_);
  const auto& tp = ComboTable::get(n_, p_);
  const auto& tq = ComboTable::get(n_, q_);
  auto minor = [&](const Eigen::MatrixXcd& M, uint32_t rows, uint32_t cols) {
    const int k = std::popcount(rows);
    Eigen::MatrixXcd sub(k, k);
    int ri = 0;
    for (int i = 0; i < n_; ++i) {
      if (!(rows & (1u << i))) continue;
      int cj = 0;
      for (int j = 0; j < n_; ++j) {
        if (!(cols & (1u << j))) continue;
        sub(ri, cj++) = M(i, j);
      }
      ++ri;
    }
    return k == 0 ? cplx(1.0) : sub.determinant();
  };
  const Eigen::MatrixXcd Sc = S.conjugate();
  for (size_t i = 0; i < tp.masks.size(); ++i) {
    for (size_t j = 0; j < tq.masks.size(); ++j) {
      const cplx c = c_[i * tq.masks.size() + j];
      if (c == cplx(0.0)) continue;
      for (size_t i2 = 0; i2 < tp.masks.size(); ++i2) {
        const cplx mi = minor(S, tp.masks[i], tp.masks[i2]);
        if (mi == cplx(0.0)) continue;
        for (size_t j2 = 0; j2 < tq.masks.size(); ++j2) {
          const cplx mj = minor(Sc, tq.masks[j], tq.masks[j2]);
          r.c_[i2 * tq.masks.size() + j2] += c * mi * mj;
        }
      }
    }
  }
  return r;
}

FormAtPoint wedge(const FormAtPoint& a, const FormAtPoint& b) {
  if (a.n() != b.n()) throw std::invalid_argument("wedge: ambient dimension mismatch");
  const int n = a.n();
  const int p = a.p() + b.p(), q = a.q() + b.q();
  if (p > n || q > n) throw std::invalid_argument("degree exceeds 2n");
  FormAtPoint r(n, p, q);
  const auto& tap = ComboTable::get(n, a.p());
  const auto& taq = ComboTable::get(n, a.q());
  const auto& tbp = ComboTable::get(n, b.p());
  const auto& tbq = ComboTable::get(n, b.q());
  // (dz^I1 dzbar^J1) ^ (dz^I2 dzbar^J2) = (-1)^{|J1||I2|} sgn(I1,I2) sgn(J1,J2)
  //                                        dz^{I1 u I2} dzbar^{J1 u J2}
  const double cross = (a.q() * b.p()) % 2 == 0 ? 1.0 : -1.0;
  for (size_t i1 = 0; i1 < tap.masks.size(); ++i1) {
    for (size_t j1 = 0; j1 < taq.masks.size(); ++j1) {
      const cplx ca = a.coeff()[i1 * taq.masks.size() + j1];
      if (ca == cplx(0.0)) continue;
      for (size_t i2 = 0; i2 < tbp.masks.size(); ++i2) {
        if (tap.masks[i1] & tbp.masks[i2]) continue;
        const int si = merge_sign(tap.masks[i1], tbp.masks[i2]);
        for (size_t j2 = 0; j2 < tbq.masks.size(); ++j2) {
          if (taq.masks[j1] & tbq.masks[j2]) continue;
          const cplx cb = b.coeff()[i2 * tbq.masks.size() + j2];
          if (cb == cplx(0.0)) continue;
          const int sj = merge_sign(taq.masks[j1], tbq.masks[j2]);
          r.at(tap.masks[i1] | tbp.masks[i2], taq.masks[j1] | tbq.masks[j2]) +=
              ca * cb * cross * static_cast<double>(si * sj);
        }
      }
    }
  }
  return r;
}

FormAtPoint wedge_pow(const FormAtPoint& a, int k) {
  if (k == 0) {
    FormAtPoint one(a.n(), 0, 0);
    one.coeff()[0] = 1.0;
    return one;
  }
  FormAtPoint r = a;
  for (int i = 1; i < k; ++i) r = wedge(r, a);
  return r;
}

cplx top_form_quotient(const FormAtPoint& num, const FormAtPoint& den) {
  if (num.n() != den.n() || num.p() != num.n() || num.q() != num.n() ||
      den.p() != den.n() || den.q() != den.n())
    throw std::invalid_argument("top_form_quotient: not top-degree forms");
  const cplx d = den.coeff()[0];
  if (std::abs(d) == 0.0) throw std::runtime_error("top_form_quotient: zero denominator");
  return num.coeff()[0] / d;
}

cplx contract_j(const FormAtPoint& alpha, const FormAtPoint& omega, int j) {
  const int n = alpha.n();
  if (j > n) throw std::invalid_argument("contract_j: j exceeds dimension");
  if (alpha.p() != j || alpha.q() != j)
    throw std::invalid_argument("contract_j: alpha must be a (j,j)-form");
  if (!positive_definite(omega))
    throw std::runtime_error("omega not positive-definite");
  const FormAtPoint num = wedge(alpha, wedge_pow(omega, n - j));
  const FormAtPoint den = wedge_pow(omega, n);
  return static_cast<double>(binom(n, j)) * top_form_quotient(num, den);
}

bool positive_definite(const FormAtPoint& omega, double tol) {
  if (omega.p() != 1 || omega.q() != 1) return false;
  Eigen::MatrixXcd g = omega.matrix();
  if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  return es.eigenvalues().minCoeff() > tol;
}

EndForm::EndForm(int r, int n, int p, int q) : r_(r), e_(r * r, FormAtPoint(n, p, q)) {}

EndForm EndForm::from_constant(const Eigen::MatrixXcd& m, int n) {
  EndForm f(static_cast<int>(m.rows()), n, 0, 0);
  for (int i = 0; i < f.r_; ++i)
    for (int j = 0; j < f.r_; ++j) f.at(i, j).coeff()[0] = m(i, j);
  return f;
}

FormAtPoint EndForm::trace() const {
  FormAtPoint t = e_[0];
  for (int i = 1; i < r_; ++i) t += at(i, i);
  return t;
}

EndForm EndForm::traceless() const {
  EndForm r = *this;
  FormAtPoint t = trace();
  t *= cplx(1.0 / r_);
  for (int i = 0; i < r_; ++i) r.at(i, i) -= t;
  return r;
}

EndForm EndForm::operator*(cplx s) const {
  EndForm r = *this;
  for (auto& f : r.e_) f *= s;
  return r;
}

EndForm EndForm::operator+(const EndForm& o) const {
  EndForm r = *this;
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
  return r;
}

EndForm EndForm::operator-(const EndForm& o) const {
  EndForm r = *this;
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] -= o.e_[i];
  return r;
}

EndForm wedge(const EndForm& a, const EndForm& b) {
  const int r = a.r();
  const auto& f00 = a.at(0, 0);
  const auto& g00 = b.at(0, 0);
  EndForm out(r, f00.n(), f00.p() + g00.p(), f00.q() + g00.q());
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k)
      for (int j = 0; j < r; ++j)
        out.at(i, k) += wedge(a.at(i, j), b.at(j, k));
  return out;
}

FormAtPoint trace_wedge(const EndForm& a, const EndForm& b) {
  const int r = a.r();
  const auto& f00 = a.at(0, 0);
  const auto& g00 = b.at(0, 0);
  FormAtPoint out(f00.n(), f00.p() + g00.p(), f00.q() + g00.q());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out += wedge(a.at(i, j), b.at(j, i));
  return out;
}

FormAtPoint kaehler_form_from_potential(const Jet& u) {
  const int n = u.nvars();
  Eigen::MatrixXcd g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g(a, b) = u.ddbar(a, b);
  return FormAtPoint::from_matrix(g);
}

FormAtPoint i_dbar_del(const Jet& f) {
  const int n = f.nvars();
  Eigen::MatrixXcd g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g(a, b) = -f.ddbar(a, b);
  return FormAtPoint::from_matrix(g);
}

JetMatrix jm_identity(int r, int nvars) {
  JetMatrix m(r, std::vector<Jet>(r, Jet(nvars)));
  for (int i = 0; i < r; ++i) m[i][i] = Jet(nvars, 1.0);
  return m;
}

JetMatrix jm_mul(const JetMatrix& a, const JetMatrix& b) {
  const int r = static_cast<int>(a.size());
  const int c = static_cast<int>(b[0].size());
  const int k = static_cast<int>(b.size());
  JetMatrix out(r, std::vector<Jet>(c, Jet(a[0][0].nvars())));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      for (int l = 0; l < k; ++l) out[i][j] += a[i][l] * b[l][j];
  return out;
}

JetMatrix jm_add(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix out = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
  return out;
}

JetMatrix jm_scale(const JetMatrix& a, cplx s) {
  JetMatrix out = a;
  for (auto& row : out)
    for (auto& e : row) e *= s;
  return out;
}

JetMatrix jm_adjoint(const JetMatrix& a) {
  const int r = static_cast<int>(a.size());
  const int c = static_cast<int>(a[0].size());
  JetMatrix out(c, std::vector<Jet>(r, Jet(a[0][0].nvars())));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j][i] = a[i][j].conj();
  return out;
}

Jet jm_det(const JetMatrix& a) {
  const int r = static_cast<int>(a.size());
  if (r == 1) return a[0][0];
  if (r == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (r == 3)
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  // Gaussian elimination on jets for larger sizes.
  JetMatrix m = a;
  Jet det(a[0][0].nvars(), 1.0);
  for (int col = 0; col < r; ++col) {
    int piv = col;
    for (int i = col; i < r; ++i)
      if (std::abs(m[i][col].value()) > std::abs(m[piv][col].value())) piv = i;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det *= cplx(-1.0);
    }
    det = det * m[col][col];
    Jet inv = m[col][col].recip();
    for (int i = col + 1; i < r; ++i) {
      Jet f = m[i][col] * inv;
      for (int j = col; j < r; ++j) m[i][j] -= f * m[col][j];
    }
  }
  return det;
}

Jet jm_trace(const JetMatrix& a) {
  Jet t = a[0][0];
  for (size_t i = 1; i < a.size(); ++i) t += a[i][i];
  return t;
}

JetMatrix jm_inverse(const JetMatrix& a) {
  const int r = static_cast<int>(a.size());
  if (r == 1) return {{a[0][0].recip()}};
  if (r == 2) {
    Jet inv_det = jm_det(a).recip();
    JetMatrix out(2, std::vector<Jet>(2, Jet(a[0][0].nvars())));
    out[0][0] = a[1][1] * inv_det;
    out[1][1] = a[0][0] * inv_det;
    out[0][1] = -a[0][1] * inv_det;
    out[1][0] = -a[1][0] * inv_det;
    return out;
  }
  // Gauss-Jordan with jet arithmetic.
  JetMatrix m = a;
  JetMatrix out = jm_identity(r, a[0][0].nvars());
  for (int col = 0; col < r; ++col) {
    int piv = col;
    for (int i = col; i < r; ++i)
      if (std::abs(m[i][col].value()) > std::abs(m[piv][col].value())) piv = i;
    std::swap(m[piv], m[col]);
    std::swap(out[piv], out[col]);
    Jet inv = m[col][col].recip();
    for (int j = 0; j < r; ++j) {
      m[col][j] = m[col][j] * inv;
      out[col][j] = out[col][j] * inv;
    }
    for (int i = 0; i < r; ++i) {
      if (i == col) continue;
      Jet f = m[i][col];
      if (f.max_abs() == 0.0) continue;
      for (int j = 0; j < r; ++j) {
        m[i][j] -= f * m[col][j];
        out[i][j] -= f * out[col][j];
      }
    }
  }
  return out;
}

JetMatrix jm_dz(const JetMatrix& a, int i) {
  JetMatrix out = a;
  for (auto& row : out)
    for (auto& e : row) e = e.dz(i);
  return out;
}

JetMatrix jm_dzbar(const JetMatrix& a, int i) {
  JetMatrix out = a;
  for (auto& row : out)
    for (auto& e : row) e = e.dzbar(i);
  return out;
}

}  // namespace ruledk::pointalg
