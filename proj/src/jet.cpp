#include "ruledk/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace ruledk {

namespace {

void enumerate(int slots, int degree_left, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == slots) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= degree_left; ++e) {
    cur.push_back(e);
    enumerate(slots, degree_left - e, cur, out);
    cur.pop_back();
  }
}

struct FullTables : JetTables {
  std::map<std::vector<int>, int> lookup;
  std::vector<std::vector<int32_t>> deriv;  // [slot][monomial] -> lowered index
  std::vector<int> single;                  // index of the pure dz_s monomial
};

const FullTables& full_tables(int nvars) {
  static std::map<int, FullTables> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(nvars);
  if (it != cache.end()) return it->second;

  FullTables t;
  t.nvars = nvars;
  const int slots = 2 * nvars;
  std::vector<std::vector<int>> all;
  std::vector<int> cur;
  enumerate(slots, kJetDegree, cur, all);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (int x : a) da += x;
    for (int x : b) db += x;
    if (da != db) return da < db;
    return a < b;
  });
  t.exps = std::move(all);
  const int sz = t.size();
  t.degree.resize(sz);
  for (int i = 0; i < sz; ++i) {
    int d = 0;
    for (int x : t.exps[i]) d += x;
    t.degree[i] = d;
    t.lookup[t.exps[i]] = i;
  }
  t.conj_index.resize(sz);
  for (int i = 0; i < sz; ++i) {
    std::vector<int> e = t.exps[i];
    for (int v = 0; v < nvars; ++v) std::swap(e[v], e[nvars + v]);
    t.conj_index[i] = t.lookup.at(e);
  }
  t.prod.assign(static_cast<size_t>(sz) * sz, -1);
  std::vector<int> sum(slots);
  for (int i = 0; i < sz; ++i) {
    for (int j = 0; j < sz; ++j) {
      if (t.degree[i] + t.degree[j] > kJetDegree) continue;
      for (int s = 0; s < slots; ++s) sum[s] = t.exps[i][s] + t.exps[j][s];
      t.prod[static_cast<size_t>(i) * sz + j] = t.lookup.at(sum);
    }
  }
  t.deriv.assign(slots, std::vector<int32_t>(sz, -1));
  for (int s = 0; s < slots; ++s) {
    for (int i = 0; i < sz; ++i) {
      if (t.exps[i][s] == 0) continue;
      std::vector<int> e = t.exps[i];
      e[s] -= 1;
      t.deriv[s][i] = t.lookup.at(e);
    }
  }
  t.single.resize(slots);
  for (int s = 0; s < slots; ++s) {
    std::vector<int> e(slots, 0);
    e[s] = 1;
    t.single[s] = t.lookup.at(e);
  }
  auto [ins, ok] = cache.emplace(nvars, std::move(t));
  return ins->second;
}

}  // namespace

const JetTables& JetTables::get(int nvars) { return full_tables(nvars); }

Jet Jet::variable(int nvars, int i, cplx value) {
  Jet j(nvars, value);
  j.raw(full_tables(nvars).single[i]) = 1.0;
  return j;
}

cplx Jet::coeff(const std::vector<int>& exp) const {
  const auto& t = full_tables(n_);
  auto it = t.lookup.find(exp);
  if (it == t.lookup.end()) throw std::invalid_argument("jet: exponent out of range");
  return c_[it->second];
}

cplx Jet::d(int i) const { return c_[full_tables(n_).single[i]]; }

cplx Jet::dbar(int i) const { return c_[full_tables(n_).single[n_ + i]]; }

cplx Jet::ddbar(int i, int j) const {
  std::vector<int> e(2 * n_, 0);
  e[i] = 1;
  e[n_ + j] = 1;
  return coeff(e);
}

Jet Jet::dz(int i) const {
  const auto& t = full_tables(n_);
  Jet r(n_);
  const auto& dmap = t.deriv[i];
  for (int k = 0; k < t.size(); ++k) {
    if (dmap[k] < 0) continue;
    r.c_[dmap[k]] += c_[k] * static_cast<double>(t.exps[k][i]);
  }
  return r;
}

Jet Jet::dzbar(int i) const { return dz(n_ + i); }

Jet Jet::conj() const {
  const auto& t = full_tables(n_);
  Jet r(n_);
  for (int k = 0; k < t.size(); ++k) r.c_[t.conj_index[k]] = std::conj(c_[k]);
  return r;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& x : r.c_) x = -x;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& x : c_) x *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  const auto& t = JetTables::get(a.n_);
  const int sz = t.size();
  Jet r(a.n_);
  for (int i = 0; i < sz; ++i) {
    const cplx ai = a.c_[i];
    if (ai == cplx(0.0)) continue;
    const int32_t* row = &t.prod[static_cast<size_t>(i) * sz];
    for (int j = 0; j < sz; ++j) {
      const int32_t k = row[j];
      if (k < 0) continue;
      r.c_[k] += ai * b.c_[j];
    }
  }
  return r;
}

Jet Jet::recip() const {
  const cplx a = value();
  if (std::abs(a) == 0.0) throw std::runtime_error("jet: division by zero value");
  Jet u = *this / a;
  u -= cplx(1.0);
  Jet u2 = u * u;
  Jet u3 = u2 * u;
  Jet u4 = u2 * u2;
  Jet r = Jet(n_, 1.0) - u + u2 - u3 + u4;
  r *= cplx(1.0) / a;
  return r;
}

Jet Jet::log() const {
  const cplx a = value();
  if (std::abs(a) == 0.0) throw std::runtime_error("jet: log of zero value");
  Jet u = *this / a;
  u -= cplx(1.0);
  Jet u2 = u * u;
  Jet u3 = u2 * u;
  Jet u4 = u2 * u2;
  Jet r = u - u2 * cplx(0.5) + u3 * cplx(1.0 / 3.0) - u4 * cplx(0.25);
  r += std::log(a);
  return r;
}

Jet Jet::exp() const {
  Jet u = *this;
  const cplx a = value();
  u -= a;
  Jet u2 = u * u;
  Jet u3 = u2 * u;
  Jet u4 = u2 * u2;
  Jet r = Jet(n_, 1.0) + u + u2 * cplx(0.5) + u3 * cplx(1.0 / 6.0) +
          u4 * cplx(1.0 / 24.0);
  r *= std::exp(a);
  return r;
}

Jet Jet::powi(int k) const {
  if (k == 0) return Jet(n_, 1.0);
  if (k < 0) return recip().powi(-k);
  Jet r = *this;
  for (int i = 1; i < k; ++i) r = r * (*this);
  return r;
}

Jet Jet::pow(double s) const { return (log() * cplx(s)).exp(); }

Jet Jet::compose(const double* series, int nterms) const {
  Jet u = *this;
  u -= value();
  Jet r(n_, series[0]);
  Jet upow(n_, 1.0);
  for (int k = 1; k < nterms && k <= kJetDegree; ++k) {
    upow = upow * u;
    r += upow * cplx(series[k]);
  }
  return r;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (const auto& x : c_) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace ruledk
