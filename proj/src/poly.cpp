#include "ratdyn/poly.hpp"

#include <algorithm>
#include <cmath>

namespace ratdyn::poly {

int degree(std::span<const cd> p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k) {
    if (p[k] != cd(0.0)) return k;
  }
  return -1;
}

Poly trimmed(Poly p) {
  p.resize(static_cast<std::size_t>(std::max(degree(p), 0)) + 1);
  return p;
}

cd eval(std::span<const cd> p, cd z) {
  cd acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::pair<cd, cd> eval_with_derivative(std::span<const cd> p, cd z) {
  cd v = 0.0;
  cd dv = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    dv = dv * z + v;
    v = v * z + *it;
  }
  return {v, dv};
}

Poly derivative(std::span<const cd> p) {
  if (p.size() <= 1) return {cd(0.0)};
  Poly d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = p[k] * static_cast<double>(k);
  return d;
}

Poly add(std::span<const cd> a, std::span<const cd> b) {
  Poly r(std::max(a.size(), b.size()), cd(0.0));
  for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) r[k] += b[k];
  return r;
}

Poly sub(std::span<const cd> a, std::span<const cd> b) {
  Poly r(std::max(a.size(), b.size()), cd(0.0));
  for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) r[k] -= b[k];
  return r;
}

Poly mul(std::span<const cd> a, std::span<const cd> b) {
  if (a.empty() || b.empty()) return {cd(0.0)};
  Poly r(a.size() + b.size() - 1, cd(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly scale(std::span<const cd> a, cd s) {
  Poly r(a.begin(), a.end());
  for (auto& c : r) c *= s;
  return r;
}

Poly taylor_shift(std::span<const cd> p, cd a) {
  // Repeated synthetic division.
  Poly c(p.begin(), p.end());
  const std::size_t n = c.size();
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t j = n - 1; j > k; --j) c[j - 1] += a * c[j];
  return c;
}

Poly padded(std::span<const cd> p, std::size_t size) {
  Poly r(p.begin(), p.end());
  if (r.size() < size) r.resize(size, cd(0.0));
  return r;
}

std::pair<Poly, Poly> divmod(std::span<const cd> a, std::span<const cd> b) {
  const int db = degree(b);
  if (db < 0) throw Error("polynomial division by zero");
  Poly rem(a.begin(), a.end());
  const int da = degree(rem);
  if (da < db) return {Poly{cd(0.0)}, trimmed(rem)};
  Poly q(static_cast<std::size_t>(da - db) + 1, cd(0.0));
  for (int k = da - db; k >= 0; --k) {
    const cd coef = rem[k + db] / b[db];
    q[k] = coef;
    for (int j = 0; j <= db; ++j) rem[k + j] -= coef * b[j];
  }
  rem.resize(static_cast<std::size_t>(std::max(db, 1)));
  return {q, trimmed(rem)};
}

cd resultant(std::span<const cd> a, std::span<const cd> b) {
  const int m = degree(a);
  const int n = degree(b);
  if (m < 0 || n < 0) return 0.0;
  if (m == 0) return std::pow(a[0], n);
  if (n == 0) return std::pow(b[0], m);
  const int size = m + n;
  std::vector<cd> s(static_cast<std::size_t>(size * size), cd(0.0));
  auto at = [&](int r, int c) -> cd& { return s[static_cast<std::size_t>(r * size + c)]; };
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= m; ++k) at(r, r + k) = a[m - k];
  for (int r = 0; r < m; ++r)
    for (int k = 0; k <= n; ++k) at(n + r, r + k) = b[n - k];
  // LU with partial pivoting.
  cd det = 1.0;
  for (int c = 0; c < size; ++c) {
    int piv = c;
    for (int r = c + 1; r < size; ++r)
      if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
    if (at(piv, c) == cd(0.0)) return 0.0;
    if (piv != c) {
      for (int k = 0; k < size; ++k) std::swap(at(piv, k), at(c, k));
      det = -det;
    }
    det *= at(c, c);
    for (int r = c + 1; r < size; ++r) {
      const cd f = at(r, c) / at(c, c);
      for (int k = c; k < size; ++k) at(r, k) -= f * at(c, k);
    }
  }
  return det;
}

double max_abs(std::span<const cd> p) {
  double m = 0.0;
  for (const auto& c : p) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace ratdyn::poly
