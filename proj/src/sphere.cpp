#include "ratdyn/sphere.hpp"

#include "ratdyn/roots.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ratdyn {

namespace {

bool finite(cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double chordal(cd p, cd q) {
  return 2.0 * std::abs(p - q) / std::sqrt((1.0 + std::norm(p)) * (1.0 + std::norm(q)));
}

// Chordal distance between affine p and the point with infinity-chart coordinate w.
double chordal_mixed(cd p, cd w) {
  return 2.0 * std::abs(p * w - 1.0) / std::sqrt((1.0 + std::norm(p)) * (1.0 + std::norm(w)));
}

}  // namespace

SpherePoint::SpherePoint(cd z) {
  if (finite(z)) {
    z_ = z;
  } else {
    inf_ = true;
  }
}

SpherePoint SpherePoint::infinity() {
  SpherePoint p;
  p.inf_ = true;
  return p;
}

SpherePoint SpherePoint::from_coord(Chart chart, cd coord) {
  if (chart == Chart::Affine) return SpherePoint(coord);
  if (coord == cd(0.0)) return infinity();
  return SpherePoint(1.0 / coord);
}

SpherePoint SpherePoint::from_r3(const std::array<double, 3>& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double x = v[0] / n;
  const double y = v[1] / n;
  const double h = v[2] / n;
  if (h <= 0.0) return SpherePoint(cd(x, y) / (1.0 - h));
  return from_coord(Chart::Infinity, cd(x, -y) / (1.0 + h));
}

cd SpherePoint::value() const {
  if (inf_) throw Error("SpherePoint::value on infinity");
  return z_;
}

Chart SpherePoint::natural_chart() const {
  return (!inf_ && std::abs(z_) <= 1.0) ? Chart::Affine : Chart::Infinity;
}

cd SpherePoint::coord(Chart chart) const {
  if (chart == Chart::Affine) return value();
  if (inf_) return 0.0;
  if (z_ == cd(0.0)) throw Error("SpherePoint::coord: zero is not in the infinity chart");
  return 1.0 / z_;
}

std::array<double, 3> SpherePoint::to_r3() const {
  if (inf_) return {0.0, 0.0, 1.0};
  if (std::abs(z_) <= 1.0) {
    const double d = 1.0 + std::norm(z_);
    return {2.0 * z_.real() / d, 2.0 * z_.imag() / d, (std::norm(z_) - 1.0) / d};
  }
  const cd w = 1.0 / z_;
  const double d = 1.0 + std::norm(w);
  return {2.0 * w.real() / d, -2.0 * w.imag() / d, (1.0 - std::norm(w)) / d};
}

std::string to_string(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << p.value().real() << (p.value().imag() < 0 ? "-" : "+") << std::abs(p.value().imag()) << "i";
  return os.str();
}

double spherical_distance(const SpherePoint& p, const SpherePoint& q) {
  const Chart cp = p.natural_chart();
  const Chart cq = q.natural_chart();
  if (cp == cq) return chordal(p.coord(cp), q.coord(cq));
  if (cp == Chart::Affine) return chordal_mixed(p.value(), q.coord(Chart::Infinity));
  return chordal_mixed(q.value(), p.coord(Chart::Infinity));
}

SpherePoint rotate(const SpherePoint& z, cd c) {
  if (z.natural_chart() == Chart::Affine) {
    const cd v = z.value();
    const cd den = 1.0 + std::conj(c) * v;
    if (den == cd(0.0)) return SpherePoint::infinity();
    return SpherePoint((v - c) / den);
  }
  const cd w = z.coord(Chart::Infinity);
  const cd den = w + std::conj(c);
  if (den == cd(0.0)) return SpherePoint::infinity();
  return SpherePoint((1.0 - c * w) / den);
}

SpherePoint rotate_inverse(const SpherePoint& w, cd c) {
  if (w.natural_chart() == Chart::Affine) {
    const cd v = w.value();
    const cd den = 1.0 - std::conj(c) * v;
    if (den == cd(0.0)) return SpherePoint::infinity();
    return SpherePoint((v + c) / den);
  }
  const cd u = w.coord(Chart::Infinity);
  const cd den = u - std::conj(c);
  if (den == cd(0.0)) return SpherePoint::infinity();
  return SpherePoint((1.0 + c * u) / den);
}

RationalMap::RationalMap(Poly numer, Poly denom) : RationalMap(std::move(numer), std::move(denom), true) {}

RationalMap RationalMap::trusted(Poly numer, Poly denom) {
  return RationalMap(std::move(numer), std::move(denom), false);
}

RationalMap::RationalMap(Poly numer, Poly denom, bool check) {
  numer = poly::trimmed(std::move(numer));
  denom = poly::trimmed(std::move(denom));
  const int dp = poly::degree(numer);
  const int dq = poly::degree(denom);
  if (dp < 0 || dq < 0) throw Error("RationalMap: zero numerator or denominator");
  degree_ = std::max(dp, dq);
  if (degree_ < 2) throw Error("RationalMap: degree must be at least 2");
  const cd lead = denom[static_cast<std::size_t>(dq)];
  numer_ = poly::scale(numer, 1.0 / lead);
  denom_ = poly::scale(denom, 1.0 / lead);

  // common root: numerator small at a root of the denominator, relative to its term sizes
  if (check && dq >= 1) {
    for (const cd r : find_roots(denom_).roots) {
      double scale = 0.0, rk = 1.0;
      for (const cd c : numer_) {
        scale += std::abs(c) * rk;
        rk *= std::abs(r);
      }
      if (std::abs(poly::eval(numer_, r)) <= 1e-10 * scale)
        throw Error("RationalMap: numerator and denominator share a root");
    }
  }

  const auto size = static_cast<std::size_t>(degree_) + 1;
  aff_num_ = poly::padded(numer_, size);
  aff_den_ = poly::padded(denom_, size);
  inf_num_.assign(aff_num_.rbegin(), aff_num_.rend());
  inf_den_.assign(aff_den_.rbegin(), aff_den_.rend());
}

const Poly& RationalMap::chart_numer(Chart in) const {
  return in == Chart::Affine ? aff_num_ : inf_num_;
}

const Poly& RationalMap::chart_denom(Chart in) const {
  return in == Chart::Affine ? aff_den_ : inf_den_;
}

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
  const Chart in = z.natural_chart();
  const cd Z = z.coord(in);
  const cd n = poly::eval(chart_numer(in), Z);
  const cd m = poly::eval(chart_denom(in), Z);
  if (std::abs(n) <= std::abs(m)) return SpherePoint(n / m);
  return SpherePoint::from_coord(Chart::Infinity, m / n);
}

ChartJet RationalMap::jet(const SpherePoint& z, Chart in, Chart out) const {
  const cd Z = z.coord(in);
  const auto [n, dn] = poly::eval_with_derivative(chart_numer(in), Z);
  const auto [m, dm] = poly::eval_with_derivative(chart_denom(in), Z);
  ChartJet j;
  if (out == Chart::Affine) {
    j.finite = m != cd(0.0);
    j.value = n / m;
    j.derivative = (dn * m - n * dm) / (m * m);
  } else {
    j.finite = n != cd(0.0);
    j.value = m / n;
    j.derivative = (dm * n - m * dn) / (n * n);
  }
  j.finite = j.finite && finite(j.value) && finite(j.derivative);
  return j;
}

ChartJet RationalMap::natural_jet(const SpherePoint& z, Chart* in_out, Chart* out_out) const {
  const Chart in = z.natural_chart();
  const cd Z = z.coord(in);
  const cd n = poly::eval(chart_numer(in), Z);
  const cd m = poly::eval(chart_denom(in), Z);
  const Chart out = std::abs(n) <= std::abs(m) ? Chart::Affine : Chart::Infinity;
  if (in_out) *in_out = in;
  if (out_out) *out_out = out;
  return jet(z, in, out);
}

std::vector<SpherePoint> RationalMap::preimages(const SpherePoint& target) const {
  const auto size = static_cast<std::size_t>(degree_) + 1;
  Poly a;
  if (target.is_infinity()) {
    a = aff_den_;
  } else if (std::abs(target.value()) <= 1.0) {
    a = poly::sub(aff_num_, poly::scale(aff_den_, target.value()));
  } else {
    a = poly::sub(aff_den_, poly::scale(aff_num_, 1.0 / target.value()));
  }
  a = poly::padded(a, size);
  Poly b(a.rbegin(), a.rend());

  std::vector<SpherePoint> out;
  const double scale = poly::max_abs(a);
  const bool use_w = std::abs(a[static_cast<std::size_t>(degree_)]) < 1e-8 * scale;
  const Poly& solve = use_w ? b : a;
  const int deg = poly::degree(solve);
  if (deg >= 1) {
    const auto roots = find_roots(solve);
    for (const auto& r : roots.roots)
      out.push_back(use_w ? SpherePoint::from_coord(Chart::Infinity, r) : SpherePoint(r));
  }
  while (static_cast<int>(out.size()) < degree_)
    out.push_back(use_w ? SpherePoint(0.0) : SpherePoint::infinity());

  // Polish in the natural chart of each root.
  for (auto& p : out) {
    if (p.is_infinity() || p.value() == cd(0.0)) continue;
    const Chart c = p.natural_chart();
    const Poly& eq = c == Chart::Affine ? a : b;
    cd x = p.coord(c);
    double best = std::abs(poly::eval(eq, x));
    for (int s = 0; s < 3 && best > 0.0; ++s) {
      const auto [v, dv] = poly::eval_with_derivative(eq, x);
      if (dv == cd(0.0)) break;
      const cd cand = x - v / dv;
      const double r = std::abs(poly::eval(eq, cand));
      if (!(r < best)) break;
      best = r;
      x = cand;
    }
    p = SpherePoint::from_coord(c, x);
  }
  return out;
}

Poly RationalMap::wronskian() const {
  const Poly w = poly::sub(poly::mul(poly::derivative(numer_), denom_),
                           poly::mul(numer_, poly::derivative(denom_)));
  // Degree is at most 2D-2; the 2D-1 coefficient cancels exactly in exact arithmetic.
  Poly out(w.begin(), w.begin() + std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w.size()),
                                                           2 * degree_ - 1));
  return poly::trimmed(out);
}

RationalMap compose(const RationalMap& f, const RationalMap& g) {
  const int d = f.degree();
  const Poly p = poly::padded(f.numer(), static_cast<std::size_t>(d) + 1);
  const Poly q = poly::padded(f.denom(), static_cast<std::size_t>(d) + 1);
  const Poly& a = g.numer();
  const Poly& b = g.denom();
  std::vector<Poly> apow{Poly{cd(1.0)}};
  std::vector<Poly> bpow{Poly{cd(1.0)}};
  for (int k = 1; k <= d; ++k) {
    apow.push_back(poly::mul(apow.back(), a));
    bpow.push_back(poly::mul(bpow.back(), b));
  }
  Poly num{cd(0.0)};
  Poly den{cd(0.0)};
  for (int k = 0; k <= d; ++k) {
    const Poly term = poly::mul(apow[static_cast<std::size_t>(k)], bpow[static_cast<std::size_t>(d - k)]);
    num = poly::add(num, poly::scale(term, p[static_cast<std::size_t>(k)]));
    den = poly::add(den, poly::scale(term, q[static_cast<std::size_t>(k)]));
  }
  return RationalMap::trusted(num, den);
}

RationalMap conjugate_by_rotation(const RationalMap& f, cd c) {
  const int d = f.degree();
  const Poly p = poly::padded(f.numer(), static_cast<std::size_t>(d) + 1);
  const Poly q = poly::padded(f.denom(), static_cast<std::size_t>(d) + 1);
  const Poly x{c, cd(1.0)};
  const Poly y{cd(1.0), -std::conj(c)};
  std::vector<Poly> xp{Poly{cd(1.0)}};
  std::vector<Poly> yp{Poly{cd(1.0)}};
  for (int k = 1; k <= d; ++k) {
    xp.push_back(poly::mul(xp.back(), x));
    yp.push_back(poly::mul(yp.back(), y));
  }
  Poly a{cd(0.0)};
  Poly b{cd(0.0)};
  for (int k = 0; k <= d; ++k) {
    const Poly term = poly::mul(xp[static_cast<std::size_t>(k)], yp[static_cast<std::size_t>(d - k)]);
    a = poly::add(a, poly::scale(term, p[static_cast<std::size_t>(k)]));
    b = poly::add(b, poly::scale(term, q[static_cast<std::size_t>(k)]));
  }
  return RationalMap::trusted(poly::sub(a, poly::scale(b, c)), poly::add(b, poly::scale(a, std::conj(c))));
}

SpherePoint eval(const RationalMap& map, const SpherePoint& z) { return map(z); }

double spherical_derivative(const RationalMap& map, const SpherePoint& z) {
  Chart in{};
  const ChartJet j = map.natural_jet(z, &in);
  const cd Z = z.coord(in);
  return std::abs(j.derivative) * (1.0 + std::norm(Z)) / (1.0 + std::norm(j.value));
}

std::vector<SpherePoint> critical_points(const RationalMap& map) {
  const Poly w = map.wronskian();
  const int m = poly::degree(w);
  std::vector<SpherePoint> out;
  if (m >= 1) {
    for (const auto& r : find_roots(w).roots) out.emplace_back(r);
  }
  const int total = 2 * map.degree() - 2;
  while (static_cast<int>(out.size()) < total) out.push_back(SpherePoint::infinity());
  return out;
}

OrbitJet orbit_jet(const RationalMap& map, const SpherePoint& z, int n, const Chart* in_chart,
                   const Chart* out_chart) {
  OrbitJet r;
  r.in = in_chart ? *in_chart : z.natural_chart();
  r.out = r.in;
  r.point = z;
  r.derivative = 1.0;
  Chart c = r.in;
  for (int i = 0; i < n; ++i) {
    const SpherePoint next = map(r.point);
    const Chart out = (i == n - 1 && out_chart) ? *out_chart : next.natural_chart();
    const ChartJet j = map.jet(r.point, c, out);
    if (!j.finite) r.finite = false;
    r.derivative *= j.derivative;
    r.point = next;
    c = out;
  }
  if (n == 0 && out_chart) {
    // Chart change only.
    if (*out_chart != r.in) {
      const cd Z = z.coord(r.in);
      r.derivative = -1.0 / (Z * Z);
      r.finite = Z != cd(0.0);
    }
  }
  r.out = n == 0 && out_chart ? *out_chart : c;
  return r;
}

double spherical_derivative_iterate(const RationalMap& map, const SpherePoint& z, int n) {
  double prod = 1.0;
  SpherePoint cur = z;
  for (int i = 0; i < n; ++i) {
    prod *= spherical_derivative(map, cur);
    cur = map(cur);
  }
  return prod;
}

}  // namespace ratdyn
