#include "ratdyn/boettcher.hpp"

#include <cmath>
#include <numbers>

namespace ratdyn {

namespace {

Poly series_mul(const Poly& a, const Poly& b, std::size_t order) {
  Poly r(order + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= order; ++i)
    for (std::size_t j = 0; j < b.size() && i + j <= order; ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly series_pow(const Poly& a, int k, std::size_t order) {
  Poly r(order + 1, 0.0);
  r[0] = 1.0;
  for (int i = 0; i < k; ++i) r = series_mul(r, a, order);
  return r;
}

// n / m as a power series; m(0) != 0.
Poly series_div(const Poly& n, const Poly& m, std::size_t order) {
  if (m.empty() || m[0] == cd(0.0)) throw Error("series_div: denominator vanishes at 0");
  Poly q(order + 1, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    cd s = k < n.size() ? n[k] : cd(0.0);
    for (std::size_t j = 1; j <= k && j < m.size(); ++j) s -= m[j] * q[k - j];
    q[k] = s / m[0];
  }
  return q;
}

cd series_eval(const Poly& s, cd u) {
  cd r = 0.0;
  for (std::size_t k = s.size(); k-- > 0;) r = r * u + s[k];
  return r;
}

}  // namespace

cd BoettcherChart::local(const SpherePoint& z) const {
  if (attractor.is_infinity()) return z.coord(Chart::Infinity);
  return z.value() - attractor.value();
}

SpherePoint BoettcherChart::from_local(cd u) const {
  if (attractor.is_infinity()) return SpherePoint::from_coord(Chart::Infinity, u);
  return SpherePoint(attractor.value() + u);
}

SpherePoint BoettcherChart::inverse(cd v) const { return from_local(series_eval(psi, v)); }

cd BoettcherChart::forward(const SpherePoint& z) const { return series_eval(beta, local(z)); }

Poly local_series(const RationalMap& map, const SpherePoint& a, int order) {
  Poly n, m;
  if (a.is_infinity()) {
    // 1/f(1/u) = revQ(u) / revP(u)
    n = map.chart_denom(Chart::Infinity);
    m = map.chart_numer(Chart::Infinity);
  } else {
    const cd z0 = a.value();
    m = poly::taylor_shift(map.denom(), z0);
    n = poly::sub(poly::taylor_shift(map.numer(), z0), poly::scale(m, z0));
  }
  return series_div(n, m, static_cast<std::size_t>(order));
}

double functional_equation_error(const RationalMap& map, const BoettcherChart& chart, double r,
                                 int samples) {
  double worst = 0.0;
  const int d = chart.degree;
  for (int k = 0; k < samples; ++k) {
    const double t = (k + 0.5) / samples;
    const SpherePoint z = chart.inverse(std::polar(r, 2.0 * std::numbers::pi * t));
    const SpherePoint w = chart.inverse(std::polar(std::pow(r, d), 2.0 * std::numbers::pi * d * t));
    worst = std::max(worst, spherical_distance(map(z), w));
  }
  return worst;
}

BoettcherChart build_chart(const RationalMap& map, const SpherePoint& a, int d, int order,
                           const BasinAtlas* atlas, int attractor_id) {
  if (d < 2) throw HypothesisError("build_chart: local degree must be at least 2");
  if (order < 2) throw Error("build_chart: order must be at least 2");
  if (spherical_distance(map(a), a) > 1e-12)
    throw HypothesisError("build_chart: " + to_string(a) + " is not a fixed point");

  const auto L = static_cast<std::size_t>(d + order);
  const Poly g = local_series(map, a, static_cast<int>(L));
  const double scale = std::max(1.0, poly::max_abs(g));
  for (int k = 0; k < d; ++k)
    if (std::abs(g[static_cast<std::size_t>(k)]) > 1e-10 * scale)
      throw HypothesisError("build_chart: attractor is not superattracting of local degree " +
                            std::to_string(d));
  const cd c = g[static_cast<std::size_t>(d)];
  if (std::abs(c) < 1e-12 * scale)
    throw HypothesisError("build_chart: local degree exceeds " + std::to_string(d));

  if (atlas) {
    for (const auto& cp : critical_points(map)) {
      if (spherical_distance(cp, a) < 1e-8) continue;
      if (atlas->in_immediate(attractor_id, cp))
        throw HypothesisError("build_chart: extra critical point " + to_string(cp) +
                              " in the immediate basin");
    }
  }

  BoettcherChart ch;
  ch.attractor = a;
  ch.degree = d;
  ch.leading = c;
  ch.normalization = d == 2 ? c : std::pow(c, 1.0 / (d - 1));

  // beta(g(u)) = beta(u)^d, solved one coefficient at a time.
  const auto K = static_cast<std::size_t>(order);
  ch.beta.assign(K + 1, 0.0);
  ch.beta[1] = ch.normalization;
  for (std::size_t m = 1; m < K; ++m) {
    const std::size_t e = static_cast<std::size_t>(d) + m;
    cd lhs = 0.0;
    Poly gk(L + 1, 0.0);
    gk[0] = 1.0;
    for (std::size_t k = 1; k <= m + 1; ++k) {
      gk = series_mul(gk, g, L);
      lhs += ch.beta[k] * gk[e];
    }
    const cd rhs = series_pow(ch.beta, d, L)[e];
    ch.beta[m + 1] = (lhs - rhs) / (static_cast<double>(d) * c);
  }

  // Reversion.
  ch.psi.assign(K + 1, 0.0);
  ch.psi[1] = 1.0 / ch.normalization;
  std::vector<Poly> bpow(K + 1);
  bpow[1] = ch.beta;
  for (std::size_t j = 2; j <= K; ++j) bpow[j] = series_mul(bpow[j - 1], ch.beta, K);
  for (std::size_t k = 2; k <= K; ++k) {
    cd s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += ch.psi[j] * bpow[j][k];
    ch.psi[k] = -s / bpow[k][k];
  }

  for (double r = 0.5; r > 1e-6; r *= 0.5) {
    if (functional_equation_error(map, ch, r) < 1e-9) {
      ch.reference_radius = r;
      return ch;
    }
  }
  throw ConvergenceError("build_chart: functional equation check failed at every radius");
}

}  // namespace ratdyn
