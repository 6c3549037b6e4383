#include "ratdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ratdyn {

std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::Superattracting: return "superattracting";
    case CycleClass::Attracting: return "attracting";
    case CycleClass::Repelling: return "repelling";
    case CycleClass::ParabolicSuspect: return "parabolic-suspect";
  }
  return "?";
}

void append_unique(std::vector<SpherePoint>& pts, const SpherePoint& p, double tol) {
  for (const auto& q : pts)
    if (spherical_distance(p, q) < tol) return;
  pts.push_back(p);
}

std::vector<SpherePoint> orbit(const RationalMap& map, const SpherePoint& z, int n) {
  if (n < 0) throw Error("orbit: n must be non-negative");
  std::vector<SpherePoint> out{z};
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) out.push_back(map(out.back()));
  return out;
}

namespace {

SpherePoint iterate(const RationalMap& map, SpherePoint z, int n) {
  for (int i = 0; i < n; ++i) z = map(z);
  return z;
}

bool point_less(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinity() != b.is_infinity()) return b.is_infinity();
  if (a.is_infinity()) return false;
  const cd x = a.value(), y = b.value();
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

// h(X, Y) = sum c_k X^k Y^(D-k) with both partials.
struct Homog {
  cd v, dx, dy;
};

Homog homog_eval(const Poly& c, const std::vector<cd>& xp, const std::vector<cd>& yp, int D) {
  Homog h{0.0, 0.0, 0.0};
  for (int k = 0; k <= D; ++k) {
    const cd ck = c[static_cast<std::size_t>(k)];
    if (ck == cd(0.0)) continue;
    h.v += ck * xp[k] * yp[D - k];
    if (k > 0) h.dx += static_cast<double>(k) * ck * xp[k - 1] * yp[D - k];
    if (k < D) h.dy += static_cast<double>(D - k) * ck * xp[k] * yp[D - k - 1];
  }
  return h;
}

// Newton correction H/H' for H(w) = P_n(w) - w Q_n(w), the homogeneous fixed-point
// polynomial of g^n, evaluated through the iteration without expanding coefficients.
class FixedPointCorrection {
 public:
  FixedPointCorrection(const RationalMap& g, int n)
      : p_(poly::padded(g.numer(), g.degree() + 1)),
        q_(poly::padded(g.denom(), g.degree() + 1)),
        D_(g.degree()),
        n_(n) {}

  cd operator()(cd w) const {
    std::vector<cd> xp(D_ + 1), yp(D_ + 1);
    cd X = w, Y = 1.0, dX = 1.0, dY = 0.0;
    for (int s = 0; s < n_; ++s) {
      xp[0] = yp[0] = 1.0;
      for (int k = 1; k <= D_; ++k) {
        xp[k] = xp[k - 1] * X;
        yp[k] = yp[k - 1] * Y;
      }
      const Homog P = homog_eval(p_, xp, yp, D_);
      const Homog Q = homog_eval(q_, xp, yp, D_);
      const cd nX = P.v, nY = Q.v;
      const cd ndX = P.dx * dX + P.dy * dY;
      const cd ndY = Q.dx * dX + Q.dy * dY;
      // H/H' is invariant under a common scale of all four.
      const double s_ = std::max(std::abs(nX), std::abs(nY));
      const double inv = s_ > 0.0 ? 1.0 / s_ : 1.0;
      X = nX * inv;
      Y = nY * inv;
      dX = ndX * inv;
      dY = ndY * inv;
    }
    const cd H = X - w * Y;
    const cd dH = dX - Y - w * dY;
    return H / dH;
  }

 private:
  Poly p_, q_;
  int D_, n_;
};

// Points spread evenly on the sphere, stereographically projected.
std::vector<cd> fibonacci_seeds(std::size_t count) {
  std::vector<cd> out;
  out.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double zc = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double th = golden * static_cast<double>(k) + 0.1;
    // (x, y, zc) -> (x + iy)/(1 - zc)
    out.push_back(std::polar(r / (1.0 - zc), th));
  }
  return out;
}

double residual(const RationalMap& map, const SpherePoint& z, int n) {
  return spherical_distance(iterate(map, z, n), z);
}

}  // namespace

std::optional<SpherePoint> refine_periodic(const RationalMap& map, const SpherePoint& seed, int q,
                                           double tol, int max_iterations) {
  if (q < 1) throw Error("refine_periodic: period must be positive");
  SpherePoint z = seed;
  SpherePoint best = seed;
  double best_res = residual(map, seed, q);
  double prev_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const Chart c = z.natural_chart();
    const OrbitJet oj = orbit_jet(map, z, q, &c, &c);
    if (!oj.finite) break;
    const cd Z = z.coord(c);
    const cd Y = oj.point.coord(c);
    const cd dG = oj.derivative - 1.0;
    if (dG == cd(0.0)) break;
    const cd step = (Y - Z) / dG;
    const double st = std::abs(step);
    if (!std::isfinite(st)) break;
    z = SpherePoint::from_coord(c, Z - step);
    const double r = residual(map, z, q);
    if (r < best_res) {
      best_res = r;
      best = z;
    }
    if (st <= 1e-15 * std::max(1.0, std::abs(Z)) || (st < 1e-9 && st > 0.5 * prev_step)) break;
    prev_step = st;
  }
  if (best_res < tol) return best;
  return std::nullopt;
}

int minimal_period(const RationalMap& map, const SpherePoint& z, int n, double tol) {
  if (n < 1) throw Error("minimal_period: n must be positive");
  SpherePoint cur = z;
  for (int k = 1; k <= n; ++k) {
    cur = map(cur);
    if (n % k == 0 && spherical_distance(cur, z) < tol) return k;
  }
  return n;
}

cd multiplier(const RationalMap& map, const std::vector<SpherePoint>& cycle, double close_tol) {
  if (cycle.empty()) throw Error("multiplier: empty cycle");
  const std::size_t m = cycle.size();
  cd prod = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    const SpherePoint& a = cycle[k];
    const SpherePoint& b = cycle[(k + 1) % m];
    if (spherical_distance(map(a), b) > close_tol)
      throw Error("multiplier: cycle does not close under the map");
    const ChartJet j = map.jet(a, a.natural_chart(), b.natural_chart());
    prod *= j.derivative;
  }
  return prod;
}

CycleClass classify_multiplier(cd m, double classify_tol) {
  const double a = std::abs(m);
  if (a < 1e-8) return CycleClass::Superattracting;
  if (std::abs(a - 1.0) < classify_tol) return CycleClass::ParabolicSuspect;
  return a < 1.0 ? CycleClass::Attracting : CycleClass::Repelling;
}

PeriodicPoint make_periodic_point(const RationalMap& map, const SpherePoint& z, int period,
                                  double classify_tol) {
  PeriodicPoint p;
  p.point = z;
  p.period = period;
  auto cyc = orbit(map, z, period - 1);
  p.multiplier = multiplier(map, cyc, 1e-6);
  p.cls = classify_multiplier(p.multiplier, classify_tol);
  p.residual = spherical_distance(map(cyc.back()), z);
  return p;
}

namespace {

// Backward orbit of a repelling fixed point under f^n, rotated into the Aberth coordinate.
// Near expanding parts of the Julia set each preimage sits close to its own fixed point of f^n,
// which cuts the sweep count by a large factor compared with uniform seeds.
std::vector<cd> seeds_for(const RationalMap& map, int n, cd c, std::size_t count,
                          const PeriodicOptions& opts) {
  auto fib = fibonacci_seeds(count);
  if (n == 1) return fib;
  const auto fixed = periodic_points(map, 1, opts);
  const PeriodicPoint* anchor = nullptr;
  for (const auto& p : fixed.points)
    if (std::abs(p.multiplier) > 1.0 + opts.classify_tol &&
        (!anchor || std::abs(p.multiplier) > std::abs(anchor->multiplier)))
      anchor = &p;
  if (!anchor) return fib;
  std::vector<SpherePoint> level{anchor->point};
  for (int k = 0; k < n; ++k) {
    std::vector<SpherePoint> next;
    next.reserve(level.size() * static_cast<std::size_t>(map.degree()));
    for (const auto& t : level)
      for (const auto& p : map.preimages(t)) next.push_back(p);
    level = std::move(next);
  }
  std::vector<cd> out;
  out.reserve(count);
  for (std::size_t k = 0; k < level.size() && out.size() < count; ++k) {
    const SpherePoint w = rotate(level[k], c);
    cd v = w.is_infinity() ? fib[k] : w.value();
    if (!std::isfinite(std::abs(v))) v = fib[k];
    // Coincident seeds never separate under Aberth.
    for (int tries = 0; tries < 8; ++tries) {
      bool clash = false;
      for (const cd u : out)
        if (std::abs(u - v) <= 1e-10 * std::max(1.0, std::abs(v))) {
          clash = true;
          break;
        }
      if (!clash) break;
      v += 1e-4 * std::max(1.0, std::abs(v)) * std::polar(1.0, 0.7 * static_cast<double>(k + tries));
    }
    out.push_back(v);
  }
  for (std::size_t k = out.size(); k < count; ++k) out.push_back(fib[k]);
  return out;
}

}  // namespace

PeriodicPointSet periodic_points(const RationalMap& map, int n, const PeriodicOptions& opts) {
  if (n < 1 || n > opts.n_max) throw Error("periodic_points: n out of range");
  const double count_d = std::pow(static_cast<double>(map.degree()), n) + 1.0;
  if (count_d > 1e5) throw Error("periodic_points: degree^n + 1 exceeds 1e5");
  const auto count = static_cast<std::size_t>(count_d);

  PeriodicPointSet out;
  out.n = n;
  std::vector<SpherePoint> raw;

  if (count <= static_cast<std::size_t>(opts.implicit_limit)) {
    // Rotate so that infinity is not (close to) a fixed point of g^n; then the fixed-point
    // polynomial of g^n has full degree D^n + 1.
    static const cd rotations[] = {{0.0, 0.0},     {0.31, 0.17},  {-0.23, 0.41},
                                   {0.53, -0.29},  {-0.47, -0.36}, {0.12, 0.68}};
    cd c = rotations[0];
    bool found = false;
    for (const cd cand : rotations) {
      const RationalMap g = conjugate_by_rotation(map, cand);
      if (spherical_distance(iterate(g, SpherePoint::infinity(), n), SpherePoint::infinity()) >
          1e-3) {
        c = cand;
        found = true;
        break;
      }
    }
    if (!found) throw ConvergenceError("periodic_points: no admissible rotation");
    const RationalMap g = conjugate_by_rotation(map, c);
    const FixedPointCorrection corr(g, n);
    auto res = aberth_implicit(corr, seeds_for(map, n, c, count, opts), opts.max_iterations);
    for (const cd w : res.roots) {
      const SpherePoint z = rotate_inverse(SpherePoint(w), c);
      auto r = refine_periodic(map, z, n, 1e-10);
      raw.push_back(r ? *r : z);
    }
  } else {
    out.complete = false;
    std::vector<SpherePoint> seeds;
    for (const cd w : seeds_for(map, n, 0.0, count, opts)) seeds.emplace_back(w);
    const int A = 160, B = 80;
    for (int i = 0; i < A; ++i)
      for (int j = 0; j < A; ++j)
        seeds.emplace_back(cd(-2.0 + 4.0 * (i + 0.5) / A, -2.0 + 4.0 * (j + 0.5) / A));
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < B; ++j)
        seeds.push_back(SpherePoint::from_coord(
            Chart::Infinity, cd(-0.5 + (i + 0.5) / B, -0.5 + (j + 0.5) / B)));
    std::vector<std::optional<SpherePoint>> refined(seeds.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(seeds.size()); ++k)
      refined[static_cast<std::size_t>(k)] = refine_periodic(map, seeds[static_cast<std::size_t>(k)], n, 1e-10);
    for (const auto& r : refined)
      if (r) raw.push_back(*r);
  }

  std::vector<SpherePoint> uniq;
  for (const auto& z : raw) {
    const double r = residual(map, z, n);
    if (r > 1e-6) throw ConvergenceError("periodic_points: root residual above tolerance");
    append_unique(uniq, z, opts.dedupe_tol);
  }
  std::vector<PeriodicPoint> pts;
  for (auto z : uniq) {
    const int k = minimal_period(map, z, n, 1e-8);
    // f^n amplifies rounding by |multiplier|^(n/k); refine at the minimal period instead.
    if (k < n)
      if (auto r = refine_periodic(map, z, k, 1e-10)) z = *r;
    PeriodicPoint p = make_periodic_point(map, z, k, opts.classify_tol);
    p.residual = residual(map, z, k);
    out.max_residual = std::max(out.max_residual, p.residual);
    pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(),
            [](const PeriodicPoint& a, const PeriodicPoint& b) { return point_less(a.point, b.point); });
  out.points = std::move(pts);
  return out;
}

std::vector<SpherePoint> PostcriticalSet::points() const {
  std::vector<SpherePoint> out;
  for (const auto& f : forward)
    for (const auto& p : f.orbit) append_unique(out, p, 1e-10);
  return out;
}

PostcriticalSet postcritical(const RationalMap& map, int depth, int backward_depth,
                             const PostcriticalOptions& opts) {
  if (depth < 1 || backward_depth < 0) throw Error("postcritical: bad depth");
  PostcriticalSet out;
  out.depth = depth;
  out.backward_depth = backward_depth;

  const auto crit = critical_points(map);
  std::vector<std::pair<SpherePoint, int>> distinct;
  for (const auto& c : crit) {
    bool merged = false;
    for (auto& [p, m] : distinct)
      if (spherical_distance(p, c) < 1e-8) {
        ++m;
        merged = true;
        break;
      }
    if (!merged) distinct.emplace_back(c, 1);
  }

  out.finite_flag = true;
  for (const auto& [c, mult] : distinct) {
    CriticalOrbit co;
    co.critical = c;
    co.multiplicity = mult;
    std::vector<SpherePoint> seen{c};  // seen[k] = f^k(c)
    SpherePoint cur = c;
    for (int k = 1; k <= depth && !co.cycles; ++k) {
      cur = map(cur);
      co.orbit.push_back(cur);
      for (int j = 0; j < k; ++j) {
        if (spherical_distance(cur, seen[static_cast<std::size_t>(j)]) < opts.snap_tol) {
          co.cycles = true;
          co.preperiod = j;
          co.period = k - j;
          break;
        }
      }
      seen.push_back(cur);
    }
    if (!co.cycles) out.finite_flag = false;
    out.forward.push_back(std::move(co));
  }

  out.backward.push_back(out.points());
  std::size_t total = out.backward[0].size();
  for (int m = 1; m <= backward_depth; ++m) {
    std::vector<SpherePoint> level;
    for (const auto& t : out.backward.back())
      for (const auto& p : map.preimages(t)) append_unique(level, p, opts.snap_tol);
    total += level.size();
    if (total > opts.cap) throw Error("postcritical: preimage tree cap exceeded");
    out.backward.push_back(std::move(level));
  }
  return out;
}

std::optional<std::pair<int, int>> eventually_periodic_test(const RationalMap& map,
                                                            const SpherePoint& z, int preperiod_max,
                                                            int period_max, double tol) {
  if (preperiod_max < 0 || period_max < 1) throw Error("eventually_periodic_test: bad bounds");
  const auto o = orbit(map, z, preperiod_max + period_max);
  for (int l = 0; l <= preperiod_max; ++l) {
    for (int q = 1; q <= period_max; ++q) {
      const auto& a = o[static_cast<std::size_t>(l)];
      if (spherical_distance(o[static_cast<std::size_t>(l + q)], a) >= tol) continue;
      const auto r = refine_periodic(map, a, q, 1e-10);
      if (r && spherical_distance(*r, a) < 10.0 * tol) return std::make_pair(l, q);
    }
  }
  return std::nullopt;
}

}  // namespace ratdyn
