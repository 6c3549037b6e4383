#include "ratdyn/rays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ratdyn/dynamics.hpp"

namespace ratdyn {

namespace {

// 2 b - a in the chart natural for b.
SpherePoint extrapolate(const SpherePoint& a, const SpherePoint& b) {
  const Chart c = b.natural_chart();
  if (c == Chart::Affine && a.is_infinity()) return b;
  if (c == Chart::Infinity && !a.is_infinity() && a.value() == cd(0.0)) return b;
  return SpherePoint::from_coord(c, 2.0 * b.coord(c) - a.coord(c));
}

}  // namespace

SpherePoint nearest_preimage(const RationalMap& map, const SpherePoint& target,
                             const SpherePoint& near, double dominance) {
  const auto pre = map.preimages(target);
  double best = std::numeric_limits<double>::infinity(), second = best;
  std::size_t bi = 0;
  for (std::size_t k = 0; k < pre.size(); ++k) {
    const double d = spherical_distance(pre[k], near);
    if (d < best) {
      second = best;
      best = d;
      bi = k;
    } else if (d < second) {
      second = d;
    }
  }
  if (second < dominance * best && second > 0.0)
    throw BranchAmbiguity("ray continuation: ambiguous preimage of " + to_string(target));
  return pre[bi];
}

RayTracer::RayTracer(RationalMap map, BoettcherChart chart, int basin, TraceOptions opts)
    : map_(std::move(map)), chart_(std::move(chart)), basin_(basin), opts_(opts) {
  if (opts_.band < 2) throw Error("RayTracer: band must be at least 2");
  const double r0 = chart_.reference_radius;
  for (int j = 0; j < opts_.band; ++j)
    radii_.push_back(std::pow(r0, std::pow(chart_.degree, 1.0 - static_cast<double>(j) / opts_.band)));
}

const std::vector<SpherePoint>& RayTracer::points(const Angle& s, int levels) {
  const auto m = static_cast<std::size_t>(opts_.band);
  auto& v = cache_[s];
  if (v.empty()) {
    for (const double r : radii_)
      v.push_back(chart_.inverse(std::polar(r, 2.0 * std::numbers::pi * s.value())));
  }
  const Angle ds = angle_step(s, chart_.degree);
  while (v.size() < (static_cast<std::size_t>(levels) + 1) * m) {
    const std::size_t k = v.size() / m;
    const auto& parent = points(ds, static_cast<int>(k) - 1);
    if (v.size() / m != k) continue;  // filled in by the recursion (periodic angles)
    for (std::size_t j = 0; j < m; ++j) {
      const SpherePoint target = parent[(k - 1) * m + j];
      const SpherePoint pred = extrapolate(v[v.size() - 2], v[v.size() - 1]);
      const SpherePoint z = nearest_preimage(map_, target, pred, opts_.dominance);
      v.push_back(z);
    }
  }
  return v;
}

SpherePoint refine_preperiodic(const RationalMap& map, const SpherePoint& x, int l, int q) {
  const auto o = orbit(map, x, l);
  auto y = refine_periodic(map, o.back(), q, 1e-10);
  if (!y || spherical_distance(*y, o.back()) > 1e-6) return x;
  SpherePoint cur = *y;
  for (int i = l - 1; i >= 0; --i) cur = nearest_preimage(map, cur, o[static_cast<std::size_t>(i)], 1.0);
  return cur;
}

Ray RayTracer::trace(const Angle& t) {
  Ray r;
  r.basin = basin_;
  r.angle = t;
  const auto m = static_cast<std::size_t>(opts_.band);
  int calm = 0;
  int k = 1;
  for (; k <= opts_.max_levels; ++k) {
    const auto& v = points(t, k);
    const double step = spherical_distance(v[k * m], v[(k - 1) * m]);
    calm = step < opts_.step_tol ? calm + 1 : 0;
    if (calm >= opts_.landed_levels) {
      r.landed = true;
      break;
    }
  }
  r.levels = std::min(k, opts_.max_levels);
  const auto& v = points(t, r.levels);
  r.polyline.reserve(v.size() + 2);
  r.polyline.push_back(chart_.attractor);
  r.polyline.insert(r.polyline.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>((r.levels + 1) * m));
  if (r.landed) {
    const auto [l, q] = angle_eventual_period(t, chart_.degree);
    r.landing_point = refine_preperiodic(map_, r.polyline.back(), l, q);
    r.polyline.push_back(*r.landing_point);
  }
  return r;
}

Ray trace_ray(const RationalMap& map, const BoettcherChart& chart, const Angle& t, int max_levels,
              double step_tol) {
  TraceOptions o;
  o.max_levels = max_levels;
  o.step_tol = step_tol;
  RayTracer tr(map, chart, 0, o);
  Ray r = tr.trace(t);
  if (!r.landed) throw ConvergenceError("trace_ray: no landing within max_levels for t = " + t.str());
  return r;
}

}  // namespace ratdyn
