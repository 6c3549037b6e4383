#include "ratdyn/chords.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <nlohmann/json.hpp>

namespace ratdyn {

std::vector<SpherePoint> Chord::polyline() const {
  std::vector<SpherePoint> out;
  const auto& p1 = ray1.polyline;
  const auto& p2 = ray2.polyline;
  out.reserve(p1.size() + p2.size());
  // Landed rays end with their landing point; the junction replaces both.
  out.insert(out.end(), p1.begin(), p1.end() - (ray1.landed ? 1 : 0));
  out.push_back(junction);
  for (auto it = p2.rbegin() + (ray2.landed ? 1 : 0); it != p2.rend(); ++it) out.push_back(*it);
  return out;
}

Chord make_chord(const RationalMap& map, Ray r1, Ray r2, double tol, int degree) {
  if (!r1.landed || !r2.landed) throw Error("make_chord: both rays must land");
  const SpherePoint& x = *r1.landing_point;
  const SpherePoint& y = *r2.landing_point;
  if (spherical_distance(x, y) >= tol) throw Error("make_chord: landing points do not meet");
  const Chart ch = x.natural_chart();
  SpherePoint mid = x;
  const bool far = ch == Chart::Affine ? y.is_infinity() : (!y.is_infinity() && y.value() == cd(0.0));
  if (!far) mid = SpherePoint::from_coord(ch, 0.5 * (x.coord(ch) + y.coord(ch)));
  if (degree >= 2) {
    const auto [l, q] = angle_eventual_period(r1.angle, degree);
    mid = refine_preperiodic(map, mid, l, q);
  }
  Chord c;
  c.junction = mid;
  c.ray1 = std::move(r1);
  c.ray2 = std::move(r2);
  return c;
}

std::vector<Chord> detect_chords(RayTracer& basin1, RayTracer& basin2,
                                 const std::vector<Angle>& angles1,
                                 const std::vector<Angle>& angles2, double junction_tol) {
  auto a1 = angles1, a2 = angles2;
  std::sort(a1.begin(), a1.end());
  std::sort(a2.begin(), a2.end());
  std::vector<Ray> r1, r2;
  for (const auto& t : a1) r1.push_back(basin1.trace(t));
  for (const auto& t : a2) r2.push_back(basin2.trace(t));

  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (!r1[i].landed) continue;
    for (std::size_t j = 0; j < r2.size(); ++j) {
      if (!r2[j].landed) continue;
      const double d = spherical_distance(*r1[i].landing_point, *r2[j].landing_point);
      if (d < junction_tol) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<char> used1(r1.size(), 0), used2(r2.size(), 0);
  std::vector<Chord> out;
  for (const auto& p : pairs) {
    if (used1[p.i] || used2[p.j]) continue;
    used1[p.i] = used2[p.j] = 1;
    out.push_back(make_chord(basin1.map(), r1[p.i], r2[p.j], junction_tol, basin1.degree()));
  }
  std::sort(out.begin(), out.end(), [](const Chord& a, const Chord& b) {
    return a.ray1.angle != b.ray1.angle ? a.ray1.angle < b.ray1.angle : a.ray2.angle < b.ray2.angle;
  });
  return out;
}

std::vector<Angle> multi_access(RayTracer& tracer, const SpherePoint& point,
                                const std::vector<Angle>& grid, double tol) {
  auto g = grid;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  std::vector<Angle> out;
  for (const auto& t : g) {
    const Ray r = tracer.trace(t);
    if (r.landed && spherical_distance(*r.landing_point, point) < tol) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Hausdorff distance between polylines in R^3.

namespace {

using V3 = std::array<double, 3>;

V3 lerp(const V3& a, const V3& b, double s) {
  return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])};
}

double seg_dist(const V3& p, const V3& a, const V3& b) {
  const V3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const V3 ap{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const double L = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
  double s = L > 0.0 ? (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / L : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const V3 c = lerp(a, b, s);
  return std::hypot(p[0] - c[0], p[1] - c[1], p[2] - c[2]);
}

double dist_to_poly(const V3& p, const std::vector<V3>& B) {
  if (B.size() == 1) return seg_dist(p, B[0], B[0]);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < B.size(); ++k) m = std::min(m, seg_dist(p, B[k], B[k + 1]));
  return m;
}

// sup over the polyline A of the distance to B. The distance to one segment is convex along a
// segment of A, so min_j max(f_j(s0), f_j(s1)) bounds the sup on [s0, s1]; branch and bound.
double directed(const std::vector<V3>& A, const std::vector<V3>& B) {
  const std::size_t nb = B.size() < 2 ? 1 : B.size() - 1;
  auto seg_b = [&](std::size_t j, const V3& p) {
    return B.size() < 2 ? seg_dist(p, B[0], B[0]) : seg_dist(p, B[j], B[j + 1]);
  };
  // scans start at the last useful segment; consecutive points of A are usually near it
  std::size_t hint = 0;
  // true when some segment of B is within thr of p
  auto within = [&](const V3& p, double thr) {
    for (std::size_t k = 0; k < nb; ++k) {
      const std::size_t j = (hint + k) % nb;
      if (seg_b(j, p) <= thr) {
        hint = j;
        return true;
      }
    }
    return false;
  };
  double best = 0.0;
  for (const auto& a : A)
    if (!within(a, best)) best = std::max(best, dist_to_poly(a, B));
  if (A.size() < 2) return best;
  std::vector<std::pair<double, double>> stack;
  for (std::size_t i = 0; i + 1 < A.size(); ++i) {
    const V3& a = A[i];
    const V3& b = A[i + 1];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    if (len == 0.0) continue;
    stack.assign(1, {0.0, 1.0});
    while (!stack.empty()) {
      const auto [s0, s1] = stack.back();
      stack.pop_back();
      const V3 p0 = lerp(a, b, s0), p1 = lerp(a, b, s1);
      // prune when one segment of B is within best of both ends (then of the whole piece)
      bool prune = false;
      for (std::size_t k = 0; k < nb && !prune; ++k) {
        const std::size_t j = (hint + k) % nb;
        if (std::max(seg_b(j, p0), seg_b(j, p1)) <= best + 1e-14) {
          prune = true;
          hint = j;
        }
      }
      if (prune) continue;
      const double sm = 0.5 * (s0 + s1);
      const V3 pm = lerp(a, b, sm);
      if (!within(pm, best)) best = std::max(best, dist_to_poly(pm, B));
      if ((s1 - s0) * len < 1e-14) continue;
      stack.push_back({s0, sm});
      stack.push_back({sm, s1});
    }
  }
  return best;
}

std::vector<V3> to_r3(const std::vector<SpherePoint>& pts) {
  std::vector<V3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.to_r3());
  return out;
}

}  // namespace

double hausdorff_distance(const std::vector<SpherePoint>& a, const std::vector<SpherePoint>& b) {
  if (a.empty() || b.empty()) throw Error("hausdorff_distance: empty polyline");
  const auto A = to_r3(a), B = to_r3(b);
  return std::max(directed(A, B), directed(B, A));
}

double hausdorff_distance(const Chord& a, const Chord& b) {
  return hausdorff_distance(a.polyline(), b.polyline());
}

// ---------------------------------------------------------------------------------------------
// Isotopy classes by crossing parity.

namespace {

std::vector<SpherePoint> fibonacci_sphere(int n) {
  std::vector<SpherePoint> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back(SpherePoint::from_r3({r * std::cos(golden * k), r * std::sin(golden * k), z}));
  }
  return out;
}

// Moebius rotation sending pole to infinity.
cd project(const SpherePoint& z, const SpherePoint& pole) {
  if (pole.is_infinity()) return z.value();
  const SpherePoint w = rotate(z, pole.value());
  return 1.0 / w.value();
}

bool inside(const std::vector<cd>& poly, cd p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const cd a = poly[i], b = poly[j];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      const double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < x) in = !in;
    }
  }
  return in;
}

// Sub-polylines of a chord: attractor 1 -> junction and junction -> attractor 2.
std::pair<std::vector<SpherePoint>, std::vector<SpherePoint>> halves(const Chord& c) {
  std::vector<SpherePoint> h1(c.ray1.polyline.begin(), c.ray1.polyline.end() - (c.ray1.landed ? 1 : 0));
  h1.push_back(c.junction);
  std::vector<SpherePoint> h2{c.junction};
  for (auto it = c.ray2.polyline.rbegin() + (c.ray2.landed ? 1 : 0); it != c.ray2.polyline.rend(); ++it)
    h2.push_back(*it);
  return {h1, h2};
}

std::vector<SpherePoint> join_reversed(const std::vector<SpherePoint>& a, const std::vector<SpherePoint>& b) {
  std::vector<SpherePoint> out = a;
  for (auto it = b.rbegin(); it != b.rend(); ++it) out.push_back(*it);
  return out;
}

}  // namespace

bool same_isotopy_class(const Chord& a, const Chord& b, const std::vector<SpherePoint>& marked,
                        double tol) {
  const SpherePoint a1 = a.ray1.polyline.front(), a2 = a.ray2.polyline.front();
  if (spherical_distance(a1, b.ray1.polyline.front()) > tol ||
      spherical_distance(a2, b.ray2.polyline.front()) > tol)
    throw Error("same_isotopy_class: chords join different attractors");

  const auto [ha1, ha2] = halves(a);
  const auto [hb1, hb2] = halves(b);
  std::vector<std::vector<SpherePoint>> cycles;
  if (spherical_distance(a.junction, b.junction) < tol) {
    cycles.push_back(join_reversed(ha1, hb1));
    cycles.push_back(join_reversed(ha2, hb2));
  } else {
    cycles.push_back(join_reversed(a.polyline(), b.polyline()));
  }

  std::vector<SpherePoint> pts;
  for (const auto& m : marked) {
    if (spherical_distance(m, a1) < tol || spherical_distance(m, a2) < tol) continue;
    pts.push_back(m);
  }
  if (pts.empty()) return true;

  std::vector<std::vector<V3>> cyc3;
  for (const auto& c : cycles) {
    auto v = to_r3(c);
    v.push_back(v.front());
    cyc3.push_back(std::move(v));
  }
  for (const auto& p : pts) {
    const V3 q = p.to_r3();
    for (const auto& c : cyc3)
      if (dist_to_poly(q, c) < tol)
        throw Error("same_isotopy_class: marked point " + to_string(p) + " lies on the curve");
  }

  // Project from the pole farthest from everything involved.
  SpherePoint pole;
  double best = -1.0;
  for (const auto& cand : fibonacci_sphere(512)) {
    const V3 c = cand.to_r3();
    double m = std::numeric_limits<double>::infinity();
    for (const auto& cy : cyc3) m = std::min(m, dist_to_poly(c, cy));
    for (const auto& p : pts) m = std::min(m, spherical_distance(cand, p));
    if (m > best) {
      best = m;
      pole = cand;
    }
  }
  std::vector<std::vector<cd>> planar;
  for (const auto& c : cycles) {
    std::vector<cd> v;
    for (const auto& z : c) v.push_back(project(z, pole));
    planar.push_back(std::move(v));
  }
  std::vector<bool> ref;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::vector<bool> par;
    const cd w = project(pts[k], pole);
    for (const auto& pl : planar) par.push_back(inside(pl, w));
    if (k == 0) ref = par;
    else if (par != ref) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------------------------

Chord lift_chord(const RationalMap& map, const Chord& chord, RayTracer& basin1, RayTracer& basin2,
                 const SpherePoint& target, double tol) {
  if (spherical_distance(map(target), chord.junction) >= tol)
    throw Error("lift_chord: target is not a preimage of the junction");
  auto lift = [&](RayTracer& tr, const Angle& t) {
    std::vector<Ray> hits;
    for (int j = 0; j < tr.degree(); ++j) {
      Ray r = tr.trace(angle_lift(t, j, tr.degree()));
      if (r.landed && spherical_distance(*r.landing_point, target) < tol) hits.push_back(std::move(r));
    }
    if (hits.size() != 1)
      throw Error("lift_chord: " + std::to_string(hits.size()) + " lifts of angle " + t.str() +
                  " land at " + to_string(target));
    if (angle_step(hits[0].angle, tr.degree()) != t) throw Error("lift_chord: angle identity failed");
    return hits[0];
  };
  Ray r1 = lift(basin1, chord.ray1.angle);
  Ray r2 = lift(basin2, chord.ray2.angle);
  Chord c;
  c.junction = nearest_preimage(map, chord.junction, target, 1.0);
  c.ray1 = std::move(r1);
  c.ray2 = std::move(r2);
  return c;
}

std::optional<std::pair<int, int>> near_return(const RationalMap& map, const SpherePoint& x,
                                               double threshold, int horizon) {
  const auto o = orbit(map, x, horizon);
  for (int m = 0; m < horizon; ++m)
    for (int n = m + 1; n <= horizon; ++n)
      if (spherical_distance(o[static_cast<std::size_t>(m)], o[static_cast<std::size_t>(n)]) < threshold)
        return std::make_pair(m, n - m);
  return std::nullopt;
}

namespace {

Chord push_forward(const RationalMap& map, const Chord& c, RayTracer& b1, RayTracer& b2, double tol) {
  Ray r1 = b1.trace(angle_step(c.ray1.angle, b1.degree()));
  Ray r2 = b2.trace(angle_step(c.ray2.angle, b2.degree()));
  return make_chord(map, std::move(r1), std::move(r2), tol, b1.degree());
}

}  // namespace

std::pair<Chord, PullbackReport> pullback_periodic(const RationalMap& map, const Chord& chord,
                                                   RayTracer& basin1, RayTracer& basin2, int Q,
                                                   int max_stages, double conv_tol,
                                                   double junction_tol) {
  PullbackReport rep;
  const int horizon = 200;
  int N = 0;
  if (Q <= 0) {
    const auto nr = near_return(map, chord.junction, 1e-4, horizon);
    if (!nr) throw Error("pullback_periodic: no near-return of the junction orbit within 200 iterates");
    N = nr->first;
    Q = nr->second;
  } else {
    const auto o = orbit(map, chord.junction, horizon + Q);
    N = -1;
    for (int m = 0; m <= horizon && N < 0; ++m)
      if (spherical_distance(o[static_cast<std::size_t>(m)], o[static_cast<std::size_t>(m + Q)]) < 1e-4) N = m;
    if (N < 0) throw Error("pullback_periodic: junction shows no near-return with period Q");
  }
  rep.pushed = N;
  rep.Q = Q;

  Chord prev = chord;
  for (int k = 0; k < N; ++k) prev = push_forward(map, prev, basin1, basin2, junction_tol);

  // References for the lift targets: the forward orbit of the junction at first, then the
  // intermediate junctions of the previous stage.
  std::vector<SpherePoint> refs;
  {
    const auto o = orbit(map, prev.junction, Q);
    for (int i = 1; i <= Q; ++i) refs.push_back(o[static_cast<std::size_t>(Q - i)]);
  }
  Chord cur = prev;
  for (int stage = 1; stage <= max_stages; ++stage) {
    std::vector<SpherePoint> inter;
    cur = prev;
    for (int i = 0; i < Q; ++i) {
      auto pre = map.preimages(cur.junction);
      const SpherePoint ref = refs[static_cast<std::size_t>(i)];
      std::stable_sort(pre.begin(), pre.end(), [&](const SpherePoint& x, const SpherePoint& y) {
        return spherical_distance(x, ref) < spherical_distance(y, ref);
      });
      bool ok = false;
      for (const auto& p : pre) {
        try {
          cur = lift_chord(map, cur, basin1, basin2, p, junction_tol);
          ok = true;
          break;
        } catch (const BranchAmbiguity&) {
          throw;
        } catch (const Error&) {
        }
      }
      if (!ok) throw Error("pullback_periodic: no admissible lift at stage " + std::to_string(stage));
      inter.push_back(cur.junction);
    }
    rep.d_h.push_back(hausdorff_distance(cur, prev));
    refs = inter;
    prev = cur;
    if (rep.d_h.back() < conv_tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw ConvergenceError("pullback_periodic: d_H did not fall below conv_tol within max_stages");

  if (auto y = refine_periodic(map, cur.junction, Q, 1e-10)) cur.junction = *y;
  SpherePoint img = cur.junction;
  for (int i = 0; i < Q; ++i) img = map(img);
  rep.junction_residual = spherical_distance(img, cur.junction);
  rep.junction = make_periodic_point(map, cur.junction, minimal_period(map, cur.junction, Q, 1e-8));
  return {cur, rep};
}

std::vector<Angle> periodic_angles(int d, int q) {
  const BigInt den = boost::multiprecision::pow(BigInt(d), static_cast<unsigned>(q)) - 1;
  std::vector<Angle> out;
  for (BigInt k = 0; k < den; ++k) out.emplace_back(k, den);
  return out;
}

std::vector<CatalogEntry> boundary_periodic_catalog(const RationalMap& map, RayTracer& basin1,
                                                    RayTracer& basin2, int bound,
                                                    double junction_tol) {
  std::vector<CatalogEntry> out;
  for (int q = 1; q <= bound; ++q) {
    const auto chords = detect_chords(basin1, basin2, periodic_angles(basin1.degree(), q),
                                      periodic_angles(basin2.degree(), q), junction_tol);
    for (const auto& c : chords) {
      auto y = refine_periodic(map, c.junction, q, 1e-10);
      if (!y || spherical_distance(*y, c.junction) > junction_tol) continue;
      CatalogEntry e;
      e.level = q;
      e.chord = c;
      e.chord.junction = *y;
      e.junction = make_periodic_point(map, *y, minimal_period(map, *y, q, 1e-8));
      out.push_back(std::move(e));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

nlohmann::json point_json(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  return nlohmann::json::array({p.value().real(), p.value().imag()});
}

nlohmann::json ray_json(const Ray& r) {
  nlohmann::json j;
  j["basin"] = r.basin;
  j["angle"] = r.angle.str();
  nlohmann::json pl = nlohmann::json::array();
  for (const auto& p : r.polyline) pl.push_back(point_json(p));
  j["polyline"] = pl;
  j["landed"] = r.landed;
  j["landing"] = r.landing_point ? point_json(*r.landing_point) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string rays_to_json(const std::vector<Ray>& rays) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rays) j.push_back(ray_json(r));
  return j.dump();
}

std::string chords_to_json(const std::vector<Chord>& chords) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : chords)
    j.push_back({{"ray1", ray_json(c.ray1)}, {"ray2", ray_json(c.ray2)}, {"junction", point_json(c.junction)}});
  return j.dump();
}

void write_catalog_csv(const std::vector<CatalogEntry>& cat, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("write_catalog_csv: cannot open " + path);
  f << "angle1,angle2,junction_re,junction_im,period,abs_multiplier\n";
  f.precision(17);
  for (const auto& e : cat) {
    const SpherePoint& p = e.junction.point;
    f << e.chord.ray1.angle.str() << ',' << e.chord.ray2.angle.str() << ',';
    if (p.is_infinity()) f << "inf,inf";
    else f << p.value().real() << ',' << p.value().imag();
    f << ',' << e.junction.period << ',' << std::abs(e.junction.multiplier) << '\n';
  }
}

}  // namespace ratdyn
