#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "ratdyn/chords.hpp"
#include "ratdyn/circle_family.hpp"
#include "ratdyn/expansion.hpp"
#include "ratdyn/roots.hpp"
#include "raster_oracle.hpp"
#include "test_util.hpp"

using namespace ratdyn;
using std::numbers::pi;

namespace {

RationalMap square() { return RationalMap({0.0, 0.0, 1.0}, {1.0}); }
RationalMap basilica() { return RationalMap({-1.0, 0.0, 1.0}, {1.0}); }
RationalMap basilica2() { return compose(basilica(), basilica()); }
RationalMap newton_cubic() { return RationalMap({1.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 3.0}); }

const cd omega = std::polar(1.0, 2.0 * pi / 3.0);
const double alpha = (1.0 - std::sqrt(5.0)) / 2.0;
const SpherePoint inf = SpherePoint::infinity();

cd e(double t) { return std::polar(1.0, 2.0 * pi * t); }

RayTracer tracer(const RationalMap& f, const SpherePoint& a, int d, int basin) {
  return RayTracer(f, build_chart(f, a, d), basin);
}

// Collects failed checks with a short description of each.
struct Verdict {
  std::vector<std::string> failures;
  std::ostringstream info;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

int order_mod(int two, int m) {
  if (m == 1) return 1;
  int k = 1;
  long long x = two % m;
  while (x != 1) {
    x = x * two % m;
    ++k;
  }
  return k;
}

int index_of(const std::vector<PeriodicPoint>& att, const SpherePoint& p) {
  for (std::size_t k = 0; k < att.size(); ++k)
    if (spherical_distance(att[k].point, p) < 1e-8) return static_cast<int>(k);
  throw Error("attractor not found: " + to_string(p));
}

// ---------------------------------------------------------------------------------------------

void criterion1(Verdict& v) {
  const auto f = square();
  auto t0 = tracer(f, 0.0, 2, 0);
  auto ti = tracer(f, inf, 2, 1);
  double worst = 0.0;
  for (int k = 0; k < 7; ++k) {
    const Ray r = t0.trace(Angle(k, 7));
    v.check(r.landed, "ray " + std::to_string(k) + "/7 did not land");
    if (r.landing_point) worst = std::max(worst, std::abs(r.landing_point->value() - e(k / 7.0)));
  }
  v.check(worst < 1e-9, "k/7 landing error " + std::to_string(worst));
  v.info << "k/7 landing err " << worst;

  // expected junctions: e(angle1) for angle1 in the periodic angles of levels 1, 2, 3
  const auto cat = boundary_periodic_catalog(f, t0, ti, 3, 1e-7);
  std::vector<std::pair<int, Angle>> expected;
  for (int q = 1; q <= 3; ++q)
    for (const auto& a : periodic_angles(2, q)) expected.emplace_back(q, a);
  v.check(cat.size() == expected.size() && cat.size() == 11, "catalog rows " + std::to_string(cat.size()));
  std::vector<char> used(expected.size(), 0);
  for (const auto& c : cat) {
    bool hit = false;
    for (std::size_t k = 0; k < expected.size() && !hit; ++k) {
      if (used[k] || expected[k].first != c.level || !(expected[k].second == c.chord.ray1.angle)) continue;
      if (!c.junction.point.is_infinity() && std::abs(c.junction.point.value() - e(expected[k].second.value())) < 1e-9 &&
          angle_negate(c.chord.ray1.angle) == c.chord.ray2.angle)
        used[k] = hit = true;
    }
    v.check(hit, "unexpected catalog junction " + to_string(c.junction.point) + " at " + c.chord.ray1.angle.str());
  }
  v.info << ", catalog " << cat.size() << " junctions";

  int checked = 0;
  for (int q = 1; q <= 63; q += 2)
    for (int p = 0; p < q; ++p) {
      const Angle a(p, q);
      const int m = static_cast<int>(a.den());
      const auto ev = angle_eventual_period(a, 2);
      ++checked;
      if (ev != std::make_pair(0, order_mod(2, m)))
        v.check(false, "eventual period of " + a.str());
    }
  v.info << ", " << checked << " odd-denominator angles vs multiplicative order";
}

void criterion2(Verdict& v) {
  const auto F = basilica2();
  const auto f = basilica();
  const auto att = find_attractors(F);
  const int i0 = index_of(att, 0.0), i1 = index_of(att, -1.0);
  const auto atlas = classify(F, att, Window{}, 512);
  const auto bs = boundary_intersection(F, atlas, i0, i1, 1e-8);
  double worst = 0.0;
  for (const auto& s : bs.points) worst = std::max(worst, spherical_distance(s.point, alpha));
  v.check(!bs.points.empty(), "no boundary samples");
  v.check(!bs.points.empty() && worst < 1e-6, "boundary sample off alpha by " + std::to_string(worst));
  v.info << bs.points.size() << " boundary samples, max dist to alpha " << worst;

  const SpherePoint seed = bs.points.empty() ? SpherePoint(alpha + 1e-3) : bs.points.front().point;
  const auto c1 = closing_refine(f, seed, 1);
  const auto c2 = closing_refine(F, seed, 1);
  const double m1 = std::abs(c1.refined.multiplier - (1.0 - std::sqrt(5.0)));
  const double m2 = std::abs(c2.refined.multiplier - std::pow(1.0 - std::sqrt(5.0), 2));
  v.check(std::abs(c1.refined.point.value() - alpha) < 1e-10 && c1.residual < 1e-10, "closing under f did not reach alpha");
  v.check(std::abs(c2.refined.point.value() - alpha) < 1e-10 && c2.residual < 1e-10, "closing under f^2 did not reach alpha");
  v.check(m1 < 1e-6, "multiplier under f off 1-sqrt5 by " + std::to_string(m1));
  v.check(m2 < 1e-6, "multiplier under f^2 off (1-sqrt5)^2 by " + std::to_string(m2));
  v.info << ", closing residual " << std::max(c1.residual, c2.residual) << ", multiplier f " << c1.refined.multiplier.real()
         << " f^2 " << c2.refined.multiplier.real();

  auto b0 = tracer(F, 0.0, 2, 0);
  auto b1 = tracer(F, -1.0, 2, 1);
  const auto chords = detect_chords(b0, b1, {Angle(0, 1)}, {Angle(0, 1)}, 1e-7);
  v.check(chords.size() == 1, "(0,0) chord not found");
  if (chords.size() == 1) {
    const auto [lim, rep] = pullback_periodic(F, chords.front(), b0, b1, 1);
    double gap = 1.0;
    for (std::size_t k = 0; k < rep.d_h.size() && k < 2; ++k) gap = std::min(gap, rep.d_h[k]);
    v.check(rep.converged && gap < 1e-8, "pullback stage gap " + std::to_string(gap));
    v.check(hausdorff_distance(lim, chords.front()) < 1e-8, "pullback moved the chord");
    v.info << ", pullback gap " << gap;
  }
}

void criterion3(Verdict& v) {
  const auto f = newton_cubic();
  double worst = 0.0;
  for (const cd a : {cd(1.0), omega, std::conj(omega)}) {
    auto t = tracer(f, a, 2, 0);
    const Ray r = t.trace(Angle(0, 1));
    v.check(r.landed && r.landing_point, "invariant ray did not land");
    if (r.landing_point) worst = std::max(worst, spherical_distance(*r.landing_point, inf));
  }
  v.check(worst < 1e-6, "invariant rays miss infinity by " + std::to_string(worst));
  v.info << "invariant rays to inf " << worst;

  const auto att = find_attractors(f);
  const auto atlas = classify(f, att, Window{}, 1024);
  BoundarySampleSet all;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const auto s = boundary_intersection(f, atlas, i, j, 1e-8);
      all.points.insert(all.points.end(), s.points.begin(), s.points.end());
    }
  ScreeningOptions so;
  so.exclude_critical = true;
  const auto rep = mane_check(f, all, 30, so);
  v.check(rep.certified_N && *rep.certified_N <= 20,
          "certified_N " + (rep.certified_N ? std::to_string(*rep.certified_N) : std::string("none")));
  v.info << ", " << all.points.size() << " samples (" << rep.excluded.size() << " excluded), certified_N "
         << (rep.certified_N ? std::to_string(*rep.certified_N) : "none");

  // channel seed: the boundary sample nearest infinity
  SpherePoint seed = all.points.front().point;
  for (const auto& s : all.points)
    if (spherical_distance(s.point, inf) < spherical_distance(seed, inf)) seed = s.point;
  const auto c = closing_refine(f, seed, 1);
  v.check(c.refined.point.is_infinity() || spherical_distance(c.refined.point, inf) < 1e-10,
          "closing from " + to_string(seed) + " reached " + to_string(c.refined.point));
  v.check(std::abs(c.refined.multiplier - 1.5) < 1e-6, "multiplier at infinity " + std::to_string(std::abs(c.refined.multiplier)));
  v.info << ", closing seed dist to inf " << spherical_distance(seed, inf) << " multiplier " << c.refined.multiplier.real();

  auto t1 = tracer(f, 1.0, 2, 0);
  auto tw = tracer(f, omega, 2, 1);
  const auto start = detect_chords(t1, tw, {Angle(1, 2)}, {Angle(1, 2)}, 1e-7);
  v.check(start.size() == 1 && !start.front().junction.is_infinity(), "starting chord missing");
  if (!start.empty()) {
    const auto [lim, pr] = pullback_periodic(f, start.front(), t1, tw, 0);
    const double gap = pr.d_h.empty() ? 1.0 : pr.d_h.back();
    v.check(pr.converged && gap < 1e-6, "pullback gap " + std::to_string(gap));
    v.check(spherical_distance(lim.junction, inf) < 1e-10, "pullback limit junction " + to_string(lim.junction));
    v.info << ", pullback gap " << gap;
  }
}

void criterion4(Verdict& v) {
  const auto f = square();
  auto t0 = tracer(f, 0.0, 2, 0);
  auto ti = tracer(f, inf, 2, 1);
  int configs = 0;
  for (int q = 2; q <= 20; ++q)
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const Angle s(p, q), u = angle_negate(s);
      if (s == u) continue;
      const Ray r1 = t0.trace(s), r2 = ti.trace(u);
      if (!r1.landing_point || !r2.landing_point || spherical_distance(*r1.landing_point, *r2.landing_point) > 1e-9) {
        v.check(false, "rays " + s.str() + ", " + u.str() + " do not share a landing point");
        continue;
      }
      ++configs;
      const auto ev = eventually_periodic_test(f, *r1.landing_point, 8, 20, 1e-6);
      const auto a1 = angle_eventual_period(s, 2), a2 = angle_eventual_period(u, 2);
      if (!ev || *ev != a1 || *ev != a2)
        v.check(false, "landing of " + s.str() + ": test " +
                           (ev ? std::to_string(ev->first) + "," + std::to_string(ev->second) : std::string("none")) +
                           " angles " + std::to_string(a1.first) + "," + std::to_string(a1.second));
    }
  v.info << configs << " multiply-landing configurations";
}

void criterion5(Verdict& v) {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto s = solve_rho(golden, 1e-6);
  const auto r = rotation_number(s.rho, 4000000, 0.0);
  v.check(std::abs(r.lifted - golden) < 1e-6, "round trip off by " + std::to_string(std::abs(r.lifted - golden)));
  v.info << "rotation number " << r.theta_hat << " (err " << std::abs(r.lifted - golden) << ")";

  const auto F = make_f_theta(s.rho);
  const double d1 = std::abs(F.natural_jet(cd(1.0)).derivative);
  v.check(d1 < 1e-10, "|F'(1)| = " + std::to_string(d1));
  const Poly w = F.wronskian();
  const Poly sq{1.0, -2.0, 1.0};
  const auto [quot, rem] = poly::divmod(w, sq);
  const double scale = poly::max_abs(w);
  v.check(poly::max_abs(rem) < 1e-12 * scale, "(z-1)^2 does not divide the Wronskian");
  v.check(std::abs(poly::eval(quot, 1.0)) > 1e-6 * scale, "(z-1)^3 divides the Wronskian");
  v.info << ", |F'(1)| " << d1;

  const auto rep = verify_no_circle_periodics(s.rho, 8, 1e-6);
  v.check(rep.findings.empty(), std::to_string(rep.findings.size()) + " periodic points on the circle");
  v.check(rep.complete, "periodic point sets incomplete");
  const auto one = verify_no_circle_periodics(1.0, 1, 1e-6);
  bool found = false;
  for (const auto& p : one.findings) found = found || spherical_distance(p.point, 1.0) < 1e-9;
  v.check(found, "rho = 1 does not find z = 1");
  v.info << ", circle periodics up to 8: " << rep.findings.size();
}

void criterion6(Verdict& v) {
  std::mt19937_64 rng(2024);
  // lift round trips
  int lifts = 0;
  {
    const auto f = square();
    auto t0 = tracer(f, 0.0, 2, 0);
    auto ti = tracer(f, inf, 2, 1);
    std::uniform_int_distribution<int> qd(2, 64);
    while (lifts < 100) {
      const int q = qd(rng);
      const Angle s(std::uniform_int_distribution<int>(0, q - 1)(rng), q);
      const Chord c = make_chord(f, t0.trace(s), ti.trace(angle_negate(s)), 1e-7);
      const auto pre = f.preimages(c.junction);
      const auto& p = pre[std::uniform_int_distribution<std::size_t>(0, pre.size() - 1)(rng)];
      const Chord l = lift_chord(f, c, t0, ti, p, 1e-7);
      v.check(angle_step(l.ray1.angle, 2) == c.ray1.angle && angle_step(l.ray2.angle, 2) == c.ray2.angle,
              "z^2 lift of " + s.str() + " breaks the angle identity");
      v.check(spherical_distance(f(l.junction), c.junction) < 1e-10, "z^2 lift junction does not map back");
      ++lifts;
    }
  }
  std::vector<Chord> newton_pool;
  {
    const auto f = newton_cubic();
    auto t1 = tracer(f, 1.0, 2, 0);
    auto tw = tracer(f, omega, 2, 1);
    newton_pool.push_back(make_chord(f, t1.trace(Angle(0, 1)), tw.trace(Angle(0, 1)), 1e-7));
    newton_pool.push_back(make_chord(f, t1.trace(Angle(1, 2)), tw.trace(Angle(1, 2)), 1e-7));
    int done = 0, attempts = 0;
    while (done < 100 && attempts < 2000) {
      ++attempts;
      const Chord c = newton_pool[std::uniform_int_distribution<std::size_t>(0, newton_pool.size() - 1)(rng)];
      const auto pre = f.preimages(c.junction);
      const auto& p = pre[std::uniform_int_distribution<std::size_t>(0, pre.size() - 1)(rng)];
      Chord l;
      try {
        l = lift_chord(f, c, t1, tw, p, 1e-7);
      } catch (const Error&) {
        continue;  // p is not on both boundaries
      }
      v.check(angle_step(l.ray1.angle, t1.degree()) == c.ray1.angle && angle_step(l.ray2.angle, tw.degree()) == c.ray2.angle,
              "newton lift breaks the angle identity");
      v.check(spherical_distance(f(l.junction), c.junction) < 1e-10, "newton lift junction does not map back");
      if (newton_pool.size() < 40 && l.ray1.angle.den() <= 64) newton_pool.push_back(l);
      ++done;
    }
    v.check(done == 100, "only " + std::to_string(done) + " newton lifts");
    lifts += done;
  }
  v.info << lifts << " lift round trips";

  // isotopy vs raster
  {
    const auto f = square();
    auto t0 = tracer(f, 0.0, 2, 0);
    auto ti = tracer(f, inf, 2, 1);
    std::vector<std::vector<Chord>> families(2);
    for (const Angle& s : {Angle(0, 1), Angle(1, 3), Angle(1, 7), Angle(2, 7), Angle(3, 7)})
      families[0].push_back(make_chord(f, t0.trace(s), ti.trace(angle_negate(s)), 1e-7));
    families[1] = {newton_pool[0], newton_pool[1]};
    std::vector<std::pair<int, std::pair<int, int>>> pairs;
    for (int fam = 0; fam < 2; ++fam)
      for (int i = 0; i < static_cast<int>(families[fam].size()); ++i)
        for (int j = i + 1; j < static_cast<int>(families[fam].size()); ++j) pairs.push_back({fam, {i, j}});
    std::vector<std::vector<SpherePoint>> curves;
    std::vector<testing::SphereRaster> rasters;
    for (const auto& [fam, ij] : pairs) {
      curves.push_back(testing::closed_curve(families[fam][ij.first], families[fam][ij.second]));
      rasters.emplace_back(std::vector<std::vector<SpherePoint>>{curves.back()}, 0.012);
    }
    std::normal_distribution<double> g(0.0, 1.0);
    int compared = 0, separated = 0;
    for (std::size_t k = 0; compared < 50; ++k) {
      const auto& [fam, ij] = pairs[k % pairs.size()];
      const Chord& a = families[fam][ij.first];
      const Chord& b = families[fam][ij.second];
      const auto& curve = curves[k % pairs.size()];
      const auto& raster = rasters[k % pairs.size()];
      std::vector<SpherePoint> marked;
      while (marked.size() < 3) {
        const SpherePoint p = SpherePoint::from_r3({g(rng), g(rng), g(rng)});
        if (testing::distance_to_curve(p, curve) > 0.05) marked.push_back(p);
      }
      const bool expect = raster.same_component(marked);
      v.check(same_isotopy_class(a, b, marked, 1e-6) == expect, "isotopy disagrees with raster");
      ++compared;
      separated += !expect;
    }
    v.info << ", " << compared << " isotopy configs (" << separated << " separated)";
  }

  // hausdorff triples over the z^2 and newton chords
  {
    const auto f = square();
    auto t0 = tracer(f, 0.0, 2, 0);
    auto ti = tracer(f, inf, 2, 1);
    std::vector<Chord> pool = newton_pool;
    std::vector<Chord> zpool;
    for (int k = 0; k < 24; ++k) {
      const int q = std::uniform_int_distribution<int>(2, 40)(rng);
      const Angle s(std::uniform_int_distribution<int>(0, q - 1)(rng), q);
      zpool.push_back(make_chord(f, t0.trace(s), ti.trace(angle_negate(s)), 1e-7));
    }
    double worst = -1.0;
    for (int t = 0; t < 100; ++t) {
      const auto& P = (t % 2) ? zpool : pool;
      std::uniform_int_distribution<std::size_t> pick(0, P.size() - 1);
      const Chord &A = P[pick(rng)], &B = P[pick(rng)], &C = P[pick(rng)];
      const double ab = hausdorff_distance(A, B), ba = hausdorff_distance(B, A);
      v.check(ab == ba, "hausdorff not symmetric");
      v.check(hausdorff_distance(A, A) == 0.0, "hausdorff d(A, A) != 0");
      const double slack = ab - hausdorff_distance(A, C) - hausdorff_distance(C, B);
      worst = std::max(worst, slack);
      v.check(slack <= 1e-12, "triangle inequality violated by " + std::to_string(slack));
    }
    v.info << ", 100 hausdorff triples (max triangle slack " << worst << ")";
  }
}

void criterion7(Verdict& v) {
  std::mt19937_64 rng(99);
  double fd_worst = 0.0, chain_worst = 0.0;
  int fd_count = 0;
  for (int t = 0; t < 20; ++t) {
    const RationalMap f = testing::random_map(rng, 2 + t % 4);
    const RationalMap g = testing::random_map(rng, 2 + (t + 1) % 3);
    const RationalMap fg = compose(f, g);
    const auto crit = critical_points(f);
    for (int k = 0; k < 5; ++k) {
      const SpherePoint z = testing::random_point(rng, 2.0);
      const double a = spherical_derivative(fg, z), b = spherical_derivative(f, g(z)) * spherical_derivative(g, z);
      chain_worst = std::max(chain_worst, std::abs(a - b) / std::max(b, 1e-300));
      double dc = 1e9;
      for (const auto& c : crit) dc = std::min(dc, spherical_distance(z, c));
      if (dc < 1e-2 || z.is_infinity()) continue;
      const SpherePoint zh(z.value() + 1e-6);
      const double fd = spherical_distance(f(zh), f(z)) / spherical_distance(zh, z);
      const double d = spherical_derivative(f, z);
      fd_worst = std::max(fd_worst, std::abs(fd - d) / d);
      ++fd_count;
    }
  }
  v.check(chain_worst < 1e-9, "chain rule relative error " + std::to_string(chain_worst));
  v.check(fd_worst < 1e-5, "finite-difference relative error " + std::to_string(fd_worst));
  v.info << "chain rule err " << chain_worst << ", fd err " << fd_worst << " (" << fd_count << " points)";

  // z^2 - 1, z^2 - z - 1, z^3 - 1, z^n - 1 and products of distinct linear factors up to degree 16
  std::vector<Poly> polys{{-1.0, 0.0, 1.0}, {-1.0, -1.0, 1.0}, {-1.0, 0.0, 0.0, 1.0}};
  for (int n = 4; n <= 16; ++n) {
    Poly p(static_cast<std::size_t>(n + 1), 0.0);
    p[0] = -1.0;
    p[static_cast<std::size_t>(n)] = 1.0;
    polys.push_back(p);
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 2; n <= 16; n += 2) {
    Poly p{1.0};
    for (int k = 0; k < n; ++k) p = poly::mul(p, Poly{-cd(u(rng), u(rng)), 1.0});
    polys.push_back(p);
  }
  double res_worst = 0.0;
  for (const auto& p : polys) {
    const auto r = find_roots(p);
    for (const cd z : r.roots) res_worst = std::max(res_worst, std::abs(poly::eval(p, z)));
    v.check(static_cast<int>(r.roots.size()) == poly::degree(p), "root count");
  }
  v.check(res_worst < 1e-10, "root residual " + std::to_string(res_worst));
  v.info << ", root residual " << res_worst << " over " << polys.size() << " polynomials";

  for (const auto& [name, f] : std::vector<std::pair<std::string, RationalMap>>{
           {"z2", square()}, {"basilica2", basilica2()}, {"newton-cubic", newton_cubic()},
           {"ftheta", make_f_theta(e(0.3))}}) {
    const auto n = critical_points(f).size();
    v.check(static_cast<int>(n) == 2 * f.degree() - 2, name + " has " + std::to_string(n) + " critical points");
  }
  v.info << ", critical counts 2D-2 on all builtins";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::function<void(Verdict&)>, double>> criteria = {
      {criterion1, 10.0}, {criterion2, 60.0}, {criterion3, 300.0}, {criterion4, 10.0},
      {criterion5, 120.0}, {criterion6, 60.0}, {criterion7, 10.0}};
  std::vector<int> which;
  for (int k = 1; k < argc; ++k) which.push_back(std::atoi(argv[k]));
  if (which.empty())
    for (int k = 1; k <= 7; ++k) which.push_back(k);

  bool all = true;
  for (const int c : which) {
    if (c < 1 || c > 7) {
      std::cerr << "no criterion " << c << '\n';
      return 1;
    }
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[static_cast<std::size_t>(c - 1)].first(v);
    } catch (const std::exception& e) {
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = criteria[static_cast<std::size_t>(c - 1)].second;
    if (secs >= limit) v.failures.push_back("runtime " + std::to_string(secs) + " s over " + std::to_string(limit) + " s");
    const bool ok = v.failures.empty();
    all = all && ok;
    std::printf("criterion %d: %s  %.1f s  %s\n", c, ok ? "PASS" : "FAIL", secs, v.info.str().c_str());
    for (std::size_t k = 0; k < v.failures.size() && k < 10; ++k) std::printf("    %s\n", v.failures[k].c_str());
    if (v.failures.size() > 10) std::printf("    ... %zu more\n", v.failures.size() - 10);
  }
  return all ? 0 : 1;
}
