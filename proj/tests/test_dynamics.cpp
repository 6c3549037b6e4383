#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ratdyn/dynamics.hpp"
#include "test_util.hpp"

using namespace ratdyn;
using std::numbers::pi;

namespace {

RationalMap power(int d) {
  Poly p(static_cast<std::size_t>(d) + 1, 0.0);
  p.back() = 1.0;
  return RationalMap(p, {1.0});
}
RationalMap basilica() { return RationalMap({-1.0, 0.0, 1.0}, {1.0}); }
RationalMap newton_cubic() { return RationalMap({1.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 3.0}); }

const PeriodicPoint* find(const PeriodicPointSet& s, const SpherePoint& z, double tol = 1e-9) {
  for (const auto& p : s.points)
    if (spherical_distance(p.point, z) < tol) return &p;
  return nullptr;
}

}  // namespace

TEST_CASE("orbit examples") {
  auto o = orbit(power(2), 2.0, 3);
  REQUIRE(o.size() == 4);
  CHECK(o[3] == SpherePoint(256.0));
  auto b = orbit(basilica(), 0.0, 4);
  CHECK(b[1] == SpherePoint(-1.0));
  CHECK(b[4] == SpherePoint(0.0));
  CHECK(orbit(newton_cubic(), 0.3, 0).size() == 1);
}

TEST_CASE("periodic points of z^2, n = 1") {
  auto s = periodic_points(power(2), 1);
  REQUIRE(s.points.size() == 3);
  CHECK(s.complete);
  const auto* zero = find(s, 0.0);
  const auto* inf = find(s, SpherePoint::infinity());
  const auto* one = find(s, 1.0);
  REQUIRE(zero);
  REQUIRE(inf);
  REQUIRE(one);
  CHECK(zero->cls == CycleClass::Superattracting);
  CHECK(inf->cls == CycleClass::Superattracting);
  CHECK(one->cls == CycleClass::Repelling);
  CHECK(std::abs(one->multiplier - 2.0) < 1e-12);
  CHECK(s.points.back().point.is_infinity());
}

TEST_CASE("periodic points of z^2 - 1, n = 1") {
  auto s = periodic_points(basilica(), 1);
  REQUIRE(s.points.size() == 3);  // two finite plus infinity
  for (const double sg : {1.0, -1.0}) {
    const double a = (1.0 + sg * std::sqrt(5.0)) / 2.0;
    const auto* p = find(s, a);
    REQUIRE(p);
    CHECK(std::abs(p->multiplier - 2.0 * a) < 1e-12);
  }
}

TEST_CASE("periodic points of the cubic Newton map") {
  auto s = periodic_points(newton_cubic(), 1);
  REQUIRE(s.points.size() == 4);
  for (int k = 0; k < 3; ++k) {
    const auto* p = find(s, std::polar(1.0, 2.0 * pi * k / 3.0));
    REQUIRE(p);
    CHECK(std::abs(p->multiplier) < 1e-12);
    CHECK(p->cls == CycleClass::Superattracting);
  }
  const auto* inf = find(s, SpherePoint::infinity());
  REQUIRE(inf);
  CHECK(std::abs(inf->multiplier - 1.5) < 1e-12);
}

TEST_CASE("periodic points of z^d lie at angles k/(d^n - 1)") {
  for (const auto [d, n] : {std::pair{2, 1}, {2, 3}, {2, 5}, {3, 2}, {2, 8}, {3, 4}}) {
    auto s = periodic_points(power(d), n);
    const int m = static_cast<int>(std::lround(std::pow(d, n))) - 1;
    CHECK(s.points.size() == static_cast<std::size_t>(m + 2));
    CHECK(s.max_residual < 1e-10);
    REQUIRE(find(s, 0.0));
    REQUIRE(find(s, SpherePoint::infinity()));
    std::vector<bool> hit(static_cast<std::size_t>(m), false);
    for (const auto& p : s.points) {
      if (p.point.is_infinity() || spherical_distance(p.point, 0.0) < 1e-9) continue;
      const cd z = p.point.value();
      CHECK(std::abs(std::abs(z) - 1.0) < 1e-9);
      double t = std::arg(z) / (2.0 * pi);
      if (t < 0) t += 1.0;
      const double k = t * m;
      const long kr = std::lround(k) % m;
      CHECK(std::abs(k - std::round(k)) / m < 1e-9);
      hit[static_cast<std::size_t>(kr)] = true;
      // Minimal period divides n; the doubling orbit of k/m confirms it.
      long j = kr;
      int per = 0;
      do {
        j = (j * d) % m;
        ++per;
      } while (j != kr);
      CHECK(p.period == per);
    }
    CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
  }
}

TEST_CASE("periodic points of random maps: residual, count and multiplier consistency") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 6; ++t) {
    const RationalMap f = testing::random_map(rng, 2 + t % 2);
    const int n = 1 + t % 3;
    auto s = periodic_points(f, n);
    CHECK(s.max_residual < 1e-10);
    // Generic maps: D^n + 1 distinct fixed points of f^n.
    CHECK(s.points.size() ==
          static_cast<std::size_t>(std::lround(std::pow(f.degree(), n))) + 1);
    for (const auto& p : s.points) {
      // Single step multipliers along the orbit against the derivative of f^period in one chart.
      const Chart c = p.point.natural_chart();
      const OrbitJet oj = orbit_jet(f, p.point, p.period, &c, &c);
      if (!oj.finite) continue;
      CHECK(std::abs(oj.derivative - p.multiplier) <= 1e-9 * std::max(1.0, std::abs(p.multiplier)));
    }
  }
}

TEST_CASE("periodic points reject bad n") {
  CHECK_THROWS_AS(periodic_points(power(2), 0), Error);
  CHECK_THROWS_AS(periodic_points(power(2), 9), Error);
  CHECK_THROWS_AS(periodic_points(power(5), 8), Error);
}

TEST_CASE("multiplier examples") {
  CHECK(std::abs(multiplier(power(2), {1.0}) - 2.0) < 1e-15);
  CHECK(std::abs(multiplier(basilica(), {0.0, -1.0})) < 1e-15);
  const double a = (1.0 - std::sqrt(5.0)) / 2.0;
  CHECK(std::abs(multiplier(basilica(), {a}) - (1.0 - std::sqrt(5.0))) < 1e-14);
  CHECK_THROWS_AS(multiplier(power(2), {2.0}), Error);
}

TEST_CASE("classification") {
  CHECK(classify_multiplier(0.0) == CycleClass::Superattracting);
  CHECK(classify_multiplier(0.5) == CycleClass::Attracting);
  CHECK(classify_multiplier(std::polar(1.0 + 1e-7, 0.3)) == CycleClass::ParabolicSuspect);
  CHECK(classify_multiplier(1.01) == CycleClass::Repelling);
}

TEST_CASE("postcritical examples") {
  auto b = postcritical(basilica(), 20, 0);
  CHECK(b.finite_flag);
  auto pts = b.points();
  CHECK(pts.size() == 3);
  for (const SpherePoint e : {SpherePoint(-1.0), SpherePoint(0.0), SpherePoint::infinity()})
    CHECK(std::any_of(pts.begin(), pts.end(), [&](const SpherePoint& p) { return p == e; }));

  auto s = postcritical(power(2), 10, 2);
  CHECK(s.finite_flag);
  CHECK(s.points().size() == 2);
  // f^{-m}({0, inf}) = {0, inf}.
  CHECK(s.backward.size() == 3);
  CHECK(s.backward[2].size() == 2);
}

TEST_CASE("postcritical forward sets are forward invariant up to depth") {
  std::mt19937_64 rng(29);
  for (const RationalMap& f : {basilica(), newton_cubic(), testing::random_map(rng, 2)}) {
    const int depth = 12;
    auto s = postcritical(f, depth, 1);
    const auto pts = s.points();
    for (const auto& co : s.forward) {
      for (std::size_t k = 0; k + 1 < co.orbit.size(); ++k) {
        const SpherePoint img = f(co.orbit[k]);
        CHECK(std::any_of(pts.begin(), pts.end(),
                          [&](const SpherePoint& p) { return spherical_distance(p, img) < 1e-10; }));
      }
      if (!co.cycles) CHECK(co.orbit.size() == static_cast<std::size_t>(depth));
    }
    for (const auto& p : s.backward[1])
      CHECK(std::any_of(pts.begin(), pts.end(),
                        [&](const SpherePoint& q) { return spherical_distance(f(p), q) < 1e-8; }));
  }
}

TEST_CASE("eventually periodic examples") {
  auto a = eventually_periodic_test(power(2), -1.0, 5, 5, 1e-9);
  REQUIRE(a);
  CHECK(*a == std::pair{1, 1});
  auto b = eventually_periodic_test(basilica(), (1.0 - std::sqrt(5.0)) / 2.0, 5, 5, 1e-9);
  REQUIRE(b);
  CHECK(*b == std::pair{0, 1});
  auto c = eventually_periodic_test(power(2), std::polar(1.0, 2.0 * pi / 5.0), 5, 6, 1e-9);
  REQUIRE(c);
  CHECK(*c == std::pair{0, 4});
  CHECK_FALSE(eventually_periodic_test(power(2), std::polar(1.0, 2.0), 5, 6, 1e-9));
}

TEST_CASE("seed-grid fallback flags incompleteness") {
  PeriodicOptions o;
  o.implicit_limit = 4;
  const RationalMap f({cd(-0.1, 0.6), 0.0, 1.0}, {1.0});
  auto s = periodic_points(f, 4, o);
  CHECK_FALSE(s.complete);
  CHECK(s.max_residual < 1e-10);
  auto full = periodic_points(f, 4);
  CHECK(full.complete);
  CHECK(full.points.size() == 17);
  CHECK(s.points.size() <= full.points.size());
  for (const auto& p : s.points) CHECK(find(full, p.point));
}
