#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ratdyn/circle_family.hpp"
#include "test_util.hpp"

using namespace ratdyn;
using std::numbers::pi;

namespace {

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
const double silver = std::sqrt(2.0) - 1.0;

cd e(double t) { return std::polar(1.0, 2.0 * pi * t); }

const RhoSolution& golden_solution() {
  static const RhoSolution s = solve_rho(golden, 1e-6);
  return s;
}

// Rotation number by iterating F itself in complex arithmetic. The displacement per step lies
// within 0.11 turns of arg(rho)/2pi, which fixes the branch of arg(F(z)/z).
double oracle_rotation(cd rho, int n) {
  const RationalMap f = make_f_theta(rho);
  double off = std::arg(rho) / (2.0 * pi);
  if (off < 0) off += 1.0;
  cd z = 1.0;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const cd w = f(z).value();
    double d = std::arg(w / z) / (2.0 * pi);
    d += std::round(off - d);
    total += d;
    z = w / std::abs(w);
  }
  return total / n;
}

}  // namespace

TEST_CASE("make_f_theta examples") {
  const RationalMap one = make_f_theta(1.0);
  CHECK(std::abs(one(cd(1.0)).value() - 1.0) < 1e-15);
  CHECK_THROWS_AS(make_f_theta(cd(1.0, 1e-5)), Error);
  CHECK_THROWS_AS(make_f_theta(0.5), Error);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const cd rho = e(u(rng));
    const RationalMap f = make_f_theta(rho);
    CHECK(f.degree() == 3);
    CHECK(std::abs(f(cd(0.0)).value()) == 0.0);
    CHECK(f(SpherePoint::infinity()).is_infinity());
    // local degree 2 at both: derivative vanishes in the natural charts
    CHECK(std::abs(f.natural_jet(cd(0.0)).derivative) < 1e-14);
    CHECK(std::abs(f.natural_jet(SpherePoint::infinity()).derivative) < 1e-14);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) worst = std::max(worst, std::abs(std::abs(f(e(u(rng))).value()) - 1.0));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("circle invariance on 10^4 samples") {
  const CircleMapLift lift(e(golden));
  const auto [lift_err, mod_err] = check_lift(lift, 10000);
  CHECK(mod_err < 1e-12);
  CHECK(lift_err < 1e-12);
}

TEST_CASE("lift has degree one and matches the map") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const cd rho = e(u(rng));
    const CircleMapLift lift(rho);
    const RationalMap f = make_f_theta(rho);
    for (int k = 0; k < 50; ++k) {
      const double s = 4.0 * u(rng) - 2.0;
      CHECK(std::abs(lift(s + 1.0) - lift(s) - 1.0) < 1e-12);
      CHECK(std::abs(e(lift(s)) - f(e(s)).value()) < 1e-12);
      // monotone: derivative 1 - (4 - ...) >= 0, sampled
      CHECK(lift(s + 1e-4) >= lift(s));
    }
  }
  // s = 0 is critical for the lift
  const CircleMapLift l(1.0);
  CHECK(std::abs(l(1e-5) - l(0.0)) < 1e-9);
}

TEST_CASE("rotation_number examples") {
  CHECK(rotation_number(1.0, 10000).theta_hat < 1e-15);
  CHECK(std::abs(rotation_number(1.0, 10000).lifted) < 1e-15);
  const auto half = rotation_number(-1.0, 10000);
  CHECK(std::abs(half.theta_hat - 0.5) < 2e-3);
  CHECK(std::abs(half.theta_hat - oracle_rotation(-1.0, 10000)) < 2e-3);
  CHECK_THROWS_AS(rotation_number(1.0, 10), Error);
  CHECK_THROWS_AS(rotation_number(2.0, 10000), Error);
}

TEST_CASE("rotation_number against the complex-arithmetic oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const cd rho = e(u(rng));
    const auto r = rotation_number(rho, 20000);
    // both are within 1/n of the true value
    CHECK(std::abs(r.lifted - oracle_rotation(rho, 20000)) < 2.0 / 20000);
  }
}

TEST_CASE("rotation number is monotone in arg rho") {
  double prev = -1.0;
  for (int k = 0; k < 32; ++k) {
    const auto r = rotation_number(e(k / 32.0), 100000);
    CHECK(r.lifted >= prev - 2.0 / 100000);
    prev = r.lifted;
  }
}

TEST_CASE("lift_lock") {
  const auto z = lift_lock(1.0);
  REQUIRE(z);
  CHECK(*z == std::make_pair(0LL, 1));
  const auto h = lift_lock(-1.0);
  REQUIRE(h);
  CHECK(*h == std::make_pair(1LL, 2));
}

TEST_CASE("solve_rho round trips for irrational targets") {
  for (const double theta : {golden, silver}) {
    const RhoSolution s = theta == golden ? golden_solution() : solve_rho(theta, 1e-6);
    CHECK(std::abs(std::abs(s.rho) - 1.0) < 1e-14);
    CHECK(s.arc_lo <= s.arc_hi);
    const auto r = rotation_number(s.rho, 2000000);
    CHECK(std::abs(r.lifted - theta) < 1e-6);
    CHECK(std::abs(oracle_rotation(s.rho, 2000000) - theta) < 1e-6);
  }
}

TEST_CASE("solve_rho at rational targets reports plateaus") {
  const RhoSolution z = solve_rho(0.0, 1e-6);
  CHECK(z.plateau);
  CHECK(z.lock_q == 1);
  CHECK(std::abs(z.rho - 1.0) < 1e-12);

  const RhoSolution h = solve_rho(0.5, 1e-6);
  CHECK(h.plateau);
  CHECK(h.lock_q == 2);
  CHECK(h.arc_hi - h.arc_lo > 1e-3);
  CHECK(std::abs(rotation_number(h.rho, 100000).lifted - 0.5) < 1e-4);
  // just left of the reported edge the orbit is no longer locked at 1/2
  double a = std::arg(h.rho) / (2.0 * pi);
  if (a < 0) a += 1.0;
  CHECK(a >= h.arc_lo);
  const auto left = lift_lock(e(a - 1e-6));
  CHECK((!left || *left != std::make_pair(1LL, 2)));

  CHECK_THROWS_AS(solve_rho(1.0, 1e-6), Error);
  CHECK_THROWS_AS(solve_rho(0.3, 1e-9), Error);
}

TEST_CASE("critical structure of F") {
  const cd rho = e(0.2345);
  const RationalMap f = make_f_theta(rho);
  CHECK(std::abs(f.natural_jet(cd(1.0)).derivative) < 1e-10);

  // P'Q - PQ' = -6 rho z (z - 1)^2 by hand; the stored map has a monic denominator so compare
  // up to a constant
  const Poly w = f.wronskian();
  const Poly want = {0.0, 1.0, -2.0, 1.0};
  REQUIRE(w.size() == want.size());
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(std::abs(w[k] / w[1] - want[k]) < 1e-12);
  const Poly sq = {1.0, -2.0, 1.0};
  const auto [q, r] = poly::divmod(w, sq);
  CHECK(poly::max_abs(r) < 1e-12);
  CHECK(std::abs(poly::eval(q, 1.0)) > 1e-3 * std::abs(w[1]));  // exactly two factors of (z - 1)

  int at0 = 0, atinf = 0, at1 = 0;
  for (const auto& c : critical_points(f)) {
    if (c.is_infinity()) ++atinf;
    else if (std::abs(c.value()) < 1e-6) ++at0;
    else if (std::abs(c.value() - 1.0) < 1e-6) ++at1;
  }
  CHECK(at0 == 1);
  CHECK(atinf == 1);
  CHECK(at1 == 2);
}

TEST_CASE("postcritical set of F is infinite") {
  const RhoSolution& s = golden_solution();
  const auto pc = postcritical(make_f_theta(s.rho), 60, 0);
  CHECK_FALSE(pc.finite_flag);
}

TEST_CASE("verify_no_circle_periodics") {
  const auto one = verify_no_circle_periodics(1.0, 1, 1e-6);
  bool found1 = false;
  for (const auto& p : one.findings) found1 = found1 || spherical_distance(p.point, cd(1.0)) < 1e-6;
  CHECK(found1);

  const RhoSolution& s = golden_solution();
  const auto fixed = periodic_points(make_f_theta(s.rho), 1);
  bool has0 = false, hasinf = false;
  for (const auto& p : fixed.points) {
    if (spherical_distance(p.point, SpherePoint::infinity()) < 1e-12) hasinf = true;
    if (spherical_distance(p.point, cd(0.0)) < 1e-12) has0 = true;
  }
  CHECK(has0);
  CHECK(hasinf);
  CHECK(fixed.points.size() <= 4);

  // findings at a smaller tol are a subset of those at a larger one, so an empty report at 1e-5
  // settles 1e-6 and 1e-7 as well
  const auto rep = verify_no_circle_periodics(s.rho, 8, 1e-5);
  CHECK(rep.findings.empty());
  CHECK(rep.complete);
  CHECK(rep.counts.size() == 8);
  CHECK(verify_no_circle_periodics(s.rho, 3, 1e-7).findings.empty());
}

TEST_CASE("ftheta json") {
  const RhoSolution& s = golden_solution();
  const auto rep = verify_no_circle_periodics(s.rho, 2, 1e-6);
  const std::string j = ftheta_to_json(s, rep);
  CHECK(j.find("\"periodic_findings\":[]") != std::string::npos);
  CHECK(j.find("\"theta_hat\"") != std::string::npos);
  CHECK(j.find("\"rho\"") != std::string::npos);
}
