#include "ratdyn/circle_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <nlohmann/json.hpp>

namespace ratdyn {

using std::numbers::pi;

RationalMap make_f_theta(cd rho) {
  if (std::abs(std::abs(rho) - 1.0) > 1e-12) throw Error("make_f_theta: |rho| must be 1");
  // rho z^2 (z - 3) = -3 rho z^2 + rho z^3
  return RationalMap({0.0, 0.0, -3.0 * rho, rho}, {1.0, -3.0});
}

CircleMapLift::CircleMapLift(cd r) : rho(r) {
  if (std::abs(std::abs(rho) - 1.0) > 1e-12) throw Error("CircleMapLift: |rho| must be 1");
  offset = std::arg(rho) / (2.0 * pi);
  if (offset < 0.0) offset += 1.0;
  if (offset >= 1.0) offset -= 1.0;
}

double CircleMapLift::operator()(double s) const {
  const double t = 2.0 * pi * s;
  // arg(3 - e(s)); 3 - e(s) stays in the right half plane
  return s + offset + std::atan2(-std::sin(t), 3.0 - std::cos(t)) / pi;
}

std::pair<double, double> check_lift(const CircleMapLift& lift, int samples) {
  const RationalMap f = make_f_theta(lift.rho);
  double lift_err = 0.0, mod_err = 0.0;
  double prev = lift(0.0);
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / samples;
    const SpherePoint w = f(std::polar(1.0, 2.0 * pi * s));
    if (w.is_infinity()) throw Error("check_lift: F is infinite on the circle");
    const double l = lift(s);
    if (k > 0 && std::abs(l - prev) > 0.5) throw Error("check_lift: lift jumps at s = " + std::to_string(s));
    prev = l;
    lift_err = std::max(lift_err, std::abs(std::polar(1.0, 2.0 * pi * l) - w.value()));
    mod_err = std::max(mod_err, std::abs(std::abs(w.value()) - 1.0));
  }
  if (std::abs(lift(1.0) - lift(0.0) - 1.0) > 1e-12) throw Error("check_lift: lift is not of degree 1");
  if (lift_err > 1e-9) throw Error("check_lift: lift disagrees with F by " + std::to_string(lift_err));
  return {lift_err, mod_err};
}

RotationEstimate rotation_number(cd rho, int n, double s0) {
  if (n < 1000) throw Error("rotation_number: n must be at least 1000");
  const CircleMapLift lift(rho);
  double x = s0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 1; k <= n; ++k) {
    x = lift(x);
    if (k >= n / 2) {
      const double e = (x - s0) / k;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  RotationEstimate r;
  r.iterations = n;
  r.lifted = (x - s0) / n;
  r.theta_hat = r.lifted - std::floor(r.lifted);
  r.error_bound = hi - lo;
  return r;
}

namespace {

// Lifted rotation number at offset a compared with thr: +1 above, -1 below, 0 when the orbit
// length cap is reached before the 1/n bound separates them.
struct Probe {
  int sign = 0;
  RotationEstimate est;
};

Probe compare(double a, double thr, const SolveOptions& opts) {
  const cd rho = std::polar(1.0, 2.0 * pi * a);
  for (long long n = opts.n_min;; n *= 4) {
    const int m = static_cast<int>(std::min<long long>(n, opts.n_max));
    Probe p;
    p.est = rotation_number(rho, m, 0.0);
    // the lifted offset in [0, 1) makes the lifted number lie in [0, 1]
    const double d = p.est.lifted - thr;
    if (std::abs(d) > 1.0 / m) {
      p.sign = d > 0 ? 1 : -1;
      return p;
    }
    if (m >= opts.n_max) return p;
  }
}

}  // namespace

RhoSolution solve_rho(double theta_target, double tol, const SolveOptions& opts) {
  if (!(theta_target >= 0.0 && theta_target < 1.0)) throw Error("solve_rho: target must lie in [0, 1)");
  if (!(tol >= 1e-7)) throw Error("solve_rho: tol must be at least 1e-7");
  const double lo_thr = theta_target - tol, hi_thr = theta_target + tol;
  const double res = 1e-13;

  // a_lo = inf { a : tau(a) > lo_thr }; tau(0) = 0 exactly since s = 0 is fixed
  double a_lo = 0.0;
  if (!(0.0 > lo_thr)) {
    double l = 0.0, h = 1.0;
    while (h - l > res) {
      const double m = 0.5 * (l + h);
      const Probe p = compare(m, lo_thr, opts);
      if (p.sign == 0) {
        h = m;
        break;
      }
      (p.sign > 0 ? h : l) = m;
    }
    a_lo = h;
  }
  // a_hi = sup { a : tau(a) < hi_thr }
  double a_hi = 1.0;
  if (!(1.0 < hi_thr)) {
    double l = a_lo, h = 1.0;
    while (h - l > res) {
      const double m = 0.5 * (l + h);
      const Probe p = compare(m, hi_thr, opts);
      if (p.sign == 0) {
        l = m;
        break;
      }
      (p.sign < 0 ? l : h) = m;
    }
    a_hi = l;
  }
  if (a_lo > a_hi)
    throw Error("solve_rho: no bracket for target " + std::to_string(theta_target) + " (arc [" +
                std::to_string(a_lo) + ", " + std::to_string(a_hi) + "])");

  RhoSolution s;
  s.arc_lo = a_lo;
  s.arc_hi = a_hi;
  const double mid = 0.5 * (a_lo + a_hi);
  s.rho = std::polar(1.0, 2.0 * pi * mid);
  s.estimate = rotation_number(s.rho, opts.n_max, 0.0);
  if (std::abs(s.estimate.lifted - theta_target) >= tol)
    throw Error("solve_rho: rotation number " + std::to_string(s.estimate.theta_hat) +
                " at the bracket midpoint misses the target");

  const auto lock = lift_lock(s.rho, opts.lock_period_max, opts.lock_transient, opts.lock_tol);
  if (!lock) return s;
  s.plateau = true;
  s.lock_p = lock->first;
  s.lock_q = lock->second;
  const auto same = [&](double a) {
    const auto l = lift_lock(std::polar(1.0, 2.0 * pi * a), opts.lock_period_max, opts.lock_transient, opts.lock_tol);
    return l && *l == *lock;
  };
  double edge = a_lo;
  if (!same(a_lo)) {
    double l = a_lo, h = mid;
    while (h - l > 1e-10) {
      const double m = 0.5 * (l + h);
      (same(m) ? h : l) = m;
    }
    edge = h;
  }
  s.rho = std::polar(1.0, 2.0 * pi * edge);
  s.estimate = rotation_number(s.rho, opts.n_max, 0.0);
  return s;
}

std::optional<std::pair<long long, int>> lift_lock(cd rho, int q_max, int transient, double tol) {
  const CircleMapLift lift(rho);
  double x = 0.0;
  for (int k = 0; k < transient; ++k) {
    x = lift(x);
    x -= std::floor(x);
  }
  const double x0 = x;
  for (int q = 1; q <= q_max; ++q) {
    x = lift(x);
    const double p = std::round(x - x0);
    if (std::abs(x - x0 - p) < tol) return std::make_pair(static_cast<long long>(p), q);
  }
  return std::nullopt;
}

CirclePeriodicReport verify_no_circle_periodics(cd rho, int period_max, double tol) {
  if (period_max < 1) throw Error("verify_no_circle_periodics: period_max must be positive");
  const RationalMap f = make_f_theta(rho);
  CirclePeriodicReport rep;
  rep.rho = rho;
  rep.period_max = period_max;
  rep.tol = tol;
  for (int n = 1; n <= period_max; ++n) {
    const auto set = periodic_points(f, n);
    rep.counts.push_back(set.points.size());
    rep.complete = rep.complete && set.complete;
    for (const auto& p : set.points) {
      if (p.period != n || p.point.is_infinity()) continue;
      if (std::abs(std::abs(p.point.value()) - 1.0) < tol) rep.findings.push_back(p);
    }
  }
  return rep;
}

std::string ftheta_to_json(const RhoSolution& sol, const CirclePeriodicReport& rep) {
  nlohmann::json j;
  j["rho"] = {sol.rho.real(), sol.rho.imag()};
  j["theta_hat"] = sol.estimate.theta_hat;
  j["error_bound"] = sol.estimate.error_bound;
  j["iterations"] = sol.estimate.iterations;
  j["arc"] = {sol.arc_lo, sol.arc_hi};
  j["plateau"] = sol.plateau;
  if (sol.plateau) j["lock"] = {sol.lock_p, sol.lock_q};
  j["period_max"] = rep.period_max;
  j["tol"] = rep.tol;
  j["complete"] = rep.complete;
  j["counts"] = rep.counts;
  nlohmann::json f = nlohmann::json::array();
  for (const auto& p : rep.findings) {
    const cd z = p.point.value();
    f.push_back({{"point", {z.real(), z.imag()}}, {"period", p.period}, {"abs_multiplier", std::abs(p.multiplier)}});
  }
  j["periodic_findings"] = f;
  return j.dump();
}

}  // namespace ratdyn
