#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratdyn/dynamics.hpp"

namespace ratdyn {

/// F(z) = rho z^2 (z - 3) / (1 - 3z). Throws unless |rho| = 1 within 1e-12.
RationalMap make_f_theta(cd rho);

/// Lift of F restricted to the unit circle, in turns:
/// s -> s + arg(rho)/2pi + arg(3 - e(s))/pi, with lift(s + 1) = lift(s) + 1.
struct CircleMapLift {
  cd rho;
  double offset = 0.0;  ///< arg(rho) / 2pi in [0, 1)

  explicit CircleMapLift(cd rho);
  double operator()(double s) const;
};

/// max over samples of |e(lift(s)) - F(e(s))| and of ||F(e(s))| - 1|; throws Error when the
/// lift disagrees with the map by more than 1e-9 anywhere.
std::pair<double, double> check_lift(const CircleMapLift& lift, int samples = 10000);

struct RotationEstimate {
  double theta_hat = 0.0;  ///< in [0, 1)
  double lifted = 0.0;     ///< (lift^n(s0) - s0) / n without reduction
  int iterations = 0;
  double error_bound = 0.0;
};

/// Birkhoff average of the lift displacement; error_bound is the spread of the running
/// estimates over the second half of the orbit.
RotationEstimate rotation_number(cd rho, int n, double s0 = 0.0);

struct RhoSolution {
  cd rho;
  RotationEstimate estimate;
  /// Arc [a0, a1] of arg(rho)/2pi whose rotation numbers lie within tol of the target.
  double arc_lo = 0.0, arc_hi = 0.0;
  /// Set when the arc midpoint is mode-locked: the lift has a p/q periodic orbit with
  /// q <= lock_period_max. rho is then the left edge of that locking interval.
  bool plateau = false;
  long long lock_p = 0;
  int lock_q = 0;
};

struct SolveOptions {
  int n_min = 1000;
  int n_max = 4000000;
  int lock_period_max = 1000;
  int lock_transient = 100000;
  double lock_tol = 1e-9;
};

/// Bisection on arg(rho) for rotation number theta_target. On a plateau rho is the leftmost
/// point of the locking interval. Throws Error when no bracket is found.
RhoSolution solve_rho(double theta_target, double tol, const SolveOptions& opts = {});

/// (p, q) when the orbit of s0 under the lift settles on a p/q periodic orbit with q <= q_max.
std::optional<std::pair<long long, int>> lift_lock(cd rho, int q_max = 1000, int transient = 100000,
                                                   double tol = 1e-9);

struct CirclePeriodicReport {
  cd rho;
  int period_max = 0;
  double tol = 0.0;
  std::vector<PeriodicPoint> findings;  ///< periodic points with ||z| - 1| < tol
  std::vector<std::size_t> counts;      ///< periodic_points(F, n) sizes
  bool complete = true;
};

CirclePeriodicReport verify_no_circle_periodics(cd rho, int period_max, double tol);

std::string ftheta_to_json(const RhoSolution& sol, const CirclePeriodicReport& rep);

}  // namespace ratdyn
