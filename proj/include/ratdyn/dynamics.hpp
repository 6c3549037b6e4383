#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratdyn/sphere.hpp"

namespace ratdyn {

enum class CycleClass { Superattracting, Attracting, Repelling, ParabolicSuspect };

std::string to_string(CycleClass c);

struct PeriodicPoint {
  SpherePoint point;
  int period = 1;  ///< minimal
  cd multiplier;   ///< of the whole cycle
  CycleClass cls = CycleClass::Repelling;
  double residual = 0.0;  ///< sigma(f^period(point), point)
};

struct PeriodicPointSet {
  int n = 1;
  std::vector<PeriodicPoint> points;
  /// False when the seed-grid fallback was used and points may be missing.
  bool complete = true;
  /// max over returned points of sigma(f^period(z), z). Evaluating f^period in double
  /// precision has a floor near |multiplier| * 1e-16.
  double max_residual = 0.0;
};

struct PeriodicOptions {
  int n_max = 8;
  /// Above this many fixed points of f^n the seed-grid fallback is used.
  int implicit_limit = 6562;
  double dedupe_tol = 1e-9;
  double classify_tol = 1e-6;
  int max_iterations = 500;
};

std::vector<SpherePoint> orbit(const RationalMap& map, const SpherePoint& z, int n);

/// Newton iteration on f^q(z) = z in the natural chart of the current iterate.
std::optional<SpherePoint> refine_periodic(const RationalMap& map, const SpherePoint& seed, int q,
                                           double tol = 1e-10, int max_iterations = 100);

/// Smallest divisor k of n with sigma(f^k(z), z) < tol.
int minimal_period(const RationalMap& map, const SpherePoint& z, int n, double tol = 1e-8);

/// Product of chart derivatives along a closed cycle. Throws when the cycle does not close.
cd multiplier(const RationalMap& map, const std::vector<SpherePoint>& cycle, double close_tol = 1e-6);

CycleClass classify_multiplier(cd m, double classify_tol = 1e-6);

/// Builds the cycle through z of the given period and classifies it.
PeriodicPoint make_periodic_point(const RationalMap& map, const SpherePoint& z, int period,
                                  double classify_tol = 1e-6);

/// All fixed points of f^n, each labelled with its minimal period and cycle multiplier,
/// sorted by (real, imag) with infinity last.
PeriodicPointSet periodic_points(const RationalMap& map, int n, const PeriodicOptions& opts = {});

struct CriticalOrbit {
  SpherePoint critical;
  int multiplicity = 1;
  std::vector<SpherePoint> orbit;  ///< f(c), f^2(c), ... truncated at depth or at a detected cycle
  bool cycles = false;
  int preperiod = 0;  ///< when cycles: f^preperiod(c) is the first point on the cycle
  int period = 0;
};

struct PostcriticalSet {
  int depth = 0;
  std::vector<CriticalOrbit> forward;
  int backward_depth = 0;
  /// backward[m] holds f^{-m}(O_C), deduplicated; backward[0] is O_C itself.
  std::vector<std::vector<SpherePoint>> backward;
  bool finite_flag = false;

  /// Distinct forward-orbit points.
  std::vector<SpherePoint> points() const;
};

struct PostcriticalOptions {
  double snap_tol = 1e-10;
  std::size_t cap = 100000;
};

PostcriticalSet postcritical(const RationalMap& map, int depth, int backward_depth,
                             const PostcriticalOptions& opts = {});

/// Smallest (preperiod, period) with sigma(f^{l+q}(z), f^l(z)) < tol, confirmed by refining
/// f^l(z) onto a genuine cycle within 10 tol.
std::optional<std::pair<int, int>> eventually_periodic_test(const RationalMap& map,
                                                            const SpherePoint& z, int preperiod_max,
                                                            int period_max, double tol);

/// Appends p unless a point within tol is already present.
void append_unique(std::vector<SpherePoint>& pts, const SpherePoint& p, double tol);

}  // namespace ratdyn
