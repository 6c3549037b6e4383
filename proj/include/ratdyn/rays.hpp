#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ratdyn/angle.hpp"
#include "ratdyn/boettcher.hpp"

namespace ratdyn {

/// Two preimages were too close to the predicted continuation to choose between.
class BranchAmbiguity : public Error {
 public:
  using Error::Error;
};

struct Ray {
  int basin = 0;
  Angle angle;
  /// Attractor first, then outward points, then the landing point when landed.
  std::vector<SpherePoint> polyline;
  bool landed = false;
  std::optional<SpherePoint> landing_point;
  int levels = 0;
};

struct TraceOptions {
  int band = 8;  ///< points per level
  int max_levels = 400;
  double step_tol = 1e-10;
  int landed_levels = 3;
  double dominance = 2.0;
};

/// Internal rays of one basin. Level-0 points come from the chart series at radii
/// rho_j = r0^(d^(1 - j/band)); the level-k point of angle s is the preimage of the level-(k-1)
/// point of angle d s nearest a linear predictor. Points are cached per angle.
class RayTracer {
 public:
  RayTracer(RationalMap map, BoettcherChart chart, int basin = 0, TraceOptions opts = {});

  Ray trace(const Angle& t);
  /// Cached points of angle s, at least levels + 1 levels of `band` points each.
  const std::vector<SpherePoint>& points(const Angle& s, int levels);

  const RationalMap& map() const { return map_; }
  const BoettcherChart& chart() const { return chart_; }
  int basin() const { return basin_; }
  int degree() const { return chart_.degree; }
  const TraceOptions& options() const { return opts_; }

 private:
  RationalMap map_;
  BoettcherChart chart_;
  int basin_;
  TraceOptions opts_;
  std::vector<double> radii_;
  std::map<Angle, std::vector<SpherePoint>> cache_;
};

/// Throws ConvergenceError when the ray does not land within max_levels.
Ray trace_ray(const RationalMap& map, const BoettcherChart& chart, const Angle& t,
              int max_levels = 400, double step_tol = 1e-10);

/// Newton-refines f^l(x) onto a cycle of period q and pulls the result back along the orbit of x.
/// Returns x unchanged when the refinement does not stay within 1e-6.
SpherePoint refine_preperiodic(const RationalMap& map, const SpherePoint& x, int l, int q);

/// Nearest preimage of target to `near`; throws BranchAmbiguity when the runner-up is within
/// `dominance` times the best distance.
SpherePoint nearest_preimage(const RationalMap& map, const SpherePoint& target,
                             const SpherePoint& near, double dominance = 2.0);

}  // namespace ratdyn
