#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratdyn/dynamics.hpp"
#include "ratdyn/rays.hpp"

namespace ratdyn {

/// Two landed rays from different basins meeting at a junction.
struct Chord {
  Ray ray1;
  Ray ray2;
  SpherePoint junction;

  /// Attractor 1 -> junction -> attractor 2.
  std::vector<SpherePoint> polyline() const;
};

/// Builds a chord from two landed rays; throws when the landings are farther apart than tol.
/// With degree >= 2 the junction is refined onto the cycle predicted by ray1's angle.
Chord make_chord(const RationalMap& map, Ray r1, Ray r2, double tol, int degree = 0);

/// All rays traced, then landings within junction_tol matched greedily by distance.
std::vector<Chord> detect_chords(RayTracer& basin1, RayTracer& basin2,
                                 const std::vector<Angle>& angles1,
                                 const std::vector<Angle>& angles2, double junction_tol);

/// Angles of the grid whose rays land within tol of point.
std::vector<Angle> multi_access(RayTracer& tracer, const SpherePoint& point,
                                const std::vector<Angle>& grid, double tol);

/// Symmetric Hausdorff distance between the chord polylines, taken as unions of straight segments
/// in R^3 (chordal metric). Accurate to about 1e-14.
double hausdorff_distance(const Chord& a, const Chord& b);
double hausdorff_distance(const std::vector<SpherePoint>& a, const std::vector<SpherePoint>& b);

/// Same isotopy class rel the marked points: all marked points (other than the two attractors)
/// lie in one complementary component of chord A union chord B, decided by crossing parity.
bool same_isotopy_class(const Chord& a, const Chord& b, const std::vector<SpherePoint>& marked,
                        double tol);

/// The lift of the chord through target_preimage: the unique pair of lifted angles whose rays both
/// land within tol of the target.
Chord lift_chord(const RationalMap& map, const Chord& chord, RayTracer& basin1, RayTracer& basin2,
                 const SpherePoint& target_preimage, double tol);

/// Smallest M < N <= horizon with sigma(f^M(x), f^N(x)) < threshold, as (M, N - M).
std::optional<std::pair<int, int>> near_return(const RationalMap& map, const SpherePoint& x,
                                               double threshold = 1e-4, int horizon = 200);

struct PullbackReport {
  int pushed = 0;  ///< forward iterates applied before lifting
  int Q = 0;
  std::vector<double> d_h;  ///< d_H(stage q+1, stage q)
  bool converged = false;
  double junction_residual = 0.0;  ///< sigma(f^Q(junction), junction)
  PeriodicPoint junction;
};

/// Pushes the chord forward onto its near-periodic part, then repeatedly lifts it Q times along
/// the backward orbit that follows the previous stage, until consecutive stages are within
/// conv_tol in d_H. Q <= 0 asks for a near-return search.
std::pair<Chord, PullbackReport> pullback_periodic(const RationalMap& map, const Chord& chord,
                                                   RayTracer& basin1, RayTracer& basin2, int Q,
                                                   int max_stages = 30, double conv_tol = 1e-8,
                                                   double junction_tol = 1e-7);

struct CatalogEntry {
  int level = 0;  ///< q with angles k/(d^q - 1)
  Chord chord;
  PeriodicPoint junction;
};

/// Periodic angles of every level q <= bound in both basins, matched into chords whose junctions
/// are certified as periodic points.
std::vector<CatalogEntry> boundary_periodic_catalog(const RationalMap& map, RayTracer& basin1,
                                                    RayTracer& basin2, int bound,
                                                    double junction_tol);

/// k / (d^q - 1), k = 0 .. d^q - 2.
std::vector<Angle> periodic_angles(int d, int q);

std::string rays_to_json(const std::vector<Ray>& rays);
std::string chords_to_json(const std::vector<Chord>& chords);
void write_catalog_csv(const std::vector<CatalogEntry>& cat, const std::string& path);

}  // namespace ratdyn
