#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratdyn/basins.hpp"

namespace ratdyn {

struct ScreeningOptions {
  double critical_tol = 1e-6;
  int parabolic_max_period = 4;  ///< cycles of period <= this are searched for parabolic suspects
  double parabolic_tol = 1e-6;
  /// Drop samples whose orbit up to n_max enters exclusion_radius of a critical point instead of
  /// failing on them. The check then runs on what remains.
  bool exclude_critical = false;
  double exclusion_radius = 1e-3;
};

struct ExpansionReport {
  BoundarySampleSet samples;
  std::vector<std::pair<int, double>> per_n;  ///< (n, min over samples of ||(f^n)'||)
  std::optional<int> certified_N;
  std::vector<std::size_t> excluded;  ///< sample indices dropped by exclude_critical
};

/// Minimum over the samples of ||(f^n)'|| for n = 1..n_max. certified_N is the least N with the
/// minimum above 1 for every n in [N, n_max]. Throws HypothesisError when a sample sits within
/// tolerance of a critical point or of a parabolic-suspect periodic point, or when exclusion
/// leaves no sample.
ExpansionReport mane_check(const RationalMap& map, const BoundarySampleSet& samples, int n_max,
                           const ScreeningOptions& screen = {});

/// Slope of the least-squares line through (n, log min) for n >= from.
double expansion_slope(const ExpansionReport& r, int from);

struct DistanceExpandingReport {
  bool pass = false;
  std::size_t pairs_checked = 0;
  double worst_ratio = 0.0;  ///< min of sigma(f^N x, f^N y) / sigma(x, y)
  SpherePoint worst_x, worst_y;
};

/// Checks sigma(f^N x, f^N y) >= lambda sigma(x, y) over pairs with sigma(x, y) <= eta, nearest
/// pairs first, at most pair_budget of them. No eligible pair counts as a failure.
DistanceExpandingReport distance_expanding_check(const RationalMap& map,
                                                 const std::vector<SpherePoint>& samples,
                                                 double lambda, double eta, int N,
                                                 std::size_t pair_budget = 100000);

struct NearReturn {
  int Q = 0, P = 0;
  double distance = 0.0;
};

/// All Q < P <= horizon with sigma(f^Q z, f^P z) <= alpha, by distance.
std::vector<NearReturn> near_returns(const RationalMap& map, const SpherePoint& z, int horizon,
                                     double alpha);

struct ClosingResult {
  SpherePoint seed;
  int L = 0;
  PeriodicPoint refined;
  double seed_distance = 0.0;
  double residual = 0.0;  ///< sigma(f^L(refined), refined)
};

/// Newton on f^L(z) = z from seed. Throws ConvergenceError when no point with residual below
/// 1e-10 is reached.
ClosingResult closing_refine(const RationalMap& map, const SpherePoint& seed, int L);

struct ClosingSweep {
  std::vector<ClosingResult> results;
  std::vector<std::pair<SpherePoint, std::string>> failures;  ///< seed and reason
  std::size_t seeds = 0;
  /// Samples whose near-returns all have ||(f^L)'|| above max_derivative, where double precision
  /// cannot reach the 1e-10 residual.
  std::size_t beyond_precision = 0;
};

/// For every sample with a near-return within alpha, refines f^Q(z) with L = P - Q, trying the
/// returns in order of increasing L until one certifies. Returns with ||(f^L)'(f^Q z)|| above
/// max_derivative are skipped.
ClosingSweep closing_sweep(const RationalMap& map, const std::vector<SpherePoint>& samples,
                           double alpha = 1e-2, int horizon = 60, double max_derivative = 1e6);

std::string expansion_to_json(const ExpansionReport& r);
void write_closing_csv(const std::vector<ClosingResult>& rows, const std::string& path);

}  // namespace ratdyn
