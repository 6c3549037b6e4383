#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ratdyn/poly.hpp"

namespace ratdyn {

/// Roots listed with multiplicity; multiplicity[k] is the size of the cluster roots[k] belongs to.
struct PolyRoots {
  std::vector<cd> roots;
  std::vector<int> multiplicity;
  double residual = 0.0;  ///< max |p(root)|
  int iterations = 0;
};

struct RootOptions {
  int max_iterations = 1000;
  /// Backward-error threshold below which a non-converged run is still accepted.
  double accept_backward_error = 1e-8;
  /// Relative radius used to group roots into multiplicity clusters.
  double cluster_radius = 1e-6;
};

/// Aberth-Ehrlich simultaneous iteration. Deterministic given the coefficients.
/// Throws ConvergenceError when the iteration cap is hit without an acceptable backward error.
PolyRoots find_roots(std::span<const cd> coeffs, const RootOptions& opts = {});

/// Newton correction p(z)/p'(z) for an implicitly evaluated polynomial.
using NewtonCorrection = std::function<cd(cd)>;

struct AberthResult {
  std::vector<cd> roots;
  std::vector<bool> converged;
  int iterations = 0;
};

/// Aberth iteration on a polynomial of degree initial.size() known only through its Newton
/// correction. Used where the coefficients are not numerically meaningful (iterated maps).
AberthResult aberth_implicit(const NewtonCorrection& correction, std::vector<cd> initial,
                             int max_iterations, double step_tol = 4e-16);

}  // namespace ratdyn
