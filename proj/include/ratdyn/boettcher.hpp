#pragma once

#include "ratdyn/basins.hpp"

namespace ratdyn {

/// Local conjugacy beta of f near a superattracting fixed point a to v -> v^d, as truncated series
/// in the local coordinate u = z - a (u = 1/z at infinity).
struct BoettcherChart {
  SpherePoint attractor;
  int degree = 2;
  cd leading;        ///< c in f(a + u) = a + c u^d + ...
  cd normalization;  ///< b with b^(d-1) = c, principal branch
  double reference_radius = 0.0;
  Poly beta;  ///< beta[k] is the coefficient of u^k
  Poly psi;   ///< inverse series

  cd local(const SpherePoint& z) const;
  SpherePoint from_local(cd u) const;
  /// psi(v) mapped to the sphere; meant for |v| <= reference_radius.
  SpherePoint inverse(cd v) const;
  cd forward(const SpherePoint& z) const;
};

/// Taylor coefficients of the local expression of f at the fixed point a, up to u^order.
Poly local_series(const RationalMap& map, const SpherePoint& a, int order);

/// max over samples of sigma(f(psi(r e(t))), psi(r^d e(d t))).
double functional_equation_error(const RationalMap& map, const BoettcherChart& chart, double r,
                                 int samples = 64);

/// When an atlas is given, critical points other than a inside the immediate component of
/// `attractor_id` are rejected.
BoettcherChart build_chart(const RationalMap& map, const SpherePoint& a, int d, int order = 8,
                           const BasinAtlas* atlas = nullptr, int attractor_id = -1);

}  // namespace ratdyn
