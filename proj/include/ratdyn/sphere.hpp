#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "ratdyn/poly.hpp"
#include "ratdyn/roots.hpp"

namespace ratdyn {

/// Local coordinate on the sphere: z itself, or w = 1/z near infinity.
enum class Chart { Affine, Infinity };

/// A point of the Riemann sphere. Affine coordinates are always finite;
/// infinity has a single representation.
class SpherePoint {
 public:
  SpherePoint() = default;
  SpherePoint(cd z);  // NOLINT(google-explicit-constructor): points are used like numbers
  SpherePoint(double x) : SpherePoint(cd(x, 0.0)) {}  // NOLINT

  static SpherePoint infinity();
  static SpherePoint from_coord(Chart chart, cd coord);
  /// Inverse stereographic projection onto the unit sphere in R^3.
  static SpherePoint from_r3(const std::array<double, 3>& v);

  bool is_infinity() const { return inf_; }
  /// Affine value; throws for infinity.
  cd value() const;
  /// Chart with |coord| <= 1 (crossover at |z| = 1).
  Chart natural_chart() const;
  /// Coordinate in `chart`; throws when the point is not covered by the chart.
  cd coord(Chart chart) const;
  std::array<double, 3> to_r3() const;

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.z_ == b.z_);
  }

 private:
  cd z_{0.0, 0.0};
  bool inf_ = false;
};

std::string to_string(const SpherePoint& p);

/// Chordal metric on the sphere of diameter 2.
double spherical_distance(const SpherePoint& p, const SpherePoint& q);

/// Rotation of the sphere z -> (z - c)/(1 + conj(c) z); an isometry of the chordal metric.
SpherePoint rotate(const SpherePoint& z, cd c);
SpherePoint rotate_inverse(const SpherePoint& w, cd c);

/// Value and derivative of a map expressed in chosen input/output charts.
struct ChartJet {
  cd value;
  cd derivative;
  bool finite = true;
};

/// A rational map of degree >= 2 stored as coprime numerator/denominator
/// (ascending coefficients), denominator made monic.
class RationalMap {
 public:
  RationalMap(Poly numer, Poly denom);
  /// Skips the common-root test; for results of compose and conjugation of valid maps.
  static RationalMap trusted(Poly numer, Poly denom);

  int degree() const { return degree_; }
  const Poly& numer() const { return numer_; }
  const Poly& denom() const { return denom_; }

  SpherePoint operator()(const SpherePoint& z) const;

  /// f expressed as F = chart_out(f(chart_in^{-1}(Z))) with its derivative dF/dZ.
  ChartJet jet(const SpherePoint& z, Chart in, Chart out) const;

  /// Jet with input chart natural for z and output chart natural for f(z).
  ChartJet natural_jet(const SpherePoint& z, Chart* in = nullptr, Chart* out = nullptr) const;

  /// Numerator/denominator polynomials of f in the given input chart, padded to degree + 1.
  const Poly& chart_numer(Chart in) const;
  const Poly& chart_denom(Chart in) const;

  /// All degree preimages of `target`, with multiplicity.
  std::vector<SpherePoint> preimages(const SpherePoint& target) const;

  /// Numerator/denominator of the Wronskian P'Q - PQ' (trimmed).
  Poly wronskian() const;

 private:
  Poly numer_;
  Poly denom_;
  int degree_ = 0;
  Poly aff_num_, aff_den_, inf_num_, inf_den_;

  RationalMap(Poly numer, Poly denom, bool check);
};

/// f(g(z)) by homogeneous composition.
RationalMap compose(const RationalMap& f, const RationalMap& g);

/// R o f o R^{-1} for the sphere rotation R with parameter c.
RationalMap conjugate_by_rotation(const RationalMap& f, cd c);

SpherePoint eval(const RationalMap& map, const SpherePoint& z);

/// ||f'(z)|| = |f'(z)| (1 + |z|^2) / (1 + |f(z)|^2), chart independent.
double spherical_derivative(const RationalMap& map, const SpherePoint& z);

/// The 2D - 2 critical points with multiplicity.
std::vector<SpherePoint> critical_points(const RationalMap& map);

/// Point and chart-derivative of f^n along the orbit. The input chart is natural for z and the
/// final output chart is `out` (natural for f^n(z) when unset).
struct OrbitJet {
  SpherePoint point;
  cd derivative;
  Chart in;
  Chart out;
  bool finite = true;
};
OrbitJet orbit_jet(const RationalMap& map, const SpherePoint& z, int n,
                   const Chart* in_chart = nullptr, const Chart* out_chart = nullptr);

/// ||(f^n)'(z)|| as a product of single-step spherical derivatives.
double spherical_derivative_iterate(const RationalMap& map, const SpherePoint& z, int n);

}  // namespace ratdyn
