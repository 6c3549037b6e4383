#pragma once

#include <array>
#include <string>
#include <vector>

#include "ratdyn/dynamics.hpp"

namespace ratdyn {

constexpr int UNRESOLVED = -1;

/// Axis-aligned rectangle in a chart coordinate.
struct Window {
  double x0 = -2.0, x1 = 2.0, y0 = -2.0, y1 = 2.0;
};

/// Cell grid over a window of one chart; cell (ix, iy) stored at iy * n + ix.
struct Grid {
  Chart chart = Chart::Affine;
  Window window;
  int n = 0;
  std::vector<int> labels;

  double hx() const { return (window.x1 - window.x0) / n; }
  double hy() const { return (window.y1 - window.y0) / n; }
  cd center(int ix, int iy) const;
  SpherePoint point(int ix, int iy) const { return SpherePoint::from_coord(chart, center(ix, iy)); }
  /// Cell containing the chart coordinate w; false when outside the window.
  bool locate(cd w, int& ix, int& iy) const;
  bool locate(const SpherePoint& p, int& ix, int& iy) const;
  int at(int ix, int iy) const { return labels[static_cast<std::size_t>(iy) * n + ix]; }
};

struct Attractor {
  PeriodicPoint base;
  std::vector<SpherePoint> cycle;
  /// Spherical radius around every cycle point where ||(f^period)'|| < 0.9 was verified.
  double capture_radius = 0.0;
};

struct BasinAtlas {
  Window window;
  Window infinity_window{-1.0, 1.0, -1.0, 1.0};
  int resolution = 0;
  int max_iter = 0;
  std::array<Grid, 2> grids;  ///< [0] affine, [1] infinity chart
  std::vector<Attractor> attractors;
  /// immediate[a][g]: mask of attractor a's immediate component in grids[g]; empty when the
  /// attractor cell is unresolved.
  std::vector<std::array<std::vector<char>, 2>> immediate;

  /// Label of the cell containing p (affine grid first); UNRESOLVED outside both windows.
  int label_at(const SpherePoint& p) const;
  bool in_immediate(int attractor, const SpherePoint& p) const;
};

/// Capture radius certificate for a cycle: largest r = 0.5 / 2^k with ||(f^p)'|| < 0.9 on
/// sampled rings of radius r, r/2, r/4 around every cycle point.
double capture_radius(const RationalMap& map, const std::vector<SpherePoint>& cycle);

Attractor make_attractor(const RationalMap& map, const PeriodicPoint& p);

/// Attracting cycles of period <= max_period, one representative per cycle.
std::vector<PeriodicPoint> find_attractors(const RationalMap& map, int max_period = 4);

/// Attractor id for z, or UNRESOLVED after max_iter steps.
int classify_point(const RationalMap& map, const std::vector<Attractor>& attractors,
                   SpherePoint z, int max_iter);

BasinAtlas classify(const RationalMap& map, const std::vector<PeriodicPoint>& attractors,
                    const Window& window, int resolution, int max_iter = 500);

/// Flood fill of the attractor's label from its cell, merged across both charts.
std::array<std::vector<char>, 2> immediate_component(const BasinAtlas& atlas, int attractor);

struct BoundarySample {
  SpherePoint point;
  SpherePoint witness_i;
  SpherePoint witness_j;
};

struct BoundarySampleSet {
  int i = 0, j = 0;
  double tol = 1e-8;
  std::vector<BoundarySample> points;
};

struct BoundaryOptions {
  std::size_t max_samples = 256;
  int subgrid = 32;
};

/// Points within tol of both immediate components, found by repeatedly zooming into cells that
/// touch both masks.
BoundarySampleSet boundary_intersection(const RationalMap& map, const BasinAtlas& atlas, int i,
                                        int j, double tol = 1e-8, const BoundaryOptions& opts = {});

void write_ppm(const BasinAtlas& atlas, const std::string& path, Chart chart = Chart::Affine);
void write_csv(const BoundarySampleSet& set, const std::string& path);

}  // namespace ratdyn
