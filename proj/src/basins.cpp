#include "ratdyn/basins.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

namespace ratdyn {

cd Grid::center(int ix, int iy) const {
  return {window.x0 + (ix + 0.5) * hx(), window.y0 + (iy + 0.5) * hy()};
}

bool Grid::locate(cd w, int& ix, int& iy) const {
  const double fx = (w.real() - window.x0) / hx();
  const double fy = (w.imag() - window.y0) / hy();
  if (!(fx >= 0.0 && fx < n && fy >= 0.0 && fy < n)) return false;
  ix = static_cast<int>(fx);
  iy = static_cast<int>(fy);
  return true;
}

bool Grid::locate(const SpherePoint& p, int& ix, int& iy) const {
  if (chart == Chart::Affine && p.is_infinity()) return false;
  if (chart == Chart::Infinity && !p.is_infinity() && p.value() == cd(0.0)) return false;
  return locate(p.coord(chart), ix, iy);
}

int BasinAtlas::label_at(const SpherePoint& p) const {
  int ix, iy;
  for (const auto& g : grids)
    if (g.n > 0 && g.locate(p, ix, iy)) return g.at(ix, iy);
  return UNRESOLVED;
}

bool BasinAtlas::in_immediate(int a, const SpherePoint& p) const {
  int ix, iy;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& g = grids[k];
    const auto& m = immediate[static_cast<std::size_t>(a)][k];
    if (g.n > 0 && !m.empty() && g.locate(p, ix, iy)) return m[static_cast<std::size_t>(iy) * g.n + ix];
  }
  return false;
}

namespace {

// Point at chordal distance r from c in direction theta.
SpherePoint ring_point(const SpherePoint& c, double r, double theta) {
  const double t = r / std::sqrt(4.0 - r * r);
  const cd u = std::polar(t, theta);
  if (c.is_infinity()) return SpherePoint::from_coord(Chart::Infinity, u);
  return rotate_inverse(SpherePoint(u), c.value());
}

// 4-connected flood fill of cells with label `lab`, starting from the marked cells of mask.
void flood(const Grid& g, int lab, std::vector<char>& mask) {
  std::deque<int> q;
  for (int k = 0; k < g.n * g.n; ++k)
    if (mask[static_cast<std::size_t>(k)]) q.push_back(k);
  while (!q.empty()) {
    const int k = q.front();
    q.pop_front();
    const int ix = k % g.n, iy = k / g.n;
    const int nb[4][2] = {{ix + 1, iy}, {ix - 1, iy}, {ix, iy + 1}, {ix, iy - 1}};
    for (const auto& c : nb) {
      if (c[0] < 0 || c[0] >= g.n || c[1] < 0 || c[1] >= g.n) continue;
      const int kk = c[1] * g.n + c[0];
      if (mask[static_cast<std::size_t>(kk)] || g.labels[static_cast<std::size_t>(kk)] != lab) continue;
      mask[static_cast<std::size_t>(kk)] = 1;
      q.push_back(kk);
    }
  }
}

void fill_labels(const RationalMap& map, const std::vector<Attractor>& att, Grid& g, int max_iter) {
  g.labels.assign(static_cast<std::size_t>(g.n) * g.n, UNRESOLVED);
#pragma omp parallel for schedule(dynamic, 1)
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      g.labels[static_cast<std::size_t>(iy) * g.n + ix] =
          classify_point(map, att, g.point(ix, iy), max_iter);
}

// Cell has a mask_i cell and a mask_j cell within Chebyshev distance 1.
bool touches_both(const Grid& g, const std::vector<char>& mi, const std::vector<char>& mj, int ix,
                  int iy) {
  bool a = false, b = false;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = ix + dx, y = iy + dy;
      if (x < 0 || x >= g.n || y < 0 || y >= g.n) continue;
      const auto k = static_cast<std::size_t>(y) * g.n + x;
      a |= mi[k] != 0;
      b |= mj[k] != 0;
    }
  return a && b;
}

}  // namespace

double capture_radius(const RationalMap& map, const std::vector<SpherePoint>& cycle) {
  const int p = static_cast<int>(cycle.size());
  for (double r = 0.5; r > 1e-9; r *= 0.5) {
    bool ok = true;
    for (const auto& c : cycle) {
      if (spherical_derivative_iterate(map, c, p) >= 0.9) return 0.0;
      for (const double rr : {r, 0.5 * r, 0.25 * r}) {
        for (int k = 0; k < 16 && ok; ++k) {
          const SpherePoint x = ring_point(c, rr, 2.0 * std::numbers::pi * (k + 0.25) / 16.0);
          ok = spherical_derivative_iterate(map, x, p) < 0.9;
        }
      }
      if (!ok) break;
    }
    if (ok) return r;
  }
  return 0.0;
}

Attractor make_attractor(const RationalMap& map, const PeriodicPoint& p) {
  if (p.cls != CycleClass::Attracting && p.cls != CycleClass::Superattracting)
    throw HypothesisError("basins: " + to_string(p.point) + " is not an attracting cycle");
  Attractor a;
  a.base = p;
  a.cycle = orbit(map, p.point, p.period - 1);
  a.capture_radius = capture_radius(map, a.cycle);
  if (a.capture_radius <= 0.0)
    throw HypothesisError("basins: contraction 0.9 not certified near " + to_string(p.point));
  return a;
}

std::vector<PeriodicPoint> find_attractors(const RationalMap& map, int max_period) {
  std::vector<PeriodicPoint> out;
  std::vector<SpherePoint> covered;
  for (int n = 1; n <= max_period; ++n) {
    for (const auto& p : periodic_points(map, n).points) {
      if (p.period != n) continue;
      if (p.cls != CycleClass::Attracting && p.cls != CycleClass::Superattracting) continue;
      bool seen = false;
      for (const auto& c : covered) seen |= spherical_distance(c, p.point) < 1e-8;
      if (seen) continue;
      out.push_back(p);
      for (const auto& c : orbit(map, p.point, n - 1)) covered.push_back(c);
    }
  }
  return out;
}

int classify_point(const RationalMap& map, const std::vector<Attractor>& att, SpherePoint z,
                   int max_iter) {
  for (int it = 0; it <= max_iter; ++it) {
    for (std::size_t a = 0; a < att.size(); ++a)
      for (const auto& c : att[a].cycle)
        if (spherical_distance(z, c) < att[a].capture_radius) return static_cast<int>(a);
    if (it < max_iter) {
      const SpherePoint next = map(z);
      if (next == z) break;  // stuck on a fixed point that is not a listed attractor
      z = next;
    }
  }
  return UNRESOLVED;
}

BasinAtlas classify(const RationalMap& map, const std::vector<PeriodicPoint>& attractors,
                    const Window& window, int resolution, int max_iter) {
  if (attractors.empty()) throw HypothesisError("classify: no attracting cycle supplied");
  if (resolution < 2) throw Error("classify: resolution must be at least 2");
  BasinAtlas atlas;
  atlas.window = window;
  atlas.resolution = resolution;
  atlas.max_iter = max_iter;
  for (const auto& p : attractors) atlas.attractors.push_back(make_attractor(map, p));
  atlas.grids[0] = Grid{Chart::Affine, window, resolution, {}};
  atlas.grids[1] = Grid{Chart::Infinity, atlas.infinity_window, resolution, {}};
  for (auto& g : atlas.grids) fill_labels(map, atlas.attractors, g, max_iter);
  atlas.immediate.resize(attractors.size());
  for (std::size_t a = 0; a < attractors.size(); ++a) {
    try {
      atlas.immediate[a] = immediate_component(atlas, static_cast<int>(a));
    } catch (const Error&) {
      atlas.immediate[a] = {};
    }
  }
  return atlas;
}

std::array<std::vector<char>, 2> immediate_component(const BasinAtlas& atlas, int a) {
  if (a < 0 || a >= static_cast<int>(atlas.attractors.size()))
    throw Error("immediate_component: bad attractor id");
  const SpherePoint base = atlas.attractors[static_cast<std::size_t>(a)].base.point;
  std::array<std::vector<char>, 2> mask;
  bool seeded = false;
  for (std::size_t k = 0; k < 2; ++k) {
    const Grid& g = atlas.grids[k];
    mask[k].assign(static_cast<std::size_t>(g.n) * g.n, 0);
    int ix, iy;
    if (g.locate(base, ix, iy)) {
      if (g.at(ix, iy) != a)
        throw Error("immediate_component: attractor cell unresolved (resolution too coarse)");
      mask[k][static_cast<std::size_t>(iy) * g.n + ix] = 1;
      seeded = true;
    }
  }
  if (!seeded) throw Error("immediate_component: attractor outside both windows");

  // Flood each chart, then hand over cells whose centres fall in masked cells of the other.
  for (int round = 0; round < 64; ++round) {
    for (std::size_t k = 0; k < 2; ++k) flood(atlas.grids[k], a, mask[k]);
    bool changed = false;
    for (std::size_t k = 0; k < 2; ++k) {
      const Grid& g = atlas.grids[k];
      const Grid& o = atlas.grids[1 - k];
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
          const auto idx = static_cast<std::size_t>(iy) * g.n + ix;
          if (mask[k][idx] || g.labels[idx] != a) continue;
          int ox, oy;
          if (o.locate(g.point(ix, iy), ox, oy) && mask[1 - k][static_cast<std::size_t>(oy) * o.n + ox]) {
            mask[k][idx] = 1;
            changed = true;
          }
        }
    }
    if (!changed) break;
  }
  return mask;
}

BoundarySampleSet boundary_intersection(const RationalMap& map, const BasinAtlas& atlas, int i,
                                        int j, double tol, const BoundaryOptions& opts) {
  const int na = static_cast<int>(atlas.attractors.size());
  if (i < 0 || j < 0 || i >= na || j >= na || i == j)
    throw Error("boundary_intersection: bad attractor pair");
  const auto& Mi = atlas.immediate[static_cast<std::size_t>(i)];
  const auto& Mj = atlas.immediate[static_cast<std::size_t>(j)];
  if (Mi[0].empty() || Mj[0].empty())
    throw Error("boundary_intersection: immediate components not available");

  struct Cand {
    std::size_t grid;
    int ix, iy;
  };
  std::vector<Cand> cands;
  std::vector<SpherePoint> cand_pts;
  for (std::size_t k = 0; k < 2; ++k) {
    const Grid& g = atlas.grids[k];
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        if (!touches_both(g, Mi[k], Mj[k], ix, iy)) continue;
        // Same region seen from the other chart.
        const SpherePoint p = g.point(ix, iy);
        bool dup = false;
        if (k == 1) {
          int ox, oy;
          dup = atlas.grids[0].locate(p, ox, oy);
        }
        if (dup) continue;
        cands.push_back({k, ix, iy});
        cand_pts.push_back(p);
      }
  }
  if (cands.size() > opts.max_samples) {
    std::vector<Cand> keep;
    const double stride = static_cast<double>(cands.size()) / static_cast<double>(opts.max_samples);
    for (std::size_t s = 0; s < opts.max_samples; ++s)
      keep.push_back(cands[static_cast<std::size_t>(s * stride)]);
    cands = std::move(keep);
  }

  const int m = opts.subgrid;
  std::vector<std::optional<BoundarySample>> found(cands.size());
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    const Cand& c = cands[ci];
    Grid parent = atlas.grids[c.grid];
    std::vector<char> pi = Mi[c.grid], pj = Mj[c.grid];
    const Chart chart = parent.chart;
    cd w0 = parent.center(c.ix, c.iy);
    double hx = parent.hx(), hy = parent.hy();
    bool ok = true;
    Grid sub;
    std::vector<char> si, sj;
    int bx = -1, by = -1;
    for (int level = 0; level < 60; ++level) {
      sub = Grid{chart, {w0.real() - 4 * hx, w0.real() + 4 * hx, w0.imag() - 4 * hy, w0.imag() + 4 * hy}, m, {}};
      fill_labels(map, atlas.attractors, sub, atlas.max_iter);
      si.assign(static_cast<std::size_t>(m) * m, 0);
      sj.assign(static_cast<std::size_t>(m) * m, 0);
      // Immediacy is inherited from the parent masks, then spread by flood fill.
      for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
          const auto idx = static_cast<std::size_t>(iy) * m + ix;
          int px, py;
          if (!parent.locate(sub.center(ix, iy), px, py)) continue;
          const auto pidx = static_cast<std::size_t>(py) * parent.n + px;
          if (sub.labels[idx] == i && pi[pidx]) si[idx] = 1;
          if (sub.labels[idx] == j && pj[pidx]) sj[idx] = 1;
        }
      flood(sub, i, si);
      flood(sub, j, sj);
      double best = std::numeric_limits<double>::infinity();
      bx = by = -1;
      for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
          if (!touches_both(sub, si, sj, ix, iy)) continue;
          const double d = std::abs(sub.center(ix, iy) - w0);
          if (d < best) {
            best = d;
            bx = ix;
            by = iy;
          }
        }
      if (bx < 0) {
        ok = false;
        break;
      }
      w0 = sub.center(bx, by);
      hx = sub.hx();
      hy = sub.hy();
      parent = sub;
      pi = si;
      pj = sj;
      // chordal length element is 2|dw|/(1+|w|^2) in either chart
      const double scale = 2.0 / (1.0 + std::norm(w0));
      if (scale * std::max(hx, hy) <= tol / 6.0) break;
    }
    if (!ok) continue;
    BoundarySample s;
    s.point = SpherePoint::from_coord(chart, w0);
    double di = std::numeric_limits<double>::infinity(), dj = di;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = bx + dx, y = by + dy;
        if (x < 0 || x >= m || y < 0 || y >= m) continue;
        const auto idx = static_cast<std::size_t>(y) * m + x;
        const SpherePoint p = sub.point(x, y);
        const double d = spherical_distance(p, s.point);
        if (si[idx] && d < di) {
          di = d;
          s.witness_i = p;
        }
        if (sj[idx] && d < dj) {
          dj = d;
          s.witness_j = p;
        }
      }
    found[ci] = s;
  }

  BoundarySampleSet out;
  out.i = i;
  out.j = j;
  out.tol = tol;
  for (const auto& f : found) {
    if (!f) continue;
    bool dup = false;
    for (const auto& s : out.points) dup |= spherical_distance(s.point, f->point) < tol;
    if (!dup) out.points.push_back(*f);
  }
  if (out.points.empty())
    throw Error("boundary_intersection: empty result (boundaries disjoint at this resolution)");
  return out;
}

void write_ppm(const BasinAtlas& atlas, const std::string& path, Chart chart) {
  const Grid& g = atlas.grids[chart == Chart::Affine ? 0 : 1];
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_ppm: cannot open " + path);
  f << "P6\n" << g.n << ' ' << g.n << "\n255\n";
  static const unsigned char palette[][3] = {{230, 80, 60},  {60, 120, 220}, {90, 190, 90},
                                             {240, 200, 60}, {170, 90, 200}, {60, 200, 200}};
  for (int iy = g.n - 1; iy >= 0; --iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const int l = g.at(ix, iy);
      unsigned char px[3] = {0, 0, 0};
      if (l >= 0) {
        const auto* c = palette[l % 6];
        const auto idx = static_cast<std::size_t>(iy) * g.n + ix;
        const bool imm = !atlas.immediate[static_cast<std::size_t>(l)][chart == Chart::Affine ? 0 : 1].empty() &&
                         atlas.immediate[static_cast<std::size_t>(l)][chart == Chart::Affine ? 0 : 1][idx];
        for (int k = 0; k < 3; ++k) px[k] = imm ? c[k] : static_cast<unsigned char>(c[k] * 0.6);
      }
      f.write(reinterpret_cast<const char*>(px), 3);
    }
}

namespace {
std::string csv_coord(const SpherePoint& p) {
  if (p.is_infinity()) return "inf,inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.value().real(), p.value().imag());
  return buf;
}
}  // namespace

void write_csv(const BoundarySampleSet& set, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("write_csv: cannot open " + path);
  f << "re,im,witness_i_re,witness_i_im,witness_j_re,witness_j_im\n";
  for (const auto& s : set.points)
    f << csv_coord(s.point) << ',' << csv_coord(s.witness_i) << ',' << csv_coord(s.witness_j) << '\n';
}

}  // namespace ratdyn
