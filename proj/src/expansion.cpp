#include "ratdyn/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

namespace ratdyn {

namespace {

// Indices of the samples kept after screening.
std::vector<std::size_t> screen_samples(const RationalMap& map, const BoundarySampleSet& samples,
                                        int n_max, const ScreeningOptions& opt) {
  const auto crit = critical_points(map);
  std::vector<SpherePoint> parabolic;
  for (int n = 1; n <= opt.parabolic_max_period; ++n) {
    PeriodicOptions po;
    po.classify_tol = opt.parabolic_tol;
    for (const auto& p : periodic_points(map, n, po).points)
      if (p.period == n && p.cls == CycleClass::ParabolicSuspect) parabolic.push_back(p.point);
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < samples.points.size(); ++k) {
    const SpherePoint& z = samples.points[k].point;
    for (const auto& p : parabolic)
      if (spherical_distance(z, p) < opt.critical_tol)
        throw HypothesisError("mane_check: sample " + std::to_string(k) + " at " + to_string(z) +
                              " is near the parabolic-suspect point " + to_string(p));
    if (opt.exclude_critical) {
      bool near = false;
      SpherePoint w = z;
      for (int n = 0; n < n_max && !near; ++n, w = map(w))
        for (const auto& c : crit)
          if (spherical_distance(w, c) < opt.exclusion_radius) near = true;
      if (!near) keep.push_back(k);
      continue;
    }
    for (const auto& c : crit)
      if (spherical_distance(z, c) < opt.critical_tol)
        throw HypothesisError("mane_check: sample " + std::to_string(k) + " at " + to_string(z) +
                              " is within " + std::to_string(opt.critical_tol) +
                              " of the critical point " + to_string(c));
    keep.push_back(k);
  }
  if (keep.empty()) throw HypothesisError("mane_check: every sample approaches a critical point");
  return keep;
}

}  // namespace

ExpansionReport mane_check(const RationalMap& map, const BoundarySampleSet& samples, int n_max,
                           const ScreeningOptions& screen) {
  if (samples.points.empty()) throw Error("mane_check: no samples");
  if (n_max < 1) throw Error("mane_check: n_max must be positive");
  const auto keep = screen_samples(map, samples, n_max, screen);

  const std::size_t m = keep.size();
  // prod[k][n-1] = ||(f^n)'(z_k)||
  std::vector<std::vector<double>> prod(m, std::vector<double>(static_cast<std::size_t>(n_max)));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < m; ++k) {
    SpherePoint z = samples.points[keep[k]].point;
    double p = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      p *= spherical_derivative(map, z);
      z = map(z);
      prod[k][static_cast<std::size_t>(n - 1)] = p;
    }
  }

  ExpansionReport r;
  r.samples = samples;
  for (std::size_t k = 0, i = 0; k < samples.points.size(); ++k) {
    if (i < keep.size() && keep[i] == k) ++i;
    else r.excluded.push_back(k);
  }
  for (int n = 1; n <= n_max; ++n) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) mn = std::min(mn, prod[k][static_cast<std::size_t>(n - 1)]);
    r.per_n.emplace_back(n, mn);
  }
  for (int n = n_max; n >= 1 && r.per_n[static_cast<std::size_t>(n - 1)].second > 1.0; --n) r.certified_N = n;
  return r;
}

double expansion_slope(const ExpansionReport& r, int from) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& [n, v] : r.per_n) {
    if (n < from) continue;
    const double y = std::log(v);
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
    ++cnt;
  }
  if (cnt < 2) throw Error("expansion_slope: fewer than two points");
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

DistanceExpandingReport distance_expanding_check(const RationalMap& map,
                                                 const std::vector<SpherePoint>& samples,
                                                 double lambda, double eta, int N,
                                                 std::size_t pair_budget) {
  if (!(lambda > 1.0) || !(eta > 0.0)) throw Error("distance_expanding_check: need lambda > 1, eta > 0");
  if (N < 0) throw Error("distance_expanding_check: N must be nonnegative");
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = spherical_distance(samples[i], samples[j]);
      if (d > 0.0 && d <= eta) pairs.push_back({d, i, j});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  if (pairs.size() > pair_budget) pairs.resize(pair_budget);

  std::vector<SpherePoint> img(samples.size());
#pragma omp parallel for
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SpherePoint z = samples[i];
    for (int n = 0; n < N; ++n) z = map(z);
    img[i] = z;
  }

  DistanceExpandingReport rep;
  rep.pairs_checked = pairs.size();
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const double ratio = spherical_distance(img[p.i], img[p.j]) / p.d;
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_x = samples[p.i];
      rep.worst_y = samples[p.j];
    }
  }
  rep.pass = !pairs.empty() && rep.worst_ratio >= lambda;
  return rep;
}

std::vector<NearReturn> near_returns(const RationalMap& map, const SpherePoint& z, int horizon,
                                     double alpha) {
  if (horizon < 2) throw Error("near_returns: horizon must be at least 2");
  const auto o = orbit(map, z, horizon);
  std::vector<NearReturn> out;
  for (int q = 0; q < horizon; ++q)
    for (int p = q + 1; p <= horizon; ++p) {
      const double d = spherical_distance(o[static_cast<std::size_t>(q)], o[static_cast<std::size_t>(p)]);
      if (d <= alpha) out.push_back({q, p, d});
    }
  std::stable_sort(out.begin(), out.end(), [](const NearReturn& a, const NearReturn& b) { return a.distance < b.distance; });
  return out;
}

ClosingResult closing_refine(const RationalMap& map, const SpherePoint& seed, int L) {
  if (L < 1) throw Error("closing_refine: L must be positive");
  const auto y = refine_periodic(map, seed, L, 1e-10, 200);
  if (!y) throw ConvergenceError("closing_refine: Newton on f^" + std::to_string(L) + "(z) = z from " +
                                 to_string(seed) + " did not reach residual 1e-10");
  ClosingResult r;
  r.seed = seed;
  r.L = L;
  SpherePoint img = *y;
  for (int k = 0; k < L; ++k) img = map(img);
  r.residual = spherical_distance(img, *y);
  r.refined = make_periodic_point(map, *y, minimal_period(map, *y, L, 1e-8));
  r.seed_distance = spherical_distance(seed, *y);
  return r;
}

ClosingSweep closing_sweep(const RationalMap& map, const std::vector<SpherePoint>& samples,
                           double alpha, int horizon, double max_derivative) {
  ClosingSweep sw;
  std::vector<std::optional<ClosingResult>> res(samples.size());
  std::vector<std::string> why(samples.size());
  std::vector<SpherePoint> seeds(samples.size());
  // 0 no near-return, 1 certifiable candidate, 2 only returns beyond the precision budget
  std::vector<char> kind(samples.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < samples.size(); ++k) {
    auto nr = near_returns(map, samples[k], horizon, alpha);
    if (nr.empty()) continue;
    std::stable_sort(nr.begin(), nr.end(), [](const NearReturn& a, const NearReturn& b) { return a.P - a.Q < b.P - b.Q; });
    const auto o = orbit(map, samples[k], horizon);
    kind[k] = 2;
    for (const auto& r : nr) {
      const SpherePoint& x = o[static_cast<std::size_t>(r.Q)];
      if (spherical_derivative_iterate(map, x, r.P - r.Q) > max_derivative) continue;
      if (kind[k] == 2) seeds[k] = x;
      kind[k] = 1;
      try {
        res[k] = closing_refine(map, x, r.P - r.Q);
        break;
      } catch (const Error& e) {
        if (why[k].empty()) why[k] = e.what();
      }
    }
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (kind[k] == 2) ++sw.beyond_precision;
    if (kind[k] != 1) continue;
    ++sw.seeds;
    if (res[k]) sw.results.push_back(*res[k]);
    else sw.failures.emplace_back(seeds[k], why[k]);
  }
  return sw;
}

std::string expansion_to_json(const ExpansionReport& r) {
  nlohmann::json j;
  j["per_n"] = nlohmann::json::array();
  for (const auto& [n, v] : r.per_n) j["per_n"].push_back({n, v});
  j["certified_N"] = r.certified_N ? nlohmann::json(*r.certified_N) : nlohmann::json(nullptr);
  j["samples"] = r.samples.points.size();
  j["excluded"] = r.excluded.size();
  return j.dump();
}

void write_closing_csv(const std::vector<ClosingResult>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("write_closing_csv: cannot open " + path);
  f.precision(17);
  f << "seed_re,seed_im,L,point_re,point_im,period,multiplier_re,multiplier_im,seed_distance,residual\n";
  const auto pt = [&](const SpherePoint& p) {
    if (p.is_infinity()) f << "inf,inf";
    else f << p.value().real() << ',' << p.value().imag();
  };
  for (const auto& r : rows) {
    pt(r.seed);
    f << ',' << r.L << ',';
    pt(r.refined.point);
    f << ',' << r.refined.period << ',' << r.refined.multiplier.real() << ',' << r.refined.multiplier.imag()
      << ',' << r.seed_distance << ',' << r.residual << '\n';
  }
}

}  // namespace ratdyn
