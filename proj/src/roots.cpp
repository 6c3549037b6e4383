#include "ratdyn/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ratdyn {

namespace {

// p(z)/p'(z), evaluated on the reversed polynomial outside the unit disk to avoid overflow.
cd explicit_correction(std::span<const cd> p, std::span<const cd> rev, cd z) {
  const int n = static_cast<int>(p.size()) - 1;
  if (std::abs(z) <= 1.0) {
    auto [v, dv] = poly::eval_with_derivative(p, z);
    return v / dv;
  }
  const cd w = 1.0 / z;
  auto [r, dr] = poly::eval_with_derivative(rev, w);
  return z / (static_cast<double>(n) - w * dr / r);
}

double backward_error(std::span<const cd> p, cd z) {
  double scale = 0.0;
  double az = std::abs(z);
  double pw = 1.0;
  for (const auto& c : p) {
    scale += std::abs(c) * pw;
    pw *= az;
  }
  return scale > 0.0 ? std::abs(poly::eval(p, z)) / scale : 0.0;
}

}  // namespace

AberthResult aberth_implicit(const NewtonCorrection& correction, std::vector<cd> initial,
                             int max_iterations, double step_tol) {
  AberthResult out;
  const std::size_t n = initial.size();
  out.roots = std::move(initial);
  out.converged.assign(n, false);
  std::vector<double> prev(n, std::numeric_limits<double>::infinity());
  auto& z = out.roots;
  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    bool active = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (out.converged[k]) continue;
      active = true;
      const cd corr = correction(z[k]);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) {
        // Exactly on a critical point of p; nudge.
        z[k] += cd(1e-7, 1e-7) * std::max(1.0, std::abs(z[k]));
        continue;
      }
      cd sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        const cd diff = z[k] - z[j];
        if (diff != cd(0.0)) sum += 1.0 / diff;
      }
      const cd w = corr / (1.0 - corr * sum);
      z[k] -= w;
      const double step = std::abs(w);
      const double scale = std::max(std::abs(z[k]), 1e-30);
      if (step <= step_tol * scale || (step <= 1e-11 * scale && step > 0.5 * prev[k]))
        out.converged[k] = true;
      prev[k] = step;
    }
    if (!active) break;
  }
  return out;
}

PolyRoots find_roots(std::span<const cd> coeffs, const RootOptions& opts) {
  const int deg = poly::degree(coeffs);
  if (deg < 1) throw Error("find_roots: degree must be at least 1");
  Poly p(coeffs.begin(), coeffs.begin() + deg + 1);

  PolyRoots out;
  std::size_t zeros = 0;
  while (p[zeros] == cd(0.0)) ++zeros;
  out.roots.assign(zeros, cd(0.0));
  Poly q(p.begin() + static_cast<std::ptrdiff_t>(zeros), p.end());
  const int n = static_cast<int>(q.size()) - 1;

  if (n == 1) {
    out.roots.push_back(-q[0] / q[1]);
  } else if (n == 2) {
    const cd disc = std::sqrt(q[1] * q[1] - 4.0 * q[2] * q[0]);
    const cd sgn = std::real(std::conj(q[1]) * disc) >= 0.0 ? cd(1.0) : cd(-1.0);
    const cd big = -(q[1] + sgn * disc) / 2.0;
    const cd r1 = big / q[2];
    const cd r2 = big != cd(0.0) ? q[0] / big : cd(0.0);
    out.roots.push_back(r1);
    out.roots.push_back(r2);
  } else if (n > 2) {
    Poly rev(q.rbegin(), q.rend());
    const double radius = std::pow(std::abs(q[0]) / std::abs(q[n]), 1.0 / n);
    std::vector<cd> init(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double ang = 2.0 * std::numbers::pi * k / n + 0.4;
      // Slightly perturbed radii break symmetric stalls.
      init[static_cast<std::size_t>(k)] = std::polar(radius * (1.0 + 0.01 * (k % 3)), ang);
    }
    auto res = aberth_implicit(
        [&](cd z) { return explicit_correction(q, rev, z); }, std::move(init),
        opts.max_iterations);
    out.iterations = res.iterations;
    for (auto& r : res.roots) out.roots.push_back(r);
  }

  // Newton polish, accepted only if the backward error improves.
  for (auto& r : out.roots) {
    for (int s = 0; s < 2; ++s) {
      auto [v, dv] = poly::eval_with_derivative(p, r);
      if (dv == cd(0.0)) break;
      const cd cand = r - v / dv;
      if (backward_error(p, cand) < backward_error(p, r)) r = cand; else break;
    }
  }

  double worst = 0.0;
  for (const auto& r : out.roots) worst = std::max(worst, backward_error(p, r));
  if (worst > opts.accept_backward_error)
    throw ConvergenceError("find_roots: iteration cap exceeded (backward error " +
                           std::to_string(worst) + ")");

  // Multiplicity clusters, replaced by their centroid.
  const std::size_t m = out.roots.size();
  out.multiplicity.assign(m, 1);
  std::vector<int> cluster(m, -1);
  int next = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = next;
    std::vector<std::size_t> members{i};
    for (std::size_t j = i + 1; j < m; ++j) {
      if (cluster[j] >= 0) continue;
      const double rad = opts.cluster_radius * std::max(1.0, std::abs(out.roots[i]));
      if (std::abs(out.roots[i] - out.roots[j]) < rad) {
        cluster[j] = next;
        members.push_back(j);
      }
    }
    if (members.size() > 1) {
      cd mean = 0.0;
      for (auto j : members) mean += out.roots[j];
      mean /= static_cast<double>(members.size());
      for (auto j : members) {
        out.roots[j] = mean;
        out.multiplicity[j] = static_cast<int>(members.size());
      }
    }
    ++next;
  }

  for (const auto& r : out.roots) out.residual = std::max(out.residual, std::abs(poly::eval(p, r)));
  return out;
}

}  // namespace ratdyn
