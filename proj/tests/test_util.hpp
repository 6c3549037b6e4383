#pragma once

#include <complex>
#include <random>

#include "ratdyn/sphere.hpp"

namespace ratdyn::testing {

inline RationalMap random_map(std::mt19937_64& rng, int degree) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Poly p(static_cast<std::size_t>(degree) + 1), q(static_cast<std::size_t>(degree) + 1);
    for (auto& c : p) c = {g(rng), g(rng)};
    for (auto& c : q) c = {g(rng), g(rng)};
    try {
      return RationalMap(p, q);
    } catch (const Error&) {
    }
  }
}

inline cd random_point(std::mt19937_64& rng, double radius = 2.0) {
  std::uniform_real_distribution<double> u(-radius, radius);
  return {u(rng), u(rng)};
}

}  // namespace ratdyn::testing
