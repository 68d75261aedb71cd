#pragma once

#include "surfenv/surfenv.hpp"

#include <numbers>

namespace surfenv::testing {

inline Vec v2(double a, double b) { return Vec(Vec2(a, b)); }

inline Density aniso13() { return Density::weighted_aniso({1.0, 3.0}); }

// |λ| T(angle λ) with T = 3 on the diagonal directions and 1 elsewhere on
// the grid; f(e1+e2) = 3√2 > f(e1) + f(e2) = 2.
inline Density bumped_table() {
  TabulatedTable t;
  for (int i = 0; i < 8; ++i) {
    t.lambda_angles.push_back(i * std::numbers::pi / 4);
    const double v = (i == 1 || i == 5) ? 3.0 : 1.0;
    t.values.push_back({v, v});
  }
  t.eta_angles = {0.0, std::numbers::pi};
  return Density::tabulated(std::move(t));
}

// |λ| g(η) with g = 1 + cos(4θ)/2, whose 1-homogeneous extension is not
// convex (g + g'' < 0 at θ = 0).
inline Density wavy_product() {
  json g = {{"type", "fourier"}, {"a0", 1.0}, {"terms", {{{"m", 4}, {"a", 0.5}}}}};
  return density_from_json({{"dimension", 2}, {"kind", "product-norm"}, {"params", {{"g", g}}}});
}

}  // namespace surfenv::testing
