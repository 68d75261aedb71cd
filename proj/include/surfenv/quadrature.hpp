#pragma once

// Adaptive composite 7-point Gauss–Legendre on [a, b]. A panel is accepted
// when the one-panel and two-half-panel values agree to the local share of
// the tolerance; the discrepancy is the reported error estimate.

#include "surfenv/core.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <functional>
#include <vector>

namespace surfenv {

struct QuadratureResult {
  double value = 0.0;
  double error_bound = 0.0;
  int panels = 0;
  // Composite midpoint <= value <= composite trapezoid (what convexity of
  // the integrand implies), checked panel by panel.
  bool convexity_bracket = true;
};

struct QuadratureOptions {
  double tol = 1e-8;  // relative to max(1, |value|)
  int max_depth = 40;
};

namespace detail {

inline double gl7(const std::function<double(double)>& g, double a, double b) {
  return boost::math::quadrature::gauss<double, 7>::integrate(g, a, b);
}

struct Panel {
  double a, b, whole;
  int depth;
};

}  // namespace detail

/// ∫_a^b g, with optional interior breakpoints (kinks) split off first.
inline QuadratureResult integrate_adaptive(const std::function<double(double)>& g,
                                           double a, double b,
                                           std::vector<double> breaks = {},
                                           const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (!(b > a)) return out;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double t : breaks)
    if (t > pts.back() + 1e-14 * (b - a) && t < b - 1e-14 * (b - a)) pts.push_back(t);
  pts.push_back(b);

  std::vector<detail::Panel> stack;
  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double w = detail::gl7(g, pts[i], pts[i + 1]);
    coarse += w;
    stack.push_back({pts[i], pts[i + 1], w, 0});
  }
  const double target = opt.tol * std::max(1.0, std::abs(coarse));
  const double length = b - a;

  // Depth-first, left to right, so the summation order is fixed.
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    const auto p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double left = detail::gl7(g, p.a, m);
    const double right = detail::gl7(g, m, p.b);
    const double err = std::abs(p.whole - (left + right));
    const double allowed = target * (p.b - p.a) / length;
    if (err <= allowed || err <= 1e-15 * std::abs(left + right)) {
      out.value += left + right;
      out.error_bound += err;
      ++out.panels;
      const double h = p.b - p.a;
      const double mid = h * g(m);
      const double trap = 0.5 * h * (g(p.a) + g(p.b));
      const double slack = 1e-12 * std::max(1.0, std::abs(trap));
      if (left + right < mid - slack || left + right > trap + slack)
        out.convexity_bracket = false;
      continue;
    }
    if (p.depth + 1 > opt.max_depth)
      throw Error(ErrorKind::quadrature_failure,
                  "adaptive quadrature did not reach the tolerance within the "
                  "subdivision limit");
    stack.push_back({m, p.b, right, p.depth + 1});
    stack.push_back({p.a, m, left, p.depth + 1});
  }
  return out;
}

}  // namespace surfenv
