#pragma once

// Convex polygons in the plane: clipping, slicing, and the decomposition of
// a rectangle with convex holes into convex pieces.

#include "surfenv/core.hpp"

#include <algorithm>
#include <vector>

namespace surfenv {

using Polygon = std::vector<Vec2>;

inline double signed_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i)
    a += cross(p[i], p[(i + 1) % n]);
  return 0.5 * a;
}

inline Vec2 centroid(const Polygon& p) {
  const double a = signed_area(p);
  Vec2 c = Vec2::Zero();
  if (std::abs(a) < 1e-300) {
    for (const auto& v : p) c += v;
    return c / static_cast<double>(std::max<std::size_t>(p.size(), 1));
  }
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % n];
    c += (u + v) * cross(u, v);
  }
  return c / (6.0 * a);
}

inline Polygon rectangle(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Drops consecutive vertices closer than tol (cyclically).
inline Polygon dedupe(Polygon p, double tol = 1e-15) {
  Polygon out;
  for (const auto& v : p)
    if (out.empty() || (v - out.back()).norm() > tol) out.push_back(v);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol)
    out.pop_back();
  return out;
}

/// Counterclockwise and convex, with collinear vertices allowed.
inline bool is_convex_ccw(const Polygon& p, double tol = 1e-12) {
  const std::size_t n = p.size();
  if (n < 3 || signed_area(p) <= 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = p[(i + 1) % n] - p[i];
    const Vec2 b = p[(i + 2) % n] - p[(i + 1) % n];
    const double scale = std::max(a.norm() * b.norm(), 1e-300);
    if (cross(a, b) < -tol * scale) return false;
  }
  return true;
}

/// Sutherland–Hodgman step: the part of p with n·y <= c.
inline Polygon clip_halfplane(const Polygon& p, const Vec2& n, double c) {
  Polygon out;
  const std::size_t m = p.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % m];
    const double da = n.dot(a) - c, db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return dedupe(std::move(out));
}

/// The part of p with lo <= n·y <= hi.
inline Polygon clip_slab(const Polygon& p, const Vec2& n, double lo, double hi) {
  return clip_halfplane(clip_halfplane(p, n, hi), -n, -lo);
}

/// Cuts a convex polygon along the lines n·y = m·spacing, m integer; pieces
/// come out in increasing order of n·y. Lines within tol of the polygon's
/// extent do not cut.
inline std::vector<Polygon> slice_by_levels(const Polygon& p, const Vec2& n,
                                            double spacing, double tol = 1e-13) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : p) {
    lo = std::min(lo, n.dot(v));
    hi = std::max(hi, n.dot(v));
  }
  std::vector<double> cuts;
  for (auto m = static_cast<long long>(std::floor(lo / spacing));
       static_cast<double>(m) * spacing <= hi; ++m) {
    const double c = static_cast<double>(m) * spacing;
    if (c > lo + tol && c < hi - tol) cuts.push_back(c);
  }
  if (cuts.empty()) return {p};
  std::vector<Polygon> out;
  double a = lo - 1.0;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    const double b = i < cuts.size() ? cuts[i] : hi + 1.0;
    Polygon piece = clip_slab(p, n, a, b);
    if (piece.size() >= 3 && signed_area(piece) > 0.0) out.push_back(std::move(piece));
    a = b;
  }
  return out;
}

/// Vertical-slab decomposition of the axis-parallel rectangle minus a set of
/// pairwise disjoint convex holes contained in it. Pieces are convex
/// trapezoids (or triangles), counterclockwise, ordered by slab then height.
inline std::vector<Polygon> rectangle_minus_convex(double x0, double x1, double y0,
                                                   double y1,
                                                   const std::vector<Polygon>& holes,
                                                   double min_area = 1e-15) {
  std::vector<double> xs{x0, x1};
  for (const auto& h : holes)
    for (const auto& v : h) xs.push_back(std::clamp(v.x(), x0, x1));
  std::sort(xs.begin(), xs.end());
  std::vector<double> breaks;
  for (double x : xs)
    if (breaks.empty() || x - breaks.back() > 1e-12) breaks.push_back(x);

  struct Range {
    double lo_a, lo_b, hi_a, hi_b;
  };
  // Vertical extent of a convex polygon whose vertices all lie on x = xa or
  // x = xb; a single vertex on a side gives a degenerate extent there.
  auto extent = [](const Polygon& q, double xa, double xb) {
    Range r{1e300, 1e300, -1e300, -1e300};
    for (const auto& v : q) {
      if (std::abs(v.x() - xa) <= std::abs(v.x() - xb)) {
        r.lo_a = std::min(r.lo_a, v.y());
        r.hi_a = std::max(r.hi_a, v.y());
      } else {
        r.lo_b = std::min(r.lo_b, v.y());
        r.hi_b = std::max(r.hi_b, v.y());
      }
    }
    return r;
  };

  std::vector<Polygon> out;
  const Vec2 ex(1.0, 0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double xa = breaks[s], xb = breaks[s + 1];
    std::vector<Range> inside;
    for (const auto& h : holes) {
      Polygon q = clip_slab(h, ex, xa, xb);
      if (q.size() < 3 || signed_area(q) <= 0.0) continue;
      const Range r = extent(q, xa, xb);
      if (r.lo_a > r.hi_a || r.lo_b > r.hi_b) continue;
      inside.push_back(r);
    }
    std::sort(inside.begin(), inside.end(), [](const Range& a, const Range& b) {
      return a.lo_a + a.lo_b < b.lo_a + b.lo_b;
    });
    double ba = y0, bb = y0;
    auto emit = [&](double ta, double tb) {
      Polygon piece = dedupe({{xa, ba}, {xb, bb}, {xb, tb}, {xa, ta}});
      if (piece.size() >= 3 && signed_area(piece) > min_area)
        out.push_back(std::move(piece));
    };
    for (const auto& r : inside) {
      emit(r.lo_a, r.lo_b);
      ba = r.hi_a;
      bb = r.hi_b;
    }
    emit(y1, y1);
  }
  return out;
}

}  // namespace surfenv
