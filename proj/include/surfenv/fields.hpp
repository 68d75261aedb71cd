#pragma once

// Piecewise-rigid fields on convex-polygon partitions of the unit square
// Q_η (two dimensions) and their surface energy ∫_{J_u} f([u], ν_u) dH¹.
//
// Cell vertices live in the frame of Q_η: y ∈ [-1/2, 1/2]², with y₂ the
// coordinate along η. World points are x = Q y with Q = frame_rotation(η),
// and a cell carries u(x) = s J x + b in world coordinates. Every edge lies
// on a supporting line n·y = c with a canonical normal n; along it the
// direction is d = -J n, so n points to the left of d and the left cell is
// the "+" side: [u] = u_left - u_right, ν = Q n.

#include "surfenv/density.hpp"
#include "surfenv/geometry.hpp"
#include "surfenv/quadrature.hpp"

#include <iomanip>
#include <map>
#include <sstream>

namespace surfenv {

struct RigidCell {
  Polygon vertices;  // counterclockwise, frame coordinates
  double spin = 0.0;
  Vec2 offset = Vec2::Zero();

  Vec2 value_world(const Vec2& x) const {
    return spin * (rotation_generator() * x) + offset;
  }
};

/// A shared or boundary piece of the partition skeleton (frame coordinates).
struct SkeletonSegment {
  Vec2 p, q;
  Vec2 normal;  // canonical line normal n; left of p→q
  int left = -1;   // cell on the +n side, -1 outside the square
  int right = -1;  // cell on the -n side
  bool boundary = false;
};

struct PartitionField {
  std::vector<RigidCell> cells;
  Vec2 eta = Vec2(0.0, 1.0);
  Vec2 lambda = Vec2::Zero();
  bool admissible = true;
  std::string admissibility_note;
  std::vector<SkeletonSegment> skeleton;

  Mat2 frame() const { return frame_rotation(eta); }
  Vec2 to_world(const Vec2& y) const { return frame() * y; }
  Vec2 value(std::size_t cell, const Vec2& y) const {
    return cells[cell].value_world(to_world(y));
  }
  /// u_{λ,η} at a frame point.
  Vec2 boundary_value(const Vec2& y) const {
    return y.y() >= 0.0 ? lambda : Vec2::Zero().eval();
  }
};

struct PartitionOptions {
  bool require_admissible = true;
  double area_tol = 1e-10;
  double min_cell_area = 1e-14;
};

namespace detail {

inline constexpr double kAngleTol = 1e-10;
inline constexpr double kOffsetTol = 1e-11;
inline constexpr double kBreakTol = 1e-12;
inline constexpr double kSquareTol = 1e-9;

struct EdgeRecord {
  int cell;
  bool cell_left;
  Vec2 a, b;
  Vec2 normal;
  double angle;
  double offset = 0.0;
};

inline void partition_error(const std::string& what) {
  throw Error(ErrorKind::invalid_partition, what);
}

// Splits every supporting line into elementary intervals, checks that each
// is covered exactly once from each side (once from inside on ∂Q), and
// merges runs with the same cell pair.
inline std::vector<SkeletonSegment> build_skeleton(const std::vector<RigidCell>& cells) {
  std::vector<EdgeRecord> recs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& poly = cells[c].vertices;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
      const Vec2 a = poly[i], b = poly[(i + 1) % n];
      const Vec2 dir = b - a;
      const double len = dir.norm();
      if (len <= 1e-15) continue;
      Vec2 out(dir.y() / len, -dir.x() / len);  // outward for CCW
      bool left = false;
      if (out.y() < -1e-12 || (std::abs(out.y()) <= 1e-12 && out.x() < 0.0)) {
        out = -out;
        left = true;  // cell lies on the +n side
      }
      recs.push_back({static_cast<int>(c), left, a, b, out,
                      std::atan2(out.y(), out.x())});
    }
  }
  std::sort(recs.begin(), recs.end(), [](const auto& x, const auto& y) {
    return x.angle < y.angle;
  });

  std::vector<SkeletonSegment> out;
  std::size_t i = 0;
  while (i < recs.size()) {
    std::size_t j = i + 1;
    while (j < recs.size() && recs[j].angle - recs[j - 1].angle <= kAngleTol) ++j;
    // [i, j) share a direction; use the first record's normal for all.
    const Vec2 n = recs[i].normal;
    for (std::size_t r = i; r < j; ++r)
      recs[r].offset = 0.5 * (n.dot(recs[r].a) + n.dot(recs[r].b));
    std::sort(recs.begin() + static_cast<std::ptrdiff_t>(i),
              recs.begin() + static_cast<std::ptrdiff_t>(j),
              [](const auto& x, const auto& y) { return x.offset < y.offset; });
    std::size_t s = i;
    while (s < j) {
      std::size_t e = s + 1;
      while (e < j && recs[e].offset - recs[e - 1].offset <= kOffsetTol) ++e;
      // [s, e) lie on one line.
      double c = 0.0;
      for (std::size_t r = s; r < e; ++r) c += recs[r].offset;
      c /= static_cast<double>(e - s);
      const Vec2 d(n.y(), -n.x());  // -J n
      struct Interval {
        double t0, t1;
        int cell;
        bool left;
      };
      std::vector<Interval> ivs;
      std::vector<double> ts;
      for (std::size_t r = s; r < e; ++r) {
        double t0 = d.dot(recs[r].a), t1 = d.dot(recs[r].b);
        if (t0 > t1) std::swap(t0, t1);
        ivs.push_back({t0, t1, recs[r].cell, recs[r].cell_left});
        ts.push_back(t0);
        ts.push_back(t1);
      }
      std::sort(ts.begin(), ts.end());
      std::vector<double> brk;
      for (double t : ts)
        if (brk.empty() || t - brk.back() > kBreakTol) brk.push_back(t);
      auto index_of = [&](double t) {
        auto it = std::lower_bound(brk.begin(), brk.end(), t - kBreakTol);
        return static_cast<std::size_t>(it - brk.begin());
      };
      const std::size_t slots = brk.size() > 0 ? brk.size() - 1 : 0;
      std::vector<std::vector<int>> lefts(slots), rights(slots);
      for (const auto& iv : ivs) {
        const std::size_t a = index_of(iv.t0), b = index_of(iv.t1);
        for (std::size_t k = a; k < b && k < slots; ++k)
          (iv.left ? lefts[k] : rights[k]).push_back(iv.cell);
      }
      const bool axis = std::abs(std::abs(n.x()) - 1.0) <= 1e-12 ||
                        std::abs(std::abs(n.y()) - 1.0) <= 1e-12;
      const bool on_boundary = axis && std::abs(std::abs(c) - 0.5) <= kSquareTol;

      auto point = [&](double t) -> Vec2 { return c * n + t * d; };
      SkeletonSegment run;
      bool open = false;
      double run_end = 0.0;
      for (std::size_t k = 0; k < slots; ++k) {
        if (brk[k + 1] - brk[k] <= kBreakTol) continue;
        const auto& L = lefts[k];
        const auto& R = rights[k];
        if (L.empty() && R.empty()) {
          if (open) out.push_back(run);
          open = false;
          continue;
        }
        if (L.size() > 1 || R.size() > 1)
          partition_error("overlap: more than one cell on one side of the segment near " +
                          std::to_string(point(0.5 * (brk[k] + brk[k + 1])).x()) + ", " +
                          std::to_string(point(0.5 * (brk[k] + brk[k + 1])).y()));
        int l = L.empty() ? -1 : L[0];
        int r = R.empty() ? -1 : R[0];
        if (on_boundary) {
          const bool outward_plus = c > 0.0;  // the +n side is outside Q
          if ((outward_plus && l >= 0) || (!outward_plus && r >= 0))
            partition_error("cell extends outside the unit square");
        } else if (l < 0 || r < 0) {
          partition_error("gap: segment near " +
                          std::to_string(point(0.5 * (brk[k] + brk[k + 1])).x()) + ", " +
                          std::to_string(point(0.5 * (brk[k] + brk[k + 1])).y()) +
                          " has a cell on one side only");
        }
        if (open && run.left == l && run.right == r &&
            std::abs(run_end - brk[k]) <= kBreakTol) {
          run.q = point(brk[k + 1]);
          run_end = brk[k + 1];
          continue;
        }
        if (open) out.push_back(run);
        run = {point(brk[k]), point(brk[k + 1]), n, l, r, on_boundary};
        run_end = brk[k + 1];
        open = true;
      }
      if (open) out.push_back(run);
      s = e;
    }
    i = j;
  }
  return out;
}

inline bool check_admissibility(const PartitionField& f, std::string& note) {
  const double tol = 1e-9 * std::max(1.0, f.lambda.norm());
  for (const auto& seg : f.skeleton) {
    if (!seg.boundary) continue;
    const int cell = seg.left >= 0 ? seg.left : seg.right;
    std::vector<std::pair<Vec2, Vec2>> pieces;
    const double yp = seg.p.y(), yq = seg.q.y();
    if ((yp < 0.0 && yq > 0.0) || (yp > 0.0 && yq < 0.0)) {
      const Vec2 m = seg.p + (yp / (yp - yq)) * (seg.q - seg.p);
      pieces = {{seg.p, m}, {m, seg.q}};
    } else {
      pieces = {{seg.p, seg.q}};
    }
    for (const auto& [a, b] : pieces) {
      const Vec2 mid = 0.5 * (a + b);
      const Vec2 want = f.boundary_value(mid);
      for (const Vec2& y : {a, b, mid}) {
        if ((f.value(static_cast<std::size_t>(cell), y) - want).norm() > tol) {
          std::ostringstream os;
          os << "boundary mismatch: cell " << cell << " differs from u_{lambda,eta} at ("
             << y.x() << ", " << y.y() << ")";
          note = os.str();
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace detail

/// Validates a tiling of Q_η by convex cells and computes admissibility.
inline PartitionField build_partition(std::vector<RigidCell> cells, const Vec2& eta,
                                      const Vec2& lambda,
                                      const PartitionOptions& opt = {}) {
  require(std::abs(eta.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
          "build_partition: eta must be a unit vector");
  require(cells.size() > 0, ErrorKind::invalid_partition,
          "build_partition: no cells");
  double area = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& poly = cells[c].vertices;
    poly = dedupe(std::move(poly));
    if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    const std::string id = "cell " + std::to_string(c);
    if (poly.size() < 3 || signed_area(poly) <= opt.min_cell_area)
      detail::partition_error(id + " is degenerate (area <= " +
                              std::to_string(opt.min_cell_area) + ")");
    if (!is_convex_ccw(poly))
      detail::partition_error(id + " is not convex");
    for (const auto& v : poly)
      if (std::abs(v.x()) > 0.5 + detail::kSquareTol ||
          std::abs(v.y()) > 0.5 + detail::kSquareTol)
        detail::partition_error(id + " has a vertex outside the unit square");
    area += signed_area(poly);
  }
  if (area < 1.0 - opt.area_tol)
    detail::partition_error("gap: cell areas sum to " + std::to_string(area) + " < 1");
  if (area > 1.0 + opt.area_tol)
    detail::partition_error("overlap: cell areas sum to " + std::to_string(area) + " > 1");

  PartitionField f;
  f.cells = std::move(cells);
  f.eta = eta;
  f.lambda = lambda;
  f.skeleton = detail::build_skeleton(f.cells);
  f.admissible = detail::check_admissibility(f, f.admissibility_note);
  if (opt.require_admissible && !f.admissible)
    throw Error(ErrorKind::invalid_partition, f.admissibility_note);
  return f;
}

/// Convex cells carrying u_{λ,η} on the square minus the given holes.
inline std::vector<RigidCell> elementary_background(const Vec2& eta, const Vec2& lambda,
                                                    const std::vector<Polygon>& upper_holes,
                                                    const std::vector<Polygon>& lower_holes = {}) {
  (void)eta;
  std::vector<RigidCell> cells;
  for (auto& p : rectangle_minus_convex(-0.5, 0.5, 0.0, 0.5, upper_holes))
    cells.push_back({std::move(p), 0.0, lambda});
  for (auto& p : rectangle_minus_convex(-0.5, 0.5, -0.5, 0.0, lower_holes))
    cells.push_back({std::move(p), 0.0, Vec2::Zero()});
  return cells;
}

/// u_{λ,η}: λ on {x·η >= 0}, 0 elsewhere.
inline PartitionField elementary_jump_field(const Vec2& lambda, const Vec2& eta) {
  return build_partition(elementary_background(eta, lambda, {}), eta, lambda);
}

// ---------------------------------------------------------------------------
// Jump set

struct JumpEdge {
  Vec2 p, q;      // world endpoints
  Vec2 normal;    // ν (world), pointing into the left cell
  int left = -1, right = -1;
  Vec2 jump_p, jump_q;  // [u] = u_left - u_right at p and q

  double length() const { return (q - p).norm(); }
  Vec2 jump_at(double t) const { return (1.0 - t) * jump_p + t * jump_q; }
};

inline std::vector<JumpEdge> extract_jump_edges(const PartitionField& f) {
  const auto skeleton = f.skeleton.empty() && !f.cells.empty()
                            ? detail::build_skeleton(f.cells)
                            : f.skeleton;
  const Mat2 Q = f.frame();
  const double tol = 1e-12 * std::max(1.0, f.lambda.norm());
  std::vector<JumpEdge> edges;
  for (const auto& s : skeleton) {
    if (s.boundary || s.left < 0 || s.right < 0) continue;
    const auto& L = f.cells[static_cast<std::size_t>(s.left)];
    const auto& R = f.cells[static_cast<std::size_t>(s.right)];
    const Vec2 p = Q * s.p, q = Q * s.q, m = 0.5 * (p + q);
    const Vec2 jp = L.value_world(p) - R.value_world(p);
    const Vec2 jq = L.value_world(q) - R.value_world(q);
    const Vec2 jm = L.value_world(m) - R.value_world(m);
    if (jp.norm() <= tol && jq.norm() <= tol && jm.norm() <= tol) continue;
    edges.push_back({p, q, (Q * s.normal).normalized(), s.left, s.right, jp, jq});
  }
  std::sort(edges.begin(), edges.end(), [](const JumpEdge& a, const JumpEdge& b) {
    const Vec2 ma = 0.5 * (a.p + a.q), mb = 0.5 * (b.p + b.q);
    if (ma.x() != mb.x()) return ma.x() < mb.x();
    if (ma.y() != mb.y()) return ma.y() < mb.y();
    return a.p.x() < b.p.x();
  });
  return edges;
}

// ---------------------------------------------------------------------------
// Energies

struct EdgeEnergy {
  double energy = 0.0;
  double error_bound = 0.0;
  bool exact = false;
  bool convexity_bracket = true;
};

struct EnergyBreakdown {
  std::vector<EdgeEnergy> per_edge;  // in extract_jump_edges order
  std::vector<JumpEdge> edges;
  double total = 0.0;
  double quadrature_error_bound = 0.0;
  bool convexity_bracket = true;
};

/// ∫₀^L f(jump(t), ν) dt: exact for a constant jump, otherwise adaptive
/// Gauss–Legendre with the zero of the affine jump split off.
inline EdgeEnergy edge_energy(const Density& d, const JumpEdge& e, double tol = 1e-8) {
  require(d.dimension() == 2, ErrorKind::dimension_mismatch,
          "edge_energy: fields are two-dimensional");
  const Vec2 nu = e.normal;
  require(std::abs(nu.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
          "edge_energy: edge normal is not a unit vector");
  const double L = e.length();
  EdgeEnergy out;
  const Vec2 delta = e.jump_q - e.jump_p;
  const double scale = std::max({e.jump_p.norm(), e.jump_q.norm(), 1e-300});
  if (delta.norm() <= 1e-14 * scale) {
    out.energy = L * d.unchecked(as_span(e.jump_p), as_span(nu));
    out.exact = true;
    return out;
  }
  auto g = [&](double t) {
    const Vec2 j = e.jump_at(t);
    return d.unchecked(as_span(j), as_span(nu));
  };
  std::vector<double> breaks;
  const double tstar = -e.jump_p.dot(delta) / delta.squaredNorm();
  if (tstar > 0.0 && tstar < 1.0) breaks.push_back(tstar);
  QuadratureOptions qo;
  qo.tol = tol;
  const auto r = integrate_adaptive(g, 0.0, 1.0, breaks, qo);
  out.energy = L * r.value;
  out.error_bound = L * r.error_bound;
  out.convexity_bracket = r.convexity_bracket;
  return out;
}

inline EnergyBreakdown total_energy(const Density& d, const PartitionField& f,
                                    double tol = 1e-8) {
  EnergyBreakdown out;
  out.edges = extract_jump_edges(f);
  out.per_edge.reserve(out.edges.size());
  for (const auto& e : out.edges) {
    const auto ee = edge_energy(d, e, tol);
    out.total += ee.energy;
    out.quadrature_error_bound += ee.error_bound;
    out.convexity_bracket = out.convexity_bracket && ee.convexity_bracket;
    out.per_edge.push_back(ee);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(const PartitionField& f) {
  json cells = json::array();
  for (const auto& c : f.cells) {
    json verts = json::array();
    for (const auto& v : c.vertices) verts.push_back({v.x(), v.y()});
    cells.push_back({{"vertices", verts},
                     {"spin", c.spin},
                     {"offset", {c.offset.x(), c.offset.y()}}});
  }
  return {{"eta", {f.eta.x(), f.eta.y()}},
          {"lambda", {f.lambda.x(), f.lambda.y()}},
          {"cells", cells}};
}

namespace detail {

inline Vec2 vec2_from_json(const json& j, const std::string& where) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          ErrorKind::parse_error, where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline PartitionField field_from_json(const json& j, const PartitionOptions& opt = {}) {
  require(j.is_object(), ErrorKind::parse_error, "field: expected an object");
  const Vec2 eta = detail::vec2_from_json(detail::field_of(j, "eta", "field"), "field.eta");
  const Vec2 lambda =
      detail::vec2_from_json(detail::field_of(j, "lambda", "field"), "field.lambda");
  const json& cj = detail::field_of(j, "cells", "field");
  require(cj.is_array(), ErrorKind::parse_error, "field.cells: expected an array");
  std::vector<RigidCell> cells;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string where = "field.cells[" + std::to_string(i) + "]";
    RigidCell c;
    const json& vj = detail::field_of(cj[i], "vertices", where.c_str());
    require(vj.is_array(), ErrorKind::parse_error, where + ".vertices: expected an array");
    for (std::size_t k = 0; k < vj.size(); ++k)
      c.vertices.push_back(detail::vec2_from_json(
          vj[k], where + ".vertices[" + std::to_string(k) + "]"));
    const json& sj = detail::field_of(cj[i], "spin", where.c_str());
    require(sj.is_number(), ErrorKind::parse_error, where + ".spin: expected a number");
    c.spin = sj.get<double>();
    c.offset = detail::vec2_from_json(detail::field_of(cj[i], "offset", where.c_str()),
                                      where + ".offset");
    cells.push_back(std::move(c));
  }
  return build_partition(std::move(cells), eta, lambda, opt);
}

inline json to_json(const EnergyBreakdown& b) {
  json rows = json::array();
  for (std::size_t i = 0; i < b.per_edge.size(); ++i)
    rows.push_back({{"id", i},
                    {"energy", b.per_edge[i].energy},
                    {"error_bound", b.per_edge[i].error_bound}});
  return {{"per_edge", rows},
          {"total", b.total},
          {"quadrature_error_bound", b.quadrature_error_bound},
          {"edge_count", b.edges.size()},
          {"convexity_bracket", b.convexity_bracket}};
}

inline std::string energy_csv(const EnergyBreakdown& b) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "id,px,py,qx,qy,nu_x,nu_y,jump_px,jump_py,jump_qx,jump_qy,length,energy,"
        "error_bound\n";
  for (std::size_t i = 0; i < b.edges.size(); ++i) {
    const auto& e = b.edges[i];
    os << i << ',' << e.p.x() << ',' << e.p.y() << ',' << e.q.x() << ',' << e.q.y()
       << ',' << e.normal.x() << ',' << e.normal.y() << ',' << e.jump_p.x() << ','
       << e.jump_p.y() << ',' << e.jump_q.x() << ',' << e.jump_q.y() << ','
       << e.length() << ',' << b.per_edge[i].energy << ','
       << b.per_edge[i].error_bound << '\n';
  }
  return os.str();
}

}  // namespace surfenv
