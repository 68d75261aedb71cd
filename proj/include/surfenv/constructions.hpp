#pragma once

// Competitor families with closed-form energies in k, their limits, and (in
// two dimensions) the realizing piecewise-rigid fields.

#include "surfenv/envelope.hpp"
#include "surfenv/fields.hpp"

#include <optional>

namespace surfenv {

struct EnergyTerm {
  std::string name;
  double value = 0.0;        // one copy
  double multiplicity = 1.0;  // number of copies
  bool exact = true;          // false: an upper bound

  double total() const { return value * multiplicity; }
};

class Construction {
 public:
  using Breakdown = std::function<std::vector<EnergyTerm>(int)>;

  Construction(std::string name, Density density) : name(std::move(name)), density(std::move(density)) {}

  std::string name;
  Density density;
  Vec lambda, eta;
  std::vector<std::pair<std::string, Vec>> parameters;  // auxiliary vectors
  int k = 0;
  double reference = 0.0;  // energy of the flat jump being competed with
  double limit = 0.0;
  bool exact = true;  // closed form exact (true) or an upper bound
  // closed_form = field_energy_scale × energy of the field
  double field_energy_scale = 1.0;
  double rate_constant = 0.0;  // max k |closed_form(k) - limit| over k ∈ {8,16,32,64}
  std::optional<PartitionField> field;
  std::string field_note;

  std::vector<EnergyTerm> breakdown(int kk) const { return breakdown_(kk); }
  double closed_form(int kk) const {
    double s = 0.0;
    for (const auto& t : breakdown_(kk)) s += t.total();
    return s;
  }

  void set_breakdown(Breakdown b) { breakdown_ = std::move(b); }

  void compute_rate() {
    rate_constant = 0.0;
    for (int kk : {8, 16, 32, 64})
      rate_constant = std::max(rate_constant, kk * std::abs(closed_form(kk) - limit));
  }

 private:
  Breakdown breakdown_;
};

namespace detail {

inline void require_k(int k, const char* who) {
  require(k > 2, ErrorKind::invalid_argument, std::string(who) + ": k must be > 2");
}

inline Vec2 as_vec2(const Vec& v, const char* who) {
  require(v.size() == 2, ErrorKind::dimension_mismatch,
          std::string(who) + ": fields are two-dimensional");
  return {v(0), v(1)};
}

inline Vec from_vec2(const Vec2& v) { return Vec(v); }

// Orthonormal basis of η⊥.
inline std::vector<Vec> perpendicular_basis(const Vec& eta) {
  const Eigen::Index n = eta.size();
  std::vector<Vec> out;
  if (n == 2) {
    out.push_back(Vec2(-eta(1), eta(0)));
    return out;
  }
  Eigen::HouseholderQR<Mat> qr{Mat(eta)};
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  for (Eigen::Index i = 1; i < n; ++i) out.push_back(Q.col(i));
  return out;
}

// Length of the chord {n·y = c} ∩ P for a convex polygon P.
inline double chord_length(const Polygon& p, const Vec2& n, double c) {
  std::vector<Vec2> hits;
  for (std::size_t i = 0, m = p.size(); i < m; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % m];
    const double da = n.dot(a) - c, db = n.dot(b) - c;
    if ((da <= 0.0 && db > 0.0) || (da > 0.0 && db <= 0.0))
      hits.push_back(a + (da / (da - db)) * (b - a));
  }
  if (hits.size() < 2) return 0.0;
  return (hits[0] - hits[1]).norm();
}

// max f over unit pairs on a grid (720 λ-angles × 360 η-angles in n = 2).
inline double sup_on_spheres(const Density& d) {
  double best = 0.0;
  if (d.dimension() == 2) {
    for (int a = 0; a < 720; ++a) {
      const Vec2 l = unit_from_angle(2.0 * std::numbers::pi * a / 720);
      for (int b = 0; b < 360; ++b) {
        const Vec2 e = unit_from_angle(std::numbers::pi * b / 360);
        best = std::max(best, d.unchecked(as_span(l), as_span(e)));
      }
    }
    return best;
  }
  Rng rng(0x5eed);
  for (int s = 0; s < 100000; ++s) {
    const Vec l = random_unit(rng, d.dimension()), e = random_unit(rng, d.dimension());
    best = std::max(best, d.unchecked(as_span(l), as_span(e)));
  }
  return best;
}

inline RigidCell translated(const RigidCell& c, const Vec2& t) {
  RigidCell out = c;
  for (auto& v : out.vertices) v += t;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// u_{λ,η} itself; energy f(λ,η) for every k.
inline Construction single_jump(const Density& d, const Vec& lambda, const Vec& eta,
                                bool with_field = true) {
  require(lambda.size() == d.dimension() && eta.size() == d.dimension(),
          ErrorKind::dimension_mismatch, "single_jump: dimension mismatch");
  require(is_unit(eta), ErrorKind::invalid_argument, "single_jump: eta must be unit");
  Construction c("single_jump", d);
  c.lambda = lambda;
  c.eta = eta;
  c.reference = d(lambda, eta);
  c.limit = c.reference;
  const double v = c.reference;
  c.set_breakdown([v](int) { return std::vector<EnergyTerm>{{"jump", v, 1.0, true}}; });
  if (d.dimension() == 2 && with_field)
    c.field = elementary_jump_field(detail::as_vec2(lambda, "single_jump"),
                                    detail::as_vec2(eta, "single_jump"));
  c.compute_rate();
  return c;
}

/// u_{λ,η} - ξ on the strip {0 <= y·η <= 1/k, |y·η⊥| <= 1/2 - 1/(2k)}. The
/// part of the midline not under the strip has measure 1 - (1 - 1/k)^(n-1).
inline Construction subadditivity_strip(const Density& d, const Vec& lambda,
                                        const Vec& xi, const Vec& eta, int k,
                                        bool with_field = true) {
  detail::require_k(k, "subadditivity_strip");
  const int n = d.dimension();
  require(lambda.size() == n && xi.size() == n && eta.size() == n,
          ErrorKind::dimension_mismatch, "subadditivity_strip: dimension mismatch");
  require(is_unit(eta), ErrorKind::invalid_argument,
          "subadditivity_strip: eta must be unit");
  Construction c("subadditivity_strip", d);
  c.lambda = lambda;
  c.eta = eta;
  c.parameters = {{"xi", xi}};
  c.k = k;
  c.reference = d(lambda, eta);
  const double bottom = d(Vec(lambda - xi), eta);
  const double top = d(xi, eta);
  const double flat = c.reference;
  double sides = 0.0;
  for (const auto& z : detail::perpendicular_basis(eta))
    sides += d(Vec(-xi), z) + d(Vec(-xi), Vec(-z));
  c.limit = bottom + top;
  c.set_breakdown([=](int kk) {
    detail::require_k(kk, "subadditivity_strip");
    const double a = 1.0 - 1.0 / kk;
    const double cover = std::pow(a, n - 1);
    return std::vector<EnergyTerm>{
        {"strip_bottom", bottom, cover, true},
        {"strip_top", top, cover, true},
        {"strip_sides", sides / kk * std::pow(a, n - 2), 1.0, true},
        {"uncovered_midline", flat, 1.0 - cover, true}};
  });
  if (n == 2 && with_field) {
    const Vec2 e = detail::as_vec2(eta, "subadditivity_strip");
    const Vec2 l = detail::as_vec2(lambda, "subadditivity_strip");
    const Vec2 x = detail::as_vec2(xi, "subadditivity_strip");
    const double h = 0.5 - 0.5 / k;
    const Polygon strip = rectangle(-h, h, 0.0, 1.0 / k);
    auto cells = elementary_background(e, l, {strip});
    cells.push_back({strip, 0.0, l - x});
    c.field = build_partition(std::move(cells), e, l);
  }
  c.compute_rate();
  return c;
}

/// Row of 2k-2 triangles on the midline of Q_{η̃0}, η0 = η1 + η2, carrying
/// u_{λ,η̃0} - λ. The triangle has base ρ = 1/(2k) on the midline and sides
/// ρ|η_i|/|η0| with normals η̃_i; the row is centred, leaving 1/k of the
/// midline uncovered. The closed form is |η0| times the field energy.
inline Construction eta_convexity_triangles(const Density& d, const Vec& lambda,
                                            const Vec& eta1, const Vec& eta2, int k,
                                            bool with_field = true) {
  detail::require_k(k, "eta_convexity_triangles");
  require(d.dimension() == 2, ErrorKind::dimension_mismatch,
          "eta_convexity_triangles: two dimensions only");
  const Vec2 l = detail::as_vec2(lambda, "eta_convexity_triangles");
  const Vec2 h1 = detail::as_vec2(eta1, "eta_convexity_triangles");
  const Vec2 h2 = detail::as_vec2(eta2, "eta_convexity_triangles");
  require(h1.norm() > 0.0 && h2.norm() > 0.0, ErrorKind::invalid_argument,
          "eta_convexity_triangles: eta1 and eta2 must be nonzero");
  const Vec2 h0 = h1 + h2;
  require(h0.norm() > 1e-12 * std::max(h1.norm(), h2.norm()),
          ErrorKind::invalid_argument,
          "eta_convexity_triangles: eta1 + eta2 must be nonzero");

  Construction c("eta_convexity_triangles", d);
  c.lambda = lambda;
  c.eta = Vec(Vec2(h0.normalized()));
  c.parameters = {{"eta1", eta1}, {"eta2", eta2}};
  c.k = k;
  const double f0 = extend_bar(d, lambda, Vec(h0));
  const double f1 = extend_bar(d, lambda, Vec(h1));
  const double f2 = extend_bar(d, lambda, Vec(h2));
  c.reference = f0;
  c.limit = f1 + f2;
  c.field_energy_scale = h0.norm();
  c.set_breakdown([=](int kk) {
    detail::require_k(kk, "eta_convexity_triangles");
    const double cover = (2.0 * kk - 2.0) / (2.0 * kk);
    return std::vector<EnergyTerm>{{"side_eta1", f1, cover, true},
                                   {"side_eta2", f2, cover, true},
                                   {"uncovered_midline", f0, 1.0 / kk, true}};
  });
  c.compute_rate();
  if (!with_field) return c;

  const Vec2 e0 = h0.normalized();
  const Mat2 Q = frame_rotation(e0);
  const double rho = 1.0 / (2.0 * k);
  struct Side {
    Vec2 normal;
    double length;
  };
  std::vector<Side> sides{{Vec2(0.0, -1.0), rho},
                          {Q.transpose() * h1.normalized(), rho * h1.norm() / h0.norm()},
                          {Q.transpose() * h2.normalized(), rho * h2.norm() / h0.norm()}};
  auto ccw_from_base = [](const Vec2& nn) {
    double a = std::atan2(nn.y(), nn.x()) + 0.5 * std::numbers::pi;
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  };
  std::sort(sides.begin() + 1, sides.end(), [&](const Side& a, const Side& b) {
    return ccw_from_base(a.normal) < ccw_from_base(b.normal);
  });
  Polygon tri{Vec2::Zero()};
  for (std::size_t i = 0; i < 2; ++i)
    tri.push_back(tri.back() + sides[i].length * (rotation_generator() * sides[i].normal));
  double xmin = 0.0, xmax = 0.0, ymax = 0.0;
  for (const auto& v : tri) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymax = std::max(ymax, v.y());
  }
  if (std::abs(signed_area(tri)) <= 1e-14) {
    c.field_note = "triangle is degenerate (eta1 parallel to eta2)";
    return c;
  }
  if (xmin < -1e-12 || xmax > rho + 1e-12) {
    c.field_note = "triangle overhangs its base, so neighbouring copies would overlap";
    return c;
  }
  if (ymax >= 0.5 - 1e-12) {
    c.field_note = "triangle does not fit inside the unit square";
    return c;
  }
  std::vector<Polygon> holes;
  std::vector<RigidCell> inside;
  const double x0 = -0.5 + 0.5 / k;
  for (int i = 0; i < 2 * k - 2; ++i) {
    Polygon t = tri;
    for (auto& v : t) v += Vec2(x0 + i * rho, 0.0);
    holes.push_back(t);
    inside.push_back({std::move(t), 0.0, Vec2::Zero()});
  }
  auto cells = elementary_background(e0, l, holes);
  for (auto& t : inside) cells.push_back(std::move(t));
  c.field = build_partition(std::move(cells), e0, l);
  return c;
}

/// The symmetry competitor on Q_η: k-2 translated triangles Δ_k on the
/// midline, each cut by k²-1 lines with normal λ into rigid cells with
/// gradient ∓k² J. The top edge carries a varying jump; its term is the
/// subadditivity bound
///   (|ξ|/4)(f(λ,ζ) + f(-λ,ζ)) + (|ξ|/(2k)) f(-η,ζ),
/// so the closed form is an upper bound tending to
///   f(η,λ) + (f(λ,η) + f(-λ,η))/4.
inline Construction symmetry_triangles(const Density& d, const Vec& lambda, int k,
                                       const Vec& eta_in = Vec(), bool with_field = true) {
  require(d.dimension() == 2, ErrorKind::dimension_mismatch,
          "symmetry_triangles: two dimensions only");
  require(k > 2 && k % 2 == 0, ErrorKind::invalid_argument,
          "symmetry_triangles: k must be even and > 2");
  const Vec eta = eta_in.size() == 0 ? Vec(Vec2(0.0, 1.0)) : eta_in;
  const Vec2 l = detail::as_vec2(lambda, "symmetry_triangles");
  const Vec2 e = detail::as_vec2(eta, "symmetry_triangles");
  require(std::abs(l.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
          "symmetry_triangles: lambda must be a unit vector");
  require(std::abs(e.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
          "symmetry_triangles: eta must be a unit vector");
  const Mat2 Q = frame_rotation(e);
  const Mat2 J = rotation_generator();
  const Vec2 lf = Q.transpose() * l;  // λ in the frame where η = e2
  require(std::abs(lf.x()) > 1e-12, ErrorKind::invalid_argument,
          "symmetry_triangles: lambda = ±eta, nothing to construct");

  Construction c("symmetry_triangles", d);
  c.lambda = lambda;
  c.eta = eta;
  c.k = k;
  c.exact = false;
  c.reference = d(l, e);
  const double f_le = c.reference;
  const double f_ee = d(e, e);
  const double f_el = d(e, l);
  const double f_ll = d(l, l) + d(Vec2(-l), l);
  const double f_lminus = d(Vec2(-l), e);
  c.limit = f_el + 0.25 * (f_le + f_lminus);

  auto top_bound = [=](int kk) {
    const Vec2 w = J * lf;
    const Vec2 xi = Vec2(1.0 / kk, 0.0) + (2.0 / (double(kk) * kk)) * w;
    const Vec2 zeta = Q * (J * xi.normalized());
    const double len = xi.norm();
    return 0.25 * len * (d(l, zeta) + d(Vec2(-l), zeta)) +
           len / (2.0 * kk) * d(Vec2(-e), zeta);
  };
  c.set_breakdown([=](int kk) {
    require(kk > 2 && kk % 2 == 0, ErrorKind::invalid_argument,
            "symmetry_triangles: k must be even and > 2");
    const double k2 = double(kk) * kk;
    const double copies = kk - 2;
    return std::vector<EnergyTerm>{
        {"uncovered_midline", f_le, 2.0 / kk, true},
        {"D1_bottom", f_ee / (2.0 * k2), copies, true},
        {"D2_top_bound", top_bound(kk), copies, false},
        {"D3_short", f_ll / (2.0 * k2), copies, true},
        {"inside_lines", (k2 * k2 - k2) / (k2 * k2 * kk) * f_el, copies, true}};
  });
  c.compute_rate();
  if (!with_field) return c;

  // One triangle at the origin, frame coordinates.
  const double kd = k;
  const bool mirrored = lf.x() < 0.0;
  const Vec2 w = J * lf;
  const Vec2 xi = Vec2(1.0 / kd, 0.0) + (2.0 / (kd * kd)) * w;
  Polygon tri = mirrored ? Polygon{Vec2::Zero(), Vec2(-xi), Vec2(-1.0 / kd, 0.0)}
                         : Polygon{Vec2::Zero(), Vec2(1.0 / kd, 0.0), xi};
  const double spin = mirrored ? kd * kd : -kd * kd;
  const auto pieces = slice_by_levels(tri, lf, std::abs(lf.x()) / (kd * kd * kd));
  if (static_cast<int>(pieces.size()) != k * k)
    throw Error(ErrorKind::invalid_partition,
                "symmetry_triangles: slicing produced " + std::to_string(pieces.size()) +
                    " cells instead of k^2 (lambda too close to ±eta for this k)");
  std::vector<RigidCell> unit;
  for (std::size_t j = 0; j < pieces.size(); ++j)
    unit.push_back({pieces[j], spin, Vec2(0.0, double(j + 1) / kd)});  // frame offset

  const int N = k / 2;
  const int i_lo = mirrored ? 2 - N : 1 - N;
  const int i_hi = mirrored ? N - 1 : N - 2;
  std::vector<Polygon> holes;
  std::vector<RigidCell> inside;
  for (int i = i_lo; i <= i_hi; ++i) {
    const Vec2 t(double(i) / kd, 0.0);
    Polygon h = tri;
    for (auto& v : h) v += t;
    holes.push_back(std::move(h));
    for (const auto& cell : unit) {
      RigidCell moved = detail::translated(cell, t);
      // u(y) = s J (y - t) + b in the frame, then rotated to the world.
      moved.offset = Q * (cell.offset - cell.spin * (J * t));
      inside.push_back(std::move(moved));
    }
  }
  auto cells = elementary_background(e, l, holes);
  for (auto& cell : inside) cells.push_back(std::move(cell));
  c.field = build_partition(std::move(cells), e, l);
  return c;
}

/// Šilhavý's lattice competitor: on B_k = [-1/2 + 1/(2k), 1/2 - 1/(2k)] ×
/// [0, 1/k] (frame coordinates) the field is
///   v_k(x) = Σ (1/k) λ_i ⌊k² x·η_i⌋ - k (η⊗λ)^skew x,
/// outside B_k it is u_{λ,η}. Closed form: lattice lines (bound, exact
/// clipped lengths) + uncovered midline (exact) + bounds on the sides, the
/// bottom and the top of B_k from the linear growth constant C = max f on
/// unit pairs (grid estimate).
inline Construction silhavy_lattice(const Density& d, const Vec& lambda, const Vec& eta,
                                    const std::vector<std::pair<Vec, Vec>>& atoms, int k,
                                    bool with_field = true) {
  detail::require_k(k, "silhavy_lattice");
  require(d.dimension() == 2, ErrorKind::dimension_mismatch,
          "silhavy_lattice: two dimensions only");
  const Vec2 l = detail::as_vec2(lambda, "silhavy_lattice");
  const Vec2 e = detail::as_vec2(eta, "silhavy_lattice");
  require(std::abs(e.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
          "silhavy_lattice: eta must be a unit vector");
  require(!atoms.empty(), ErrorKind::invalid_argument, "silhavy_lattice: no atoms");
  Mat2 sum = Mat2::Zero();
  double mass = 0.0, lim = 0.0;
  std::vector<Vec2> ls, es;
  for (const auto& [li, ei] : atoms) {
    const Vec2 a = detail::as_vec2(li, "silhavy_lattice");
    const Vec2 b = detail::as_vec2(ei, "silhavy_lattice");
    require(std::abs(b.norm() - 1.0) <= 1e-10, ErrorKind::invalid_argument,
            "silhavy_lattice: atom normals must be unit vectors");
    sum += a * b.transpose();
    mass += a.norm();
    lim += d(a, b);
    ls.push_back(a);
    es.push_back(b);
  }
  const Mat2 target = 0.5 * (l * e.transpose() + e * l.transpose());
  const double residual = (sum - target).norm();
  require(residual <= 1e-10 * std::max(1.0, l.norm()), ErrorKind::invalid_argument,
          "silhavy_lattice: atoms do not decompose lambda ⊙ eta (residual " +
              std::to_string(residual) + ")");

  Construction c("silhavy_lattice", d);
  c.lambda = lambda;
  c.eta = eta;
  c.k = k;
  c.exact = false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    c.parameters.push_back({"lambda_" + std::to_string(i + 1), atoms[i].first});
    c.parameters.push_back({"eta_" + std::to_string(i + 1), atoms[i].second});
  }
  c.reference = d(l, e);
  c.limit = lim;
  const double C = detail::sup_on_spheres(d);
  const Mat2 Q = frame_rotation(e);
  const double f_le = c.reference;
  const double lnorm = l.norm();

  c.set_breakdown([=](int kk) {
    detail::require_k(kk, "silhavy_lattice");
    const double kd = kk;
    const double h = 0.5 - 0.5 / kd;
    const Polygon box = rectangle(-h, h, 0.0, 1.0 / kd);
    double lines = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const Vec2 nf = Q.transpose() * es[i];
      double lo = 1e300, hi = -1e300;
      for (const auto& v : box) {
        lo = std::min(lo, nf.dot(v));
        hi = std::max(hi, nf.dot(v));
      }
      const double spacing = 1.0 / (kd * kd);
      double len = 0.0;
      for (auto m = static_cast<long long>(std::floor(lo / spacing));
           static_cast<double>(m) * spacing <= hi; ++m) {
        const double cc = static_cast<double>(m) * spacing;
        if (cc > lo + 1e-13 && cc < hi - 1e-13) len += detail::chord_length(box, nf, cc);
      }
      lines += d(ls[i], es[i]) / kd * len;
    }
    return std::vector<EnergyTerm>{
        {"L_lattice_lines", lines, 1.0, false},
        {"N_uncovered_midline", f_le / kd, 1.0, true},
        {"M_sides_bound", 2.0 / kd * C * (2.0 * lnorm + mass / kd), 1.0, false},
        {"R_bottom_bound", (1.0 - 1.0 / kd) * C * mass / kd, 1.0, false},
        {"S_top_bound", (1.0 - 1.0 / kd) * C * mass / kd, 1.0, false}};
  });
  c.compute_rate();
  if (!with_field) return c;

  const double kd = k;
  const double h = 0.5 - 0.5 / kd;
  const Polygon box = rectangle(-h, h, 0.0, 1.0 / kd);
  std::vector<Polygon> pieces{box};
  for (const auto& ei : es) {
    const Vec2 nf = Q.transpose() * ei;
    std::vector<Polygon> next;
    for (const auto& p : pieces)
      for (auto& q : slice_by_levels(p, nf, 1.0 / (kd * kd))) next.push_back(std::move(q));
    pieces = std::move(next);
  }
  // -k (η⊗λ)^skew = s J with s = (k/2)(η1 λ2 - η2 λ1).
  const double spin = 0.5 * kd * (e.x() * l.y() - e.y() * l.x());
  std::vector<RigidCell> cells = elementary_background(e, l, {box});
  for (auto& p : pieces) {
    const Vec2 cw = Q * centroid(p);
    Vec2 b = Vec2::Zero();
    for (std::size_t i = 0; i < ls.size(); ++i)
      b += ls[i] / kd * std::floor(kd * kd * cw.dot(es[i]));
    cells.push_back({std::move(p), spin, b});
  }
  c.field = build_partition(std::move(cells), e, l);
  return c;
}

/// The symmetrized pair {(λ/2, η), (η/2, λ)} for unit λ, rescaled otherwise.
inline std::vector<std::pair<Vec, Vec>> symmetrized_atoms(const Vec& lambda, const Vec& eta) {
  const double r = lambda.norm();
  require(r > 0.0, ErrorKind::invalid_argument, "symmetrized_atoms: lambda must be nonzero");
  return {{0.5 * lambda, eta}, {0.5 * r * eta, lambda / r}};
}

// ---------------------------------------------------------------------------

inline json to_json(const EnergyTerm& t) {
  return {{"name", t.name},
          {"value", t.value},
          {"multiplicity", t.multiplicity},
          {"total", t.total()},
          {"exact", t.exact}};
}

inline json construction_table(const Construction& c, const std::vector<int>& ks) {
  json rows = json::array();
  for (int kk : ks) {
    json terms = json::array();
    for (const auto& t : c.breakdown(kk)) terms.push_back(to_json(t));
    rows.push_back({{"k", kk}, {"closed_form", c.closed_form(kk)}, {"terms", terms}});
  }
  json params = json::object();
  for (const auto& [name, v] : c.parameters) params[name] = vec_to_json(v);
  json out = {{"name", c.name},
              {"lambda", vec_to_json(c.lambda)},
              {"eta", vec_to_json(c.eta)},
              {"parameters", params},
              {"k", c.k},
              {"reference", c.reference},
              {"limit", c.limit},
              {"exact", c.exact},
              {"field_energy_scale", c.field_energy_scale},
              {"rate_constant", c.rate_constant},
              {"table", rows}};
  if (!c.field_note.empty()) out["field_note"] = c.field_note;
  return out;
}

inline std::string construction_csv(const Construction& c, const std::vector<int>& ks) {
  std::ostringstream os;
  os << std::setprecision(17) << "k,closed_form,limit\n";
  for (int kk : ks) os << kk << ',' << c.closed_form(kk) << ',' << c.limit << '\n';
  return os.str();
}

}  // namespace surfenv
