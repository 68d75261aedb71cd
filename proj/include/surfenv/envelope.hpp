#pragma once

// The rank-one envelope
//
//   Φ_f(F) = inf { Σ f(λ_i, η_i) : Σ λ_i ⊗ η_i = F },
//
// computed as a conic LP over a finite dictionary of unit atoms (μ, η): the
// weights c_j >= 0 play the role of |λ_j| with λ_j = c_j μ_j. The LP value
// over-estimates Φ_f (restricted atom set); the LP dual Y is a linear
// minorant Y:(μ⊗η) <= f(μ,η) on the dictionary, so Y:F under-estimates it
// relative to the dictionary only. A local refinement moves active atoms off
// the grid. The symmetric variant constrains only sym(Σ c μ⊗η) = G, and its
// dual is a symmetric matrix.

#include "surfenv/density.hpp"
#include "surfenv/simplex.hpp"

#include <algorithm>
#include <optional>

namespace surfenv {

enum class ConstraintMode { full, symmetric };

struct Atom {
  Vec mu;
  Vec eta;
  double value = 0.0;  // f(mu, eta)
};

struct AtomDictionary {
  int dimension = 0;
  std::vector<Atom> atoms;
  int resolution = 0;
  std::uint64_t seed = 0;
  int mu_count = 0;   // directions for μ (full sphere)
  int eta_count = 0;  // directions for η (half sphere)
};

struct DecompositionTerm {
  double weight = 0.0;  // c >= 0, so λ = c μ
  Vec mu;
  Vec eta;
};

struct Decomposition {
  std::vector<DecompositionTerm> terms;
  Mat target;
  ConstraintMode mode = ConstraintMode::full;
  double residual = 0.0;

  std::size_t active_terms() const {
    return static_cast<std::size_t>(
        std::count_if(terms.begin(), terms.end(),
                      [](const auto& t) { return t.weight > 0.0; }));
  }
};

struct DualCertificate {
  Mat Y;
  double slack_min = 0.0;  // min over the dictionary of f(μ,η) - Y:(μ⊗η)
  double lower_bound = 0.0;  // Y:F
  bool symmetric = false;
};

struct EnvelopeResult {
  double value = 0.0;  // upper bound on Φ_f(F) from the decomposition
  DualCertificate certificate;
  Decomposition decomposition;
  double gap = 0.0;  // value - Y:F
  int lp_iterations = 0;
  bool augmented = false;  // canonical atoms were needed for feasibility
  bool refined = false;
  bool stalled = false;
};

struct EnvelopeOptions {
  LpOptions lp;
  int refine_iterations = 0;
};

// ---------------------------------------------------------------------------
// Closed-form oracles (two dimensions)

/// σ1 + σ2 = sqrt(|F|² + 2|det F|).
inline double nuclear_oracle(const Mat& F) {
  require(F.rows() == 2 && F.cols() == 2, ErrorKind::dimension_mismatch,
          "nuclear_oracle: expects a 2x2 matrix");
  const double fro2 = F.squaredNorm();
  const double det = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
  return std::sqrt(fro2 + 2.0 * std::abs(det));
}

/// sqrt(|G|² - 2 det G) = sqrt((G11 - G22)² + (G12 + G21)²).
inline double psi_oracle(const Mat& G) {
  require(G.rows() == 2 && G.cols() == 2, ErrorKind::dimension_mismatch,
          "psi_oracle: expects a 2x2 matrix");
  return std::hypot(G(0, 0) - G(1, 1), G(0, 1) + G(1, 0));
}

// ---------------------------------------------------------------------------
// Constraint maps

inline Eigen::Index constraint_rows(int n, ConstraintMode mode) {
  return mode == ConstraintMode::full ? n * n : n * (n + 1) / 2;
}

/// Coordinates of μ⊗η (row-major) or of the upper triangle of sym(μ⊗η).
inline Vec constraint_column(const Vec& mu, const Vec& eta, ConstraintMode mode) {
  const Eigen::Index n = mu.size();
  Vec col(constraint_rows(static_cast<int>(n), mode));
  Eigen::Index k = 0;
  if (mode == ConstraintMode::full) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) col(k++) = mu(i) * eta(j);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j)
        col(k++) = 0.5 * (mu(i) * eta(j) + mu(j) * eta(i));
  }
  return col;
}

inline Vec constraint_target(const Mat& F, ConstraintMode mode) {
  if (mode == ConstraintMode::full) return flatten(F);
  const Eigen::Index n = F.rows();
  Vec t(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) t(k++) = F(i, j);
  return t;
}

/// Dual vector → matrix Y with Y:(μ⊗η) = yᵀ column(μ, η).
inline Mat dual_matrix(const Vec& y, int n, ConstraintMode mode) {
  if (mode == ConstraintMode::full) return unflatten(y, n);
  Mat Y = Mat::Zero(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == j) {
        Y(i, i) = y(k++);
      } else {
        Y(i, j) = Y(j, i) = 0.5 * y(k++);
      }
    }
  return Y;
}

inline Mat decomposition_sum(const Decomposition& dec, int n) {
  Mat S = Mat::Zero(n, n);
  for (const auto& t : dec.terms) S += t.weight * tensor(t.mu, t.eta);
  return S;
}

inline double decomposition_residual(const Decomposition& dec, int n) {
  const Mat S = decomposition_sum(dec, n);
  if (dec.mode == ConstraintMode::full) return (S - dec.target).norm();
  return (sym_part(S) - dec.target).norm();
}

inline double decomposition_cost(const Density& d, const Decomposition& dec) {
  double s = 0.0;
  for (const auto& t : dec.terms)
    if (t.weight > 0.0) s += t.weight * d(t.mu, t.eta);
  return s;
}

// ---------------------------------------------------------------------------
// Dictionaries

namespace detail {

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Shifted Halton points in [-1,1]^n, radially projected from the unit ball.
inline std::vector<Vec> sphere_points(int n, int count, Rng& rng) {
  static constexpr std::uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                             23, 29, 31, 37, 41, 43, 47, 53};
  require(n <= 16, ErrorKind::invalid_argument,
          "dictionary sampling supports dimension <= 16");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(n);
  for (auto& s : shift) s = u(rng);
  std::vector<Vec> pts;
  for (std::uint64_t i = 1; static_cast<int>(pts.size()) < count; ++i) {
    Vec p(n);
    for (int k = 0; k < n; ++k) {
      double x = radical_inverse(i, primes[k]) + shift[k];
      x -= std::floor(x);
      p(k) = 2.0 * x - 1.0;
    }
    const double r = p.norm();
    if (r > 1.0 || r < 1e-3) continue;
    pts.push_back(p / r);
  }
  return pts;
}

inline Vec fold_to_half_sphere(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

/// Builds the atom grid. In two dimensions μ runs over `resolution` equally
/// spaced angles on the full circle and η over `resolution` angles in
/// [0, π); (μ, η) and (-μ, -η) are the same atom by evenness, so this covers
/// every unit pair exactly once. For n >= 3 both families are seeded,
/// shifted Halton points on the sphere (η folded to a half sphere).
inline AtomDictionary sample_dictionary(const Density& d, int resolution,
                                        std::uint64_t seed) {
  require(resolution >= 8,
          ErrorKind::invalid_argument, "dictionary resolution must be >= 8");
  const int n = d.dimension();
  AtomDictionary dict;
  dict.dimension = n;
  dict.resolution = resolution;
  dict.seed = seed;
  std::vector<Vec> mus, etas;
  if (n == 1) {
    mus = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    etas = {Vec::Constant(1, 1.0)};
  } else if (n == 2) {
    for (int a = 0; a < resolution; ++a) {
      const Vec2 m = unit_from_angle(2.0 * std::numbers::pi * a / resolution);
      mus.emplace_back(m);
    }
    for (int b = 0; b < resolution; ++b) {
      const Vec2 e = unit_from_angle(std::numbers::pi * b / resolution);
      etas.emplace_back(e);
    }
  } else {
    Rng rng(seed);
    mus = detail::sphere_points(n, resolution, rng);
    for (auto& e : detail::sphere_points(n, resolution, rng))
      etas.push_back(detail::fold_to_half_sphere(std::move(e)));
  }
  dict.mu_count = static_cast<int>(mus.size());
  dict.eta_count = static_cast<int>(etas.size());
  dict.atoms.reserve(mus.size() * etas.size());
  for (const auto& m : mus)
    for (const auto& e : etas) dict.atoms.push_back({m, e, d(m, e)});
  return dict;
}

/// Dictionary from explicit atoms (values evaluated here).
inline AtomDictionary make_dictionary(const Density& d,
                                      const std::vector<std::pair<Vec, Vec>>& pairs) {
  AtomDictionary dict;
  dict.dimension = d.dimension();
  for (const auto& [m, e] : pairs) {
    require(is_unit(m, 1e-10) && is_unit(e, 1e-10), ErrorKind::invalid_argument,
            "dictionary atoms must be unit vectors");
    dict.atoms.push_back({m, e, d(m, e)});
  }
  dict.mu_count = dict.eta_count = static_cast<int>(dict.atoms.size());
  return dict;
}

/// The 2n² signed canonical atoms (±e_i, e_j); their cone is everything.
inline std::vector<Atom> canonical_atoms(const Density& d) {
  const int n = d.dimension();
  std::vector<Atom> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (double s : {1.0, -1.0}) {
        Vec m = s * Vec::Unit(n, i);
        Vec e = Vec::Unit(n, j);
        out.push_back({m, e, d(m, e)});
      }
  return out;
}

// ---------------------------------------------------------------------------
// LP over a list of atoms

namespace detail {

struct AtomLp {
  LpResult lp;
  std::vector<Atom> atoms;  // columns, in order
  Decomposition decomposition;
  DualCertificate certificate;
};

inline AtomLp solve_atom_lp(const Mat& F, ConstraintMode mode,
                            std::vector<Atom> atoms, const LpOptions& opt) {
  const int n = static_cast<int>(F.rows());
  const Eigen::Index m = constraint_rows(n, mode);
  Mat A(m, static_cast<Eigen::Index>(atoms.size()));
  Vec c(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    A.col(static_cast<Eigen::Index>(j)) =
        constraint_column(atoms[j].mu, atoms[j].eta, mode);
    c(static_cast<Eigen::Index>(j)) = atoms[j].value;
  }
  AtomLp out;
  out.lp = solve_lp(A, constraint_target(F, mode), c, opt);
  out.atoms = std::move(atoms);
  if (out.lp.status != LpStatus::optimal) return out;

  out.decomposition.target = F;
  out.decomposition.mode = mode;
  for (Eigen::Index j : out.lp.basis) {
    const double w = out.lp.x(j);
    if (w > 0.0) {
      const auto& a = out.atoms[static_cast<std::size_t>(j)];
      out.decomposition.terms.push_back({w, a.mu, a.eta});
    }
  }
  out.decomposition.residual = decomposition_residual(out.decomposition, n);

  auto& cert = out.certificate;
  cert.symmetric = mode == ConstraintMode::symmetric;
  cert.Y = dual_matrix(out.lp.duals, n, mode);
  cert.lower_bound = frobenius_dot(cert.Y, F);
  const Vec slack = c - A.transpose() * out.lp.duals;
  cert.slack_min = slack.size() > 0 ? slack.minCoeff() : 0.0;
  return out;
}

inline AtomLp solve_with_fallback(const Density& d, const Mat& F,
                                  ConstraintMode mode, std::vector<Atom> atoms,
                                  const LpOptions& opt, bool& augmented) {
  augmented = false;
  AtomLp r = solve_atom_lp(F, mode, atoms, opt);
  if (r.lp.status == LpStatus::infeasible) {
    for (auto& a : canonical_atoms(d)) atoms.push_back(std::move(a));
    augmented = true;
    r = solve_atom_lp(F, mode, std::move(atoms), opt);
  }
  if (r.lp.status == LpStatus::infeasible)
    throw Error(ErrorKind::infeasible,
                "target is not in the conic hull of the dictionary atoms");
  if (r.lp.status == LpStatus::iteration_limit)
    throw Error(ErrorKind::iteration_limit, "LP iteration limit exceeded");
  if (r.lp.status == LpStatus::unbounded)
    throw Error(ErrorKind::infeasible, "LP reported an unbounded objective");
  return r;
}

inline EnvelopeResult to_result(const AtomLp& r, bool augmented) {
  EnvelopeResult out;
  out.value = r.lp.objective;
  out.certificate = r.certificate;
  out.decomposition = r.decomposition;
  out.gap = out.value - out.certificate.lower_bound;
  out.lp_iterations = r.lp.iterations;
  out.augmented = augmented;
  return out;
}

inline void check_target(const Density& d, const Mat& F, const char* who) {
  require(F.rows() == d.dimension() && F.cols() == d.dimension(),
          ErrorKind::dimension_mismatch,
          std::string(who) + ": matrix dimension does not match the density");
  require(F.allFinite(), ErrorKind::invalid_argument,
          std::string(who) + ": matrix entries must be finite");
}

}  // namespace detail

/// min Σ c_j f(μ_j, η_j) s.t. Σ c_j μ_j⊗η_j = F, c >= 0.
inline EnvelopeResult envelope_lp(const Density& d, const Mat& F,
                                  const AtomDictionary& dict,
                                  const LpOptions& opt = {}) {
  detail::check_target(d, F, "envelope_lp");
  require(dict.dimension == d.dimension(), ErrorKind::dimension_mismatch,
          "envelope_lp: dictionary dimension does not match");
  bool augmented = false;
  auto r = detail::solve_with_fallback(d, F, ConstraintMode::full, dict.atoms,
                                       opt, augmented);
  return detail::to_result(r, augmented);
}

/// Same LP with only the symmetric part constrained: Σ c_j sym(μ_j⊗η_j) = G.
inline EnvelopeResult envelope_symmetric(const Density& d, const Mat& G,
                                         const AtomDictionary& dict,
                                         const LpOptions& opt = {}) {
  detail::check_target(d, G, "envelope_symmetric");
  require((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          ErrorKind::not_symmetric, "envelope_symmetric: G is not symmetric");
  require(dict.dimension == d.dimension(), ErrorKind::dimension_mismatch,
          "envelope_symmetric: dictionary dimension does not match");
  bool augmented = false;
  auto r = detail::solve_with_fallback(d, G, ConstraintMode::symmetric,
                                       dict.atoms, opt, augmented);
  return detail::to_result(r, augmented);
}

// ---------------------------------------------------------------------------
// Carathéodory pruning

/// Removes terms along null-space directions of the constraint columns
/// without increasing the cost, until the columns are independent (at most
/// n² <= n²+1 terms remain).
inline Decomposition caratheodory_prune(const Density& d, Decomposition dec) {
  const int n = static_cast<int>(dec.target.rows());
  std::erase_if(dec.terms, [](const auto& t) { return !(t.weight > 0.0); });
  for (;;) {
    const auto K = static_cast<Eigen::Index>(dec.terms.size());
    if (K <= 1) break;
    Mat A(constraint_rows(n, dec.mode), K);
    Vec cost(K);
    for (Eigen::Index j = 0; j < K; ++j) {
      const auto& t = dec.terms[static_cast<std::size_t>(j)];
      A.col(j) = constraint_column(t.mu, t.eta, dec.mode);
      cost(j) = d(t.mu, t.eta);
    }
    Eigen::FullPivLU<Mat> lu(A);
    lu.setThreshold(1e-10);
    if (lu.rank() == K) break;
    Vec z = lu.kernel().col(0);
    if (cost.dot(z) > 0.0) z = -z;
    if ((z.array() < 0.0).count() == 0) z = -z;  // only when cost.dot(z) == 0
    double t = std::numeric_limits<double>::infinity();
    Eigen::Index drop = -1;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (z(j) < -1e-14) {
        const double tj = dec.terms[static_cast<std::size_t>(j)].weight / -z(j);
        if (tj < t) {
          t = tj;
          drop = j;
        }
      }
    }
    if (drop < 0) break;
    for (Eigen::Index j = 0; j < K; ++j)
      dec.terms[static_cast<std::size_t>(j)].weight =
          std::max(0.0, dec.terms[static_cast<std::size_t>(j)].weight + t * z(j));
    dec.terms[static_cast<std::size_t>(drop)].weight = 0.0;
    std::erase_if(dec.terms, [](const auto& x) { return !(x.weight > 0.0); });
  }
  dec.residual = decomposition_residual(dec, n);
  return dec;
}

// ---------------------------------------------------------------------------
// Refinement

struct RefineResult {
  Decomposition decomposition;
  double value = 0.0;
  double initial_value = 0.0;
  int improvements = 0;
  bool stalled = false;
};

namespace detail {

// Orthonormal basis of the tangent space of the sphere at v.
inline Mat tangent_basis(const Vec& v) {
  const Eigen::Index n = v.size();
  if (n == 2) {
    Mat t(2, 1);
    t << -v(1), v(0);
    return t;
  }
  Eigen::HouseholderQR<Mat> qr{Mat(v)};
  Mat Q = qr.householderQ() * Mat::Identity(n, n);
  return Q.rightCols(n - 1);
}

// Projected descent of the reduced cost r(μ,η) = f(μ,η) - Y:(μ⊗η) over the
// sphere product, by central finite differences (step 1e-6) in tangent
// coordinates and retraction by normalization.
inline Atom descend_atom(const Density& d, const Atom& start, const Mat& Y,
                         double step, int inner_steps) {
  const Eigen::Index n = start.mu.size();
  auto reduced = [&](const Vec& m, const Vec& e) {
    return d.unchecked(as_span(m), as_span(e)) - m.dot(Y * e);
  };
  Vec mu = start.mu, eta = start.eta;
  double r = reduced(mu, eta);
  constexpr double h = 1e-6;
  for (int it = 0; it < inner_steps; ++it) {
    const Mat Tm = tangent_basis(mu), Te = tangent_basis(eta);
    const Eigen::Index k = n - 1;
    Vec g(2 * k);
    for (Eigen::Index i = 0; i < k; ++i) {
      Vec mp = (mu + h * Tm.col(i)).normalized();
      Vec mm = (mu - h * Tm.col(i)).normalized();
      g(i) = (reduced(mp, eta) - reduced(mm, eta)) / (2 * h);
      Vec ep = (eta + h * Te.col(i)).normalized();
      Vec em = (eta - h * Te.col(i)).normalized();
      g(k + i) = (reduced(mu, ep) - reduced(mu, em)) / (2 * h);
    }
    const double gn = g.norm();
    if (!(gn > 1e-14)) break;
    bool moved = false;
    for (double s = step; s > 1e-12; s *= 0.5) {
      const Vec dir = -s * g / gn;
      Vec m2 = (mu + Tm * dir.head(k)).normalized();
      Vec e2 = (eta + Te * dir.tail(k)).normalized();
      const double r2 = reduced(m2, e2);
      if (r2 < r) {
        mu = std::move(m2);
        eta = std::move(e2);
        r = r2;
        moved = true;
        step = std::min(2.0 * s, 0.5);
        break;
      }
    }
    if (!moved) break;
  }
  return {mu, eta, d.unchecked(as_span(mu), as_span(eta))};
}

}  // namespace detail

/// Local improvement of a feasible decomposition. Each round moves every
/// active atom downhill on its reduced cost against the current dual Y
/// (the multiplier of the constraint), then re-solves the weights exactly
/// by an LP restricted to the old and moved atoms, so the objective never
/// increases; the LP's basic solution already satisfies the Carathéodory
/// bound and a final pruning pass enforces it for any input.
inline RefineResult refine_decomposition(const Density& d, const Mat& F,
                                         const Decomposition& init, int iters,
                                         const LpOptions& opt = {}) {
  detail::check_target(d, F, "refine_decomposition");
  const int n = d.dimension();
  const ConstraintMode mode = init.mode;
  Decomposition start = init;
  start.target = F;
  const double scale = std::max(F.norm(), 1.0);
  require(decomposition_residual(start, n) <= 1e-6 * scale,
          ErrorKind::invalid_argument,
          "refine_decomposition: initial decomposition is not feasible");

  RefineResult out;
  out.initial_value = decomposition_cost(d, start);
  std::vector<Atom> atoms;
  for (const auto& t : start.terms)
    if (t.weight > 0.0) atoms.push_back({t.mu, t.eta, d(t.mu, t.eta)});
  if (atoms.empty()) {
    out.decomposition = start;
    out.value = out.initial_value;
    out.stalled = iters > 0;
    return out;
  }

  bool augmented = false;
  auto cur = detail::solve_with_fallback(d, F, mode, atoms, opt, augmented);
  double value = cur.lp.objective;
  Decomposition best = cur.decomposition;
  if (value > out.initial_value) {  // fallback atoms can only be worse
    value = out.initial_value;
    best = start;
  }
  double step = 0.1;
  for (int it = 0; it < iters && step > 1e-10; ++it) {
    std::vector<Atom> cands;
    for (const auto& t : best.terms) cands.push_back({t.mu, t.eta, d(t.mu, t.eta)});
    const std::size_t old = cands.size();
    auto duplicate = [&](const Atom& a) {
      for (const auto& b : cands)
        if ((a.mu - b.mu).norm() < 1e-9 && (a.eta - b.eta).norm() < 1e-9)
          return true;
      return false;
    };
    for (std::size_t i = 0; i < old; ++i) {
      auto a = detail::descend_atom(d, cands[i], cur.certificate.Y, step, 8);
      if (!duplicate(a)) cands.push_back(std::move(a));
    }
    if (cands.size() == old) {
      step *= 0.5;
      continue;
    }
    bool aug = false;
    detail::AtomLp next;
    try {
      next = detail::solve_with_fallback(d, F, mode, cands, opt, aug);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::iteration_limit) throw;
      step *= 0.5;
      continue;
    }
    if (next.lp.objective < value - 1e-15 * std::max(1.0, value)) {
      value = next.lp.objective;
      best = next.decomposition;
      cur = std::move(next);
      ++out.improvements;
    } else {
      step *= 0.5;
    }
  }
  out.stalled = iters > 0 && out.improvements == 0;
  best = caratheodory_prune(d, best);
  out.value = decomposition_cost(d, best);
  out.decomposition = std::move(best);
  return out;
}

namespace detail {

inline EnvelopeResult refine_and_recertify(const Density& d, const Mat& F,
                                           const AtomDictionary& dict,
                                           EnvelopeResult base,
                                           ConstraintMode mode,
                                           const EnvelopeOptions& opt) {
  if (opt.refine_iterations <= 0 || base.decomposition.terms.empty())
    return base;
  const auto ref = refine_decomposition(d, F, base.decomposition,
                                        opt.refine_iterations, opt.lp);
  // Re-certify over the dictionary extended by the refined atoms, so the
  // dual stays a valid minorant on every atom the value depends on.
  std::vector<Atom> atoms = dict.atoms;
  for (const auto& t : ref.decomposition.terms)
    atoms.push_back({t.mu, t.eta, d(t.mu, t.eta)});
  bool augmented = false;
  auto r = solve_with_fallback(d, F, mode, std::move(atoms), opt.lp, augmented);
  EnvelopeResult out = to_result(r, augmented || base.augmented);
  out.decomposition = caratheodory_prune(d, out.decomposition);
  out.lp_iterations += base.lp_iterations;
  out.refined = true;
  out.stalled = ref.stalled;
  return out;
}

}  // namespace detail

namespace detail {

// The flat jump (λ̂, η) itself, so a rank-one target never costs more than f.
inline AtomDictionary with_target_atom(const Density& d, const AtomDictionary& dict,
                                       const Vec& lambda, const Vec& eta) {
  AtomDictionary out = dict;
  const double r = lambda.norm();
  if (r > 0.0) {
    const Vec mu = lambda / r;
    out.atoms.push_back({mu, eta, d(mu, eta)});
  }
  return out;
}

}  // namespace detail

/// Φ_f(λ⊗η): LP over the dictionary followed by refinement.
inline EnvelopeResult bv_envelope(const Density& d, const Vec& lambda,
                                  const Vec& eta, const AtomDictionary& dict,
                                  const EnvelopeOptions& opt = {}) {
  require(lambda.size() == d.dimension() && eta.size() == d.dimension(),
          ErrorKind::dimension_mismatch, "bv_envelope: dimension mismatch");
  require(is_unit(eta), ErrorKind::invalid_argument,
          "bv_envelope: eta must be a unit vector");
  const Mat F = tensor(lambda, eta);
  const auto ext = detail::with_target_atom(d, dict, lambda, eta);
  auto base = envelope_lp(d, F, ext, opt.lp);
  return detail::refine_and_recertify(d, F, ext, std::move(base),
                                      ConstraintMode::full, opt);
}

/// Symmetric-constraint envelope at λ⊙η, followed by refinement.
inline EnvelopeResult bd_envelope(const Density& d, const Vec& lambda,
                                  const Vec& eta, const AtomDictionary& dict,
                                  const EnvelopeOptions& opt = {}) {
  require(lambda.size() == d.dimension() && eta.size() == d.dimension(),
          ErrorKind::dimension_mismatch, "bd_envelope: dimension mismatch");
  require(is_unit(eta), ErrorKind::invalid_argument,
          "bd_envelope: eta must be a unit vector");
  const Mat G = sym_tensor(lambda, eta);
  const auto ext = detail::with_target_atom(d, dict, lambda, eta);
  auto base = envelope_symmetric(d, G, ext, opt.lp);
  return detail::refine_and_recertify(d, G, ext, std::move(base),
                                      ConstraintMode::symmetric, opt);
}

/// Envelope of an arbitrary matrix with optional refinement.
inline EnvelopeResult envelope(const Density& d, const Mat& F,
                               const AtomDictionary& dict, ConstraintMode mode,
                               const EnvelopeOptions& opt = {}) {
  auto base = mode == ConstraintMode::full
                  ? envelope_lp(d, F, dict, opt.lp)
                  : envelope_symmetric(d, F, dict, opt.lp);
  return detail::refine_and_recertify(d, F, dict, std::move(base), mode, opt);
}

// ---------------------------------------------------------------------------
// JSON

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json mat_to_json(const Mat& M) {
  json a = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

inline Vec vec_from_json(const json& j, const std::string& where) {
  require(j.is_array(), ErrorKind::parse_error,
          where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), ErrorKind::parse_error,
            where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Mat mat_from_json(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), ErrorKind::parse_error,
          where + ": expected a non-empty array of arrays");
  const std::size_t n = j.size();
  Mat M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = vec_from_json(j[i], where + "[" + std::to_string(i) + "]");
    require(static_cast<std::size_t>(row.size()) == n, ErrorKind::parse_error,
            where + ": matrix must be square");
    M.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return M;
}

inline json to_json(const Decomposition& dec) {
  json terms = json::array();
  for (const auto& t : dec.terms)
    terms.push_back({{"weight", t.weight},
                     {"mu", vec_to_json(t.mu)},
                     {"eta", vec_to_json(t.eta)},
                     {"lambda", vec_to_json(t.weight * t.mu)}});
  return {{"terms", terms},
          {"target", mat_to_json(dec.target)},
          {"symmetric", dec.mode == ConstraintMode::symmetric},
          {"residual", dec.residual}};
}

inline Decomposition decomposition_from_json(const json& j) {
  Decomposition dec;
  require(j.is_object(), ErrorKind::parse_error,
          "decomposition: expected an object");
  dec.target = mat_from_json(detail::field_of(j, "target", "decomposition"),
                             "decomposition.target");
  dec.mode = j.value("symmetric", false) ? ConstraintMode::symmetric
                                         : ConstraintMode::full;
  for (const auto& t : detail::field_of(j, "terms", "decomposition")) {
    DecompositionTerm term;
    term.weight = detail::field_of(t, "weight", "decomposition.terms").get<double>();
    term.mu = vec_from_json(detail::field_of(t, "mu", "decomposition.terms"),
                            "decomposition.terms.mu");
    term.eta = vec_from_json(detail::field_of(t, "eta", "decomposition.terms"),
                             "decomposition.terms.eta");
    dec.terms.push_back(std::move(term));
  }
  dec.residual = j.value("residual", 0.0);
  return dec;
}

inline json to_json(const DualCertificate& c) {
  return {{"Y", mat_to_json(c.Y)},
          {"slack_min", c.slack_min},
          {"lower_bound", c.lower_bound},
          {"symmetric", c.symmetric}};
}

inline json to_json(const EnvelopeResult& r) {
  return {{"value", r.value},
          {"value_kind", "upper bound on the envelope (finite atom set)"},
          {"certificate", to_json(r.certificate)},
          {"certificate_kind", "lower bound relative to the atom set only"},
          {"decomposition", to_json(r.decomposition)},
          {"gap", r.gap},
          {"lp_iterations", r.lp_iterations},
          {"augmented", r.augmented},
          {"refined", r.refined},
          {"stalled", r.stalled}};
}

inline json to_json(const AtomDictionary& dict) {
  json atoms = json::array();
  for (const auto& a : dict.atoms)
    atoms.push_back({{"mu", vec_to_json(a.mu)},
                     {"eta", vec_to_json(a.eta)},
                     {"value", a.value}});
  return {{"dimension", dict.dimension},
          {"resolution", dict.resolution},
          {"seed", dict.seed},
          {"mu_count", dict.mu_count},
          {"eta_count", dict.eta_count},
          {"atoms", atoms}};
}

}  // namespace surfenv
