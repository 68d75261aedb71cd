#pragma once

// Necessary-condition and envelope tests. A violation carries the inputs
// that witness it; "consistent" only means no violation was found among the
// probes and samples, up to tolerance.

#include "surfenv/constructions.hpp"
#include "surfenv/envelope.hpp"

namespace surfenv {

enum class Verdict { consistent, violated };

inline const char* to_string(Verdict v) {
  return v == Verdict::violated ? "violated" : "consistent";
}

struct Witness {
  std::vector<std::pair<std::string, Vec>> inputs;
  std::string relation;  // what failed, e.g. "lhs <= rhs"
  double lhs = 0.0;
  double rhs = 0.0;
  json extra = json::object();
};

struct TestResult {
  std::string test;
  Verdict verdict = Verdict::consistent;
  int samples = 0;  // evaluations, probes included
  int violations = 0;
  double max_residual = 0.0;  // largest (lhs - rhs) / scale seen
  std::optional<Witness> witness;  // first violation in evaluation order

  std::string statement() const {
    if (verdict == Verdict::violated)
      return "violated at " + std::to_string(violations) + " of " +
             std::to_string(samples) + " samples";
    return "consistent up to tolerance at " + std::to_string(samples) + " samples";
  }
};

struct CheckReport {
  std::vector<TestResult> tests;
  std::uint64_t seed = 0;
  int requested_samples = 0;
  json tolerances = json::object();

  Verdict overall() const {
    for (const auto& t : tests)
      if (t.verdict == Verdict::violated) return Verdict::violated;
    return Verdict::consistent;
  }
  const TestResult* find(const std::string& name) const {
    for (const auto& t : tests)
      if (t.test == name) return &t;
    return nullptr;
  }
};

struct CheckOptions {
  double tol = 1e-9;              // relative, for pointwise inequalities
  double envelope_margin = 1e-6;  // relative, on top of the LP gap
  int refine_iterations = 0;
  LpOptions lp;
};

namespace detail {

inline double rel_scale(std::initializer_list<double> values) {
  double s = 1.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

// Records one comparison lhs <= rhs + tol * scale.
inline void record(TestResult& r, double lhs, double rhs, double scale, double tol,
                   const std::function<Witness()>& make_witness) {
  ++r.samples;
  const double residual = (lhs - rhs) / scale;
  r.max_residual = std::max(r.max_residual, residual);
  if (residual > tol) {
    ++r.violations;
    r.verdict = Verdict::violated;
    if (!r.witness) r.witness = make_witness();
  }
}

inline std::vector<Vec> canonical_basis(int n) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(Vec::Unit(n, i));
  return out;
}

inline std::vector<Vec> circle_grid(int count) {
  std::vector<Vec> out;
  for (int a = 0; a < count; ++a)
    out.push_back(Vec(unit_from_angle(2.0 * std::numbers::pi * a / count)));
  return out;
}

inline CheckReport single(TestResult r, std::uint64_t seed, int samples,
                          const CheckOptions& opt) {
  CheckReport rep;
  rep.tests.push_back(std::move(r));
  rep.seed = seed;
  rep.requested_samples = samples;
  rep.tolerances = {{"relative", opt.tol}, {"envelope_margin", opt.envelope_margin}};
  return rep;
}

}  // namespace detail

/// f(λ+ξ, η) <= f(λ,η) + f(ξ,η).
inline CheckReport check_subadditivity(const Density& d, int samples, std::uint64_t seed,
                                       const CheckOptions& opt = {}) {
  const int n = d.dimension();
  TestResult r;
  r.test = "subadd";
  auto probe = [&](const Vec& l, const Vec& x, const Vec& e) {
    const double a = d(Vec(l + x), e), b = d(l, e), c = d(x, e);
    detail::record(r, a, b + c, detail::rel_scale({a, b, c}), opt.tol, [&] {
      return Witness{{{"lambda", l}, {"xi", x}, {"eta", e}},
                     "f(lambda+xi,eta) <= f(lambda,eta) + f(xi,eta)", a, b + c};
    });
  };
  if (n == 2) {
    const auto dirs = detail::circle_grid(24);
    std::vector<Vec> etas;
    for (int b = 0; b < 12; ++b)
      etas.push_back(Vec(unit_from_angle(std::numbers::pi * b / 12)));
    for (const auto& e : etas)
      for (const auto& l : dirs)
        for (const auto& x : dirs) probe(l, x, e);
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec l = random_log_radius(rng, n), x = random_log_radius(rng, n);
    const Vec e = random_unit(rng, n);
    probe(l, x, e);
  }
  return detail::single(std::move(r), seed, samples, opt);
}

/// f̄(λ, η1+η2) <= f̄(λ,η1) + f̄(λ,η2).
inline CheckReport check_eta_convexity(const Density& d, int samples, std::uint64_t seed,
                                       const CheckOptions& opt = {}) {
  const int n = d.dimension();
  TestResult r;
  r.test = "eta-convex";
  auto probe = [&](const Vec& l, const Vec& h1, const Vec& h2) {
    const double a = extend_bar(d, l, Vec(h1 + h2));
    const double b = extend_bar(d, l, h1), c = extend_bar(d, l, h2);
    detail::record(r, a, b + c, detail::rel_scale({a, b, c}), opt.tol, [&] {
      return Witness{{{"lambda", l}, {"eta1", h1}, {"eta2", h2}},
                     "fbar(lambda,eta1+eta2) <= fbar(lambda,eta1) + fbar(lambda,eta2)",
                     a, b + c};
    });
  };
  if (n == 2) {
    const auto dirs = detail::circle_grid(36);
    for (const auto& l : detail::canonical_basis(2))
      for (const auto& h1 : dirs)
        for (const auto& h2 : dirs) probe(l, h1, h2);
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec l = random_log_radius(rng, n);
    const Vec h1 = random_log_radius(rng, n), h2 = random_log_radius(rng, n);
    probe(l, h1, h2);
  }
  return detail::single(std::move(r), seed, samples, opt);
}

/// f̄(λ,η) = f̄(η,λ). Canonical pairs (e_i, e_j) come first, so the witness
/// does not depend on the seed when one of them fails.
inline CheckReport check_bd_symmetry(const Density& d, int samples, std::uint64_t seed,
                                     const CheckOptions& opt = {}) {
  const int n = d.dimension();
  TestResult r;
  r.test = "bd-sym";
  auto probe = [&](const Vec& l, const Vec& e) {
    const double a = extend_bar(d, l, e), b = extend_bar(d, e, l);
    detail::record(r, std::abs(a - b), 0.0, detail::rel_scale({a, b}), opt.tol, [&] {
      return Witness{{{"lambda", l}, {"eta", e}},
                     "fbar(lambda,eta) == fbar(eta,lambda)", a, b};
    });
  };
  const auto basis = detail::canonical_basis(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) probe(basis[i], basis[j]);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec l = random_log_radius(rng, n);
    const Vec e = random_unit(rng, n);
    probe(l, e);
  }
  return detail::single(std::move(r), seed, samples, opt);
}

namespace detail {

inline CheckReport check_envelope_equality(const Density& d, int samples,
                                           const AtomDictionary& dict, std::uint64_t seed,
                                           const CheckOptions& opt, bool symmetric) {
  const int n = d.dimension();
  TestResult r;
  r.test = symmetric ? "bd" : "bv";
  EnvelopeOptions eo;
  eo.lp = opt.lp;
  eo.refine_iterations = opt.refine_iterations;
  auto probe = [&](const Vec& l, const Vec& e) {
    const double fv = d(l, e);
    const auto env = symmetric ? bd_envelope(d, l, e, dict, eo) : bv_envelope(d, l, e, dict, eo);
    const double scale = rel_scale({fv, env.value});
    // value < f - (gap + margin·scale) certifies Φ_f < f.
    const double margin = std::max(env.gap, 0.0) + opt.envelope_margin * scale;
    ++r.samples;
    const double residual = (fv - env.value - margin) / scale;
    r.max_residual = std::max(r.max_residual, (fv - env.value) / scale);
    if (residual > 0.0) {
      ++r.violations;
      r.verdict = Verdict::violated;
      if (!r.witness) {
        Witness w{{{"lambda", l}, {"eta", e}},
                  symmetric ? "f(lambda,eta) <= Phi_f(lambda ⊙ eta)"
                            : "f(lambda,eta) <= Phi_f(lambda ⊗ eta)",
                  fv, env.value};
        w.extra = {{"decomposition", to_json(env.decomposition)}, {"gap", env.gap}};
        r.witness = std::move(w);
      }
    }
  };
  const auto basis = canonical_basis(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) probe(basis[i], basis[j]);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec l = random_log_radius(rng, n);
    const Vec e = random_unit(rng, n);
    probe(l, e);
  }
  return single(std::move(r), seed, samples, opt);
}

}  // namespace detail

/// f(λ,η) against the refined LP envelope at λ⊗η.
inline CheckReport check_bv_ellipticity(const Density& d, int samples,
                                        const AtomDictionary& dict, std::uint64_t seed,
                                        const CheckOptions& opt = {}) {
  return detail::check_envelope_equality(d, samples, dict, seed, opt, false);
}

/// The symmetry filter, then f(λ,η) against the symmetric envelope at λ⊙η.
inline CheckReport check_bd_ellipticity(const Density& d, int samples,
                                        const AtomDictionary& dict, std::uint64_t seed,
                                        const CheckOptions& opt = {}) {
  auto sym = check_bd_symmetry(d, samples, seed, opt);
  if (sym.overall() == Verdict::violated) {
    TestResult r = sym.tests.front();
    r.test = "bd";
    if (r.witness) r.witness->extra["filter"] = "bd-sym";
    return detail::single(std::move(r), seed, samples, opt);
  }
  return detail::check_envelope_equality(d, samples, dict, seed, opt, true);
}

/// closed_form(k) >= f(λ,η) for each construction and k; fields, when
/// present, are re-evaluated geometrically at their own k.
inline CheckReport check_construction_bounds(const Density& d,
                                             const std::vector<Construction>& list,
                                             const std::vector<int>& ks,
                                             const CheckOptions& opt = {},
                                             double quadrature_tol = 1e-8) {
  TestResult r;
  r.test = "constructions";
  for (const auto& c : list) {
    for (int k : ks) {
      if (c.name == "symmetry_triangles" && k % 2 != 0) continue;
      if (k <= 2) continue;
      const double cf = c.closed_form(k);
      detail::record(r, c.reference, cf, detail::rel_scale({c.reference, cf}), opt.tol,
                     [&] {
                       Witness w{{{"lambda", c.lambda}, {"eta", c.eta}},
                                 "f(lambda,eta) <= closed_form(k)", c.reference, cf};
                       for (const auto& p : c.parameters) w.inputs.push_back(p);
                       w.extra = {{"construction", c.name}, {"k", k}};
                       return w;
                     });
    }
    if (c.field) {
      const auto e = total_energy(d, *c.field, quadrature_tol);
      const double energy = c.field_energy_scale * e.total;
      const double slack = c.field_energy_scale * e.quadrature_error_bound;
      detail::record(r, c.reference, energy + slack,
                     detail::rel_scale({c.reference, energy}), opt.tol, [&] {
                       Witness w{{{"lambda", c.lambda}, {"eta", c.eta}},
                                 "f(lambda,eta) <= field energy", c.reference, energy};
                       for (const auto& p : c.parameters) w.inputs.push_back(p);
                       w.extra = {{"construction", c.name}, {"k", c.k}, {"field", true}};
                       return w;
                     });
    }
  }
  CheckReport rep = detail::single(std::move(r), 0, static_cast<int>(list.size()), opt);
  return rep;
}

/// One competitor of each family per sample (λ log-radius, η unit), with
/// the canonical pair (e2, e1) first. Fields are built at k_field when
/// k_field > 0; families whose preconditions fail at a sample are skipped.
inline std::vector<Construction> sample_constructions(const Density& d, int samples,
                                                      std::uint64_t seed, int k_field = 0) {
  require(d.dimension() == 2, ErrorKind::dimension_mismatch,
          "sample_constructions: two dimensions only");
  std::vector<Construction> out;
  const bool fields = k_field > 2;
  const int k = fields ? k_field : 4;
  auto add_all = [&](const Vec& l, const Vec& e, const Vec& x, const Vec& h1, const Vec& h2) {
    auto attempt = [&](auto&& make) {
      try {
        out.push_back(make());
      } catch (const Error&) {
        // preconditions of this family fail at this sample
      }
    };
    attempt([&] { return single_jump(d, l, e, fields); });
    attempt([&] { return subadditivity_strip(d, l, x, e, k, fields); });
    attempt([&] { return eta_convexity_triangles(d, l, h1, h2, k, fields); });
    if (l.norm() > 0.0)
      attempt([&] {
        return symmetry_triangles(d, Vec(l / l.norm()), k % 2 == 0 ? k : k + 1, e, fields);
      });
    attempt([&] { return silhavy_lattice(d, l, e, symmetrized_atoms(l, e), k, fields); });
  };
  const Vec e1 = Vec::Unit(2, 0), e2 = Vec::Unit(2, 1);
  add_all(e2, e1, Vec(0.5 * e2), e1, e2);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vec l = random_log_radius(rng, 2);
    const Vec e = random_unit(rng, 2);
    const Vec x = random_log_radius(rng, 2);
    const Vec h1 = random_log_radius(rng, 2, 0.1, 10.0);
    const Vec h2 = random_log_radius(rng, 2, 0.1, 10.0);
    add_all(l, e, x, h1, h2);
  }
  return out;
}

// ---------------------------------------------------------------------------

inline json to_json(const Witness& w) {
  json inputs = json::object();
  for (const auto& [name, v] : w.inputs) inputs[name] = vec_to_json(v);
  json out = {{"inputs", inputs}, {"relation", w.relation}, {"lhs", w.lhs}, {"rhs", w.rhs}};
  if (!w.extra.empty()) out["details"] = w.extra;
  return out;
}

inline json to_json(const TestResult& t) {
  json out = {{"test", t.test},
              {"verdict", to_string(t.verdict)},
              {"statement", t.statement()},
              {"samples", t.samples},
              {"violations", t.violations},
              {"max_residual", t.max_residual}};
  if (t.witness) out["witness"] = to_json(*t.witness);
  return out;
}

inline json to_json(const CheckReport& r) {
  json tests = json::array();
  for (const auto& t : r.tests) tests.push_back(to_json(t));
  return {{"overall", to_string(r.overall())},
          {"seed", r.seed},
          {"requested_samples", r.requested_samples},
          {"tolerances", r.tolerances},
          {"tests", tests}};
}

inline std::string summary_text(const CheckReport& r) {
  std::ostringstream os;
  for (const auto& t : r.tests) {
    os << t.test << ": " << t.statement();
    if (t.witness) {
      os << "; witness";
      for (const auto& [name, v] : t.witness->inputs) {
        os << ' ' << name << "=(";
        for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
        os << ')';
      }
      os << " gives " << t.witness->lhs << " vs " << t.witness->rhs;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace surfenv
