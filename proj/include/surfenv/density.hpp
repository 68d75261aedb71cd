#pragma once

// Surface densities f(λ, η): even, positively 1-homogeneous in λ, defined on
// R^n × S^{n-1}. Built-in kinds plus user callables; all evaluation is pure.

#include "surfenv/core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

namespace surfenv {

using json = nlohmann::json;

enum class DensityKind {
  frobenius,
  weighted_aniso,
  p_norm,
  product_norm,
  tabulated,
  custom,
};

inline std::string to_string(DensityKind k) {
  switch (k) {
    case DensityKind::frobenius: return "frobenius";
    case DensityKind::weighted_aniso: return "weighted-aniso";
    case DensityKind::p_norm: return "p-norm";
    case DensityKind::product_norm: return "product-norm";
    case DensityKind::tabulated: return "tabulated";
    case DensityKind::custom: return "custom";
  }
  return "unknown";
}

using DensityFn =
    std::function<double(std::span<const double>, std::span<const double>)>;
using SphereFn = std::function<double(std::span<const double>)>;

/// Samples of f(λ̂, η) on a periodic angle grid (n = 2). Row i belongs to
/// lambda_angles[i], column j to eta_angles[j]. Angles lie in [0, 2π) and
/// increase strictly; interpolation wraps around the circle.
struct TabulatedTable {
  std::vector<double> lambda_angles;
  std::vector<double> eta_angles;
  std::vector<std::vector<double>> values;
};

namespace detail {

inline double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

// Periodic bracket: returns (i0, i1, t) with angle between grid[i0] and
// grid[i1] (i1 wraps to 0 past the last node).
inline std::tuple<std::size_t, std::size_t, double> periodic_bracket(
    const std::vector<double>& grid, double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = wrap_angle(a);
  const std::size_t m = grid.size();
  auto it = std::upper_bound(grid.begin(), grid.end(), a);
  if (it == grid.begin() || it == grid.end()) {
    // between last node and first node + 2π
    const double lo = grid.back();
    const double hi = grid.front() + two_pi;
    double x = a < grid.front() ? a + two_pi : a;
    return {m - 1, 0, (x - lo) / (hi - lo)};
  }
  const std::size_t i1 = static_cast<std::size_t>(it - grid.begin());
  const std::size_t i0 = i1 - 1;
  return {i0, i1, (a - grid[i0]) / (grid[i1] - grid[i0])};
}

inline void check_table(const TabulatedTable& t) {
  auto check_grid = [](const std::vector<double>& g, const char* name) {
    require(g.size() >= 2, ErrorKind::invalid_argument,
            std::string("tabulated: ") + name + " needs at least 2 angles");
    for (std::size_t i = 0; i < g.size(); ++i) {
      require(g[i] >= 0.0 && g[i] < 2.0 * std::numbers::pi,
              ErrorKind::invalid_argument,
              std::string("tabulated: ") + name + " must lie in [0, 2pi)");
      if (i > 0)
        require(g[i] > g[i - 1], ErrorKind::invalid_argument,
                std::string("tabulated: ") + name + " must increase strictly");
    }
  };
  check_grid(t.lambda_angles, "lambda_angles");
  check_grid(t.eta_angles, "eta_angles");
  require(t.values.size() == t.lambda_angles.size(),
          ErrorKind::invalid_argument,
          "tabulated: values must have one row per lambda angle");
  for (const auto& row : t.values) {
    require(row.size() == t.eta_angles.size(), ErrorKind::invalid_argument,
            "tabulated: each row must have one entry per eta angle");
    for (double v : row)
      require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_argument,
              "tabulated: values must be finite and nonnegative");
  }
}

}  // namespace detail

/// An immutable surface density. Copies share the underlying evaluator.
class Density {
 public:
  static Density frobenius(int n) {
    require(n >= 1, ErrorKind::invalid_argument, "dimension must be >= 1");
    DensityFn fn = [](std::span<const double> l, std::span<const double>) {
      return detail::norm_of(l);
    };
    return Density(n, DensityKind::frobenius, json::object(), std::move(fn));
  }

  /// f(λ, η) = Σ w_i |λ_i|, independent of η.
  static Density weighted_aniso(std::vector<double> w) {
    require(!w.empty(), ErrorKind::invalid_argument,
            "weighted-aniso needs at least one weight");
    for (double x : w)
      require(std::isfinite(x) && x >= 0.0, ErrorKind::invalid_argument,
              "weighted-aniso weights must be nonnegative");
    const int n = static_cast<int>(w.size());
    json params = {{"w", w}};
    DensityFn fn = [w = std::move(w)](std::span<const double> l,
                                      std::span<const double>) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::abs(l[i]);
      return s;
    };
    return Density(n, DensityKind::weighted_aniso, std::move(params),
                   std::move(fn));
  }

  /// f(λ, η) = |λ|_p, independent of η.
  static Density p_norm(int n, double p) {
    require(n >= 1, ErrorKind::invalid_argument, "dimension must be >= 1");
    require(p >= 1.0, ErrorKind::invalid_argument, "p-norm needs p >= 1");
    DensityFn fn = [p](std::span<const double> l, std::span<const double>) {
      if (std::isinf(p)) {
        double m = 0.0;
        for (double x : l) m = std::max(m, std::abs(x));
        return m;
      }
      double mx = 0.0;
      for (double x : l) mx = std::max(mx, std::abs(x));
      if (mx == 0.0) return 0.0;
      double s = 0.0;
      for (double x : l) s += std::pow(std::abs(x) / mx, p);
      return mx * std::pow(s, 1.0 / p);
    };
    return Density(n, DensityKind::p_norm, json{{"p", p}}, std::move(fn));
  }

  /// f(λ, η) = |λ| g(η). g must be nonnegative and even for f to be even.
  static Density product_norm(int n, SphereFn g, json g_spec = json::object()) {
    require(n >= 1, ErrorKind::invalid_argument, "dimension must be >= 1");
    require(static_cast<bool>(g), ErrorKind::invalid_argument,
            "product-norm needs a sphere function");
    DensityFn fn = [g = std::move(g)](std::span<const double> l,
                                      std::span<const double> e) {
      const double r = detail::norm_of(l);
      return r == 0.0 ? 0.0 : r * g(e);
    };
    return Density(n, DensityKind::product_norm, json{{"g", std::move(g_spec)}},
                   std::move(fn));
  }

  /// Piecewise-bilinear interpolation of a table after radial normalization
  /// of λ: f(λ, η) = |λ| T(angle(λ), angle(η)). Two dimensions only.
  static Density tabulated(TabulatedTable table) {
    detail::check_table(table);
    json params = {{"lambda_angles", table.lambda_angles},
                   {"eta_angles", table.eta_angles},
                   {"values", table.values}};
    auto shared = std::make_shared<const TabulatedTable>(std::move(table));
    DensityFn fn = [t = std::move(shared)](std::span<const double> l,
                                           std::span<const double> e) {
      const double r = std::hypot(l[0], l[1]);
      if (r == 0.0) return 0.0;
      auto [i0, i1, s] =
          detail::periodic_bracket(t->lambda_angles, std::atan2(l[1], l[0]));
      auto [j0, j1, u] =
          detail::periodic_bracket(t->eta_angles, std::atan2(e[1], e[0]));
      const auto& v = t->values;
      const double val = (1 - s) * (1 - u) * v[i0][j0] + s * (1 - u) * v[i1][j0] +
                         (1 - s) * u * v[i0][j1] + s * u * v[i1][j1];
      return r * val;
    };
    return Density(2, DensityKind::tabulated, std::move(params), std::move(fn));
  }

  /// Arbitrary evaluator. The caller vouches for purity and thread safety.
  static Density custom(int n, std::string name, DensityFn fn) {
    require(n >= 1, ErrorKind::invalid_argument, "dimension must be >= 1");
    require(static_cast<bool>(fn), ErrorKind::invalid_argument,
            "custom density needs an evaluator");
    return Density(n, DensityKind::custom, json{{"name", std::move(name)}},
                   std::move(fn));
  }

  int dimension() const noexcept { return dim_; }
  DensityKind kind() const noexcept { return kind_; }
  const json& params() const noexcept { return params_; }

  /// Checked evaluation: dimensions must match and |η| = 1 within 1e-10.
  double operator()(std::span<const double> lambda,
                    std::span<const double> eta) const {
    require(static_cast<int>(lambda.size()) == dim_ &&
                static_cast<int>(eta.size()) == dim_,
            ErrorKind::dimension_mismatch,
            "density of dimension " + std::to_string(dim_) +
                " evaluated with lambda of size " +
                std::to_string(lambda.size()) + " and eta of size " +
                std::to_string(eta.size()));
    require(std::abs(detail::norm_of(eta) - 1.0) <= 1e-10,
            ErrorKind::invalid_argument, "eta must be a unit vector");
    return (*fn_)(lambda, eta);
  }

  double operator()(const Vec& lambda, const Vec& eta) const {
    return (*this)(as_span(lambda), as_span(eta));
  }
  double operator()(const Vec2& lambda, const Vec2& eta) const {
    return (*this)(as_span(lambda), as_span(eta));
  }

  /// Skips the argument checks; for inner loops over already-validated data.
  double unchecked(std::span<const double> lambda,
                   std::span<const double> eta) const {
    return (*fn_)(lambda, eta);
  }

 private:
  Density(int n, DensityKind kind, json params, DensityFn fn)
      : dim_(n),
        kind_(kind),
        params_(std::move(params)),
        fn_(std::make_shared<const DensityFn>(std::move(fn))) {}

  int dim_;
  DensityKind kind_;
  json params_;
  std::shared_ptr<const DensityFn> fn_;
};

inline double eval(const Density& d, const Vec& lambda, const Vec& eta) {
  return d(lambda, eta);
}

/// Positively 1-homogeneous extension in the second argument:
/// |ζ| f(λ, ζ/|ζ|), and 0 at ζ = 0.
inline double extend_bar(const Density& d, const Vec& lambda, const Vec& zeta) {
  require(lambda.size() == d.dimension() && zeta.size() == d.dimension(),
          ErrorKind::dimension_mismatch, "extend_bar: dimension mismatch");
  const double r = zeta.norm();
  if (r == 0.0) return 0.0;
  const Vec unit = zeta / r;
  return r * d(lambda, unit);
}

struct Rank1Factorization {
  Vec lambda;
  Vec eta;
  bool is_zero = false;
};

/// Factor F = λ ⊗ η with |η| = 1, or report F = 0. Throws not_rank_one when
/// the second singular value exceeds tol·|F|. The sign is fixed by making
/// the first nonzero component of η positive.
inline Rank1Factorization rank1_factor(const Mat& F, double tol = 1e-9) {
  require(F.rows() == F.cols(), ErrorKind::dimension_mismatch,
          "rank1_factor: matrix must be square");
  const Eigen::Index n = F.rows();
  const double fnorm = F.norm();
  Rank1Factorization out;
  if (fnorm <= tol) {
    out.lambda = Vec::Zero(n);
    out.eta = Vec::Unit(n, 0);
    out.is_zero = true;
    return out;
  }
  const auto sv = top_singular_values(F);
  require(sv.second <= tol * fnorm, ErrorKind::not_rank_one,
          "matrix is not rank one (second singular value " +
              std::to_string(sv.second) + ")");
  // Rows of a rank-one matrix are multiples of η; use the largest one.
  Eigen::Index best = 0;
  F.rowwise().norm().maxCoeff(&best);
  Vec eta = F.row(best).transpose();
  eta /= eta.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(eta(i)) > 1e-12) {
      if (eta(i) < 0.0) eta = -eta;
      break;
    }
  }
  out.lambda = F * eta;
  out.eta = eta;
  return out;
}

/// φ_f(F): f(λ, η) on rank-one F = λ ⊗ η, 0 at F = 0, +∞ otherwise.
inline double phi_extended(const Density& d, const Mat& F, double tol = 1e-9) {
  require(F.rows() == d.dimension() && F.cols() == d.dimension(),
          ErrorKind::dimension_mismatch, "phi_extended: dimension mismatch");
  try {
    const auto r = rank1_factor(F, tol);
    if (r.is_zero) return 0.0;
    return d(r.lambda, r.eta);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::not_rank_one)
      return std::numeric_limits<double>::infinity();
    throw;
  }
}

// ---------------------------------------------------------------------------
// Validation of the standing assumptions

struct ValidationReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double nonnegativity = 0.0;  // max(0, -f) over samples
  double evenness = 0.0;       // max |f(-λ,-η) - f(λ,η)| / scale
  double homogeneity = 0.0;    // max |f(αλ,η) - αf(λ,η)| / scale
  double continuity = 0.0;     // max |f(λ',η') - f(λ,η)| / scale, nearby pairs
  double continuity_step = 1e-6;

  double worst() const {
    return std::max({nonnegativity, evenness, homogeneity});
  }
  bool passes(double tol = 1e-9) const { return worst() <= tol; }
};

inline ValidationReport validate(const Density& d, int sample_count,
                                 std::uint64_t seed) {
  require(sample_count >= 1, ErrorKind::invalid_argument,
          "validate: sample_count must be >= 1");
  const int n = d.dimension();
  Rng rng(seed);
  std::uniform_real_distribution<double> log_alpha(std::log(1e-3),
                                                   std::log(1e3));
  ValidationReport rep;
  rep.samples = sample_count;
  rep.seed = seed;
  for (int s = 0; s < sample_count; ++s) {
    const Vec lambda = random_log_radius(rng, n, 1e-2, 1e2);
    const Vec eta = random_unit(rng, n);
    const double alpha = std::exp(log_alpha(rng));
    const double f = d(lambda, eta);
    rep.nonnegativity = std::max(rep.nonnegativity, -f);

    const double fm = d(Vec(-lambda), Vec(-eta));
    rep.evenness = std::max(
        rep.evenness, std::abs(fm - f) / std::max({1.0, std::abs(f), std::abs(fm)}));

    const double fa = d(Vec(alpha * lambda), eta);
    rep.homogeneity =
        std::max(rep.homogeneity,
                 std::abs(fa - alpha * f) /
                     std::max({1.0, std::abs(fa), std::abs(alpha * f)}));

    Vec dl = random_unit(rng, n) * rep.continuity_step * lambda.norm();
    Vec de = eta + random_unit(rng, n) * rep.continuity_step;
    de /= de.norm();
    const double fn = d(Vec(lambda + dl), de);
    rep.continuity = std::max(
        rep.continuity, std::abs(fn - f) / std::max({1.0, std::abs(f)}));
  }
  return rep;
}

inline json to_json(const ValidationReport& r) {
  return {{"samples", r.samples},
          {"seed", r.seed},
          {"nonnegativity_violation", r.nonnegativity},
          {"evenness_violation", r.evenness},
          {"homogeneity_violation", r.homogeneity},
          {"continuity_proxy", r.continuity},
          {"continuity_step", r.continuity_step},
          {"passes", r.passes()}};
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const json& field_of(const json& j, const char* key,
                            const std::string& where) {
  require(j.is_object() && j.contains(key), ErrorKind::parse_error,
          where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::vector<double> number_array(const json& j,
                                        const std::string& where) {
  require(j.is_array(), ErrorKind::parse_error,
          where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    require(x.is_number(), ErrorKind::parse_error,
            where + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// g(η) = a0 + Σ a_m cos(mθ) + b_m sin(mθ), θ = angle(η); 2D only.
inline SphereFn sphere_fn_from_json(const json& g, int n) {
  const std::string type = g.value("type", std::string("constant"));
  if (type == "constant") {
    const double c = g.value("value", 1.0);
    require(c >= 0.0, ErrorKind::parse_error,
            "params.g.value must be nonnegative");
    return [c](std::span<const double>) { return c; };
  }
  if (type == "fourier") {
    require(n == 2, ErrorKind::parse_error,
            "params.g: fourier sphere functions need dimension 2");
    const double a0 = g.value("a0", 1.0);
    struct Term { int m; double a, b; };
    std::vector<Term> terms;
    if (g.contains("terms")) {
      for (const auto& t : g.at("terms")) {
        const int m = field_of(t, "m", "params.g.terms").get<int>();
        require(m % 2 == 0, ErrorKind::parse_error,
                "params.g.terms: odd frequencies break evenness");
        terms.push_back({m, t.value("a", 0.0), t.value("b", 0.0)});
      }
    }
    return [a0, terms](std::span<const double> e) {
      const double th = std::atan2(e[1], e[0]);
      double s = a0;
      for (const auto& t : terms)
        s += t.a * std::cos(t.m * th) + t.b * std::sin(t.m * th);
      return s;
    };
  }
  throw Error(ErrorKind::parse_error, "params.g.type: unknown '" + type + "'");
}

}  // namespace detail

/// Reads {"dimension": n, "kind": "...", "params": {...}}.
inline Density density_from_json(const json& j) {
  using detail::field_of;
  require(j.is_object(), ErrorKind::parse_error,
          "density: expected a JSON object");
  const json& dim = field_of(j, "dimension", "density");
  require(dim.is_number_integer() && dim.get<int>() >= 1,
          ErrorKind::parse_error, "density.dimension must be an integer >= 1");
  const int n = dim.get<int>();
  const json& kind_j = field_of(j, "kind", "density");
  require(kind_j.is_string(), ErrorKind::parse_error,
          "density.kind must be a string");
  const std::string kind = kind_j.get<std::string>();
  const json params = j.value("params", json::object());

  if (kind == "frobenius") return Density::frobenius(n);
  if (kind == "weighted-aniso") {
    auto w = detail::number_array(field_of(params, "w", "density.params"),
                                  "density.params.w");
    require(static_cast<int>(w.size()) == n, ErrorKind::parse_error,
            "density.params.w must have 'dimension' entries");
    return Density::weighted_aniso(std::move(w));
  }
  if (kind == "p-norm") {
    const json& p = field_of(params, "p", "density.params");
    require(p.is_number(), ErrorKind::parse_error,
            "density.params.p must be a number");
    return Density::p_norm(n, p.get<double>());
  }
  if (kind == "product-norm") {
    const json g = params.value("g", json{{"type", "constant"}, {"value", 1.0}});
    return Density::product_norm(n, detail::sphere_fn_from_json(g, n), g);
  }
  if (kind == "tabulated") {
    require(n == 2, ErrorKind::parse_error,
            "density.kind 'tabulated' supports dimension 2 only");
    TabulatedTable t;
    t.lambda_angles = detail::number_array(
        field_of(params, "lambda_angles", "density.params"),
        "density.params.lambda_angles");
    t.eta_angles = detail::number_array(
        field_of(params, "eta_angles", "density.params"),
        "density.params.eta_angles");
    const json& vals = field_of(params, "values", "density.params");
    require(vals.is_array(), ErrorKind::parse_error,
            "density.params.values must be an array of arrays");
    for (const auto& row : vals)
      t.values.push_back(
          detail::number_array(row, "density.params.values"));
    try {
      return Density::tabulated(std::move(t));
    } catch (const Error& e) {
      throw Error(ErrorKind::parse_error, std::string("density.params: ") + e.what());
    }
  }
  throw Error(ErrorKind::parse_error, "density.kind: unknown '" + kind + "'");
}

inline json to_json(const Density& d) {
  return {{"dimension", d.dimension()},
          {"kind", to_string(d.kind())},
          {"params", d.params()}};
}

}  // namespace surfenv
