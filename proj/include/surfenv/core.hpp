#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surfenv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class ErrorKind {
  dimension_mismatch,
  invalid_argument,
  not_rank_one,
  not_symmetric,
  infeasible,
  iteration_limit,
  invalid_partition,
  quadrature_failure,
  parse_error,
};

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

// ---------------------------------------------------------------------------
// Tensor helpers

inline Mat tensor(const Vec& a, const Vec& b) { return a * b.transpose(); }

/// a ⊙ b = (a⊗b + b⊗a)/2
inline Mat sym_tensor(const Vec& a, const Vec& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

inline Mat sym_part(const Mat& F) { return 0.5 * (F + F.transpose()); }

/// Rotation by +pi/2; every skew 2x2 matrix is a multiple of it.
inline Mat2 rotation_generator() {
  Mat2 J;
  J << 0.0, -1.0, 1.0, 0.0;
  return J;
}

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Proper rotation Q with Q e2 = eta. Maps frame coordinates of Q_eta
/// (second axis along the normal) to world coordinates.
inline Mat2 frame_rotation(const Vec2& eta) {
  Mat2 Q;
  Q << eta.y(), eta.x(), -eta.x(), eta.y();
  return Q;
}

inline Vec2 unit_from_angle(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

struct SingularPair {
  double largest = 0.0;
  double second = 0.0;
};

/// Closed-form singular values of a 2x2 matrix.
inline SingularPair singular_values_2x2(const Mat& F) {
  const double a = F(0, 0), b = F(0, 1), c = F(1, 0), d = F(1, 1);
  const double p = std::hypot(a + d, b - c);
  const double q = std::hypot(a - d, b + c);
  return {0.5 * (p + q), 0.5 * std::abs(p - q)};
}

/// Two largest singular values: closed form for n = 2, Jacobi otherwise.
inline SingularPair top_singular_values(const Mat& F) {
  if (F.rows() == 2 && F.cols() == 2) return singular_values_2x2(F);
  Eigen::JacobiSVD<Mat> svd(F);
  const auto& s = svd.singularValues();
  SingularPair out;
  if (s.size() > 0) out.largest = s(0);
  if (s.size() > 1) out.second = s(1);
  return out;
}

inline double frobenius_dot(const Mat& A, const Mat& B) {
  return (A.array() * B.array()).sum();
}

/// Row-major flattening (the serialization order for matrices).
inline Vec flatten(const Mat& F) {
  Vec v(F.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    for (Eigen::Index j = 0; j < F.cols(); ++j) v(k++) = F(i, j);
  return v;
}

inline Mat unflatten(const Vec& v, Eigen::Index n) {
  Mat F(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) F(i, j) = v(k++);
  return F;
}

inline bool is_unit(const Vec& v, double tol = 1e-10) {
  return std::abs(v.norm() - 1.0) <= tol;
}

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<const double> as_span(const Vec2& v) { return {v.data(), 2}; }

// ---------------------------------------------------------------------------
// Sampling

using Rng = std::mt19937_64;

inline Vec random_unit(Rng& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Direction uniform on the sphere, radius log-uniform in [rmin, rmax].
inline Vec random_log_radius(Rng& rng, int n, double rmin = 1e-2,
                             double rmax = 1e2) {
  std::uniform_real_distribution<double> u(std::log(rmin), std::log(rmax));
  return std::exp(u(rng)) * random_unit(rng, n);
}

inline Mat random_matrix(Rng& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat F(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F(i, j) = u(rng);
  return F;
}

}  // namespace surfenv
