#pragma once

// Dense revised simplex for  min cᵀx  s.t.  A x = b,  x >= 0.
//
// Two phases with artificial slack columns; the basis inverse is kept
// explicitly (m is tiny here: n² or n(n+1)/2 rows) and refactored from
// scratch periodically. Pricing is Dantzig's rule; after a run of degenerate
// pivots it falls back to Bland's rule, which cannot cycle.

#include "surfenv/core.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace surfenv {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-11;
  int max_iterations = 100000;
  int refactor_every = 64;
  int degenerate_run_before_bland = 32;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;                // primal solution, size N
  Vec duals;            // y with cᵀx = yᵀb at optimum, size m
  double objective = 0.0;
  std::vector<Eigen::Index> basis;  // structural indices in the final basis
  int iterations = 0;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const Mat& A, const Vec& b, const Vec& c, const LpOptions& opt)
      : A_(A), c_(c), opt_(opt), m_(A.rows()), n_(A.cols()) {
    sign_ = Vec::Ones(m_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (b(i) < 0.0) sign_(i) = -1.0;
    b_ = b.cwiseProduct(sign_);
    scale_ = std::max(1.0, b_.lpNorm<Eigen::Infinity>());
    head_.resize(m_);
    basic_.assign(n_ + m_, false);
    for (Eigen::Index i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      basic_[n_ + i] = true;
    }
    binv_ = Mat::Identity(m_, m_);
  }

  LpResult run() {
    LpResult res;
    // Phase I: minimize the sum of artificials.
    Vec c1 = Vec::Zero(n_ + m_);
    c1.tail(m_).setOnes();
    LpStatus st = iterate(c1, res.iterations);
    if (st == LpStatus::iteration_limit) {
      res.status = st;
      return res;
    }
    double art = 0.0;
    const Vec xb = binv_ * b_;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (head_[i] >= n_) art += std::max(0.0, xb(i));
    if (art > opt_.feasibility_tol * scale_) {
      res.status = LpStatus::infeasible;
      return res;
    }
    drive_out_artificials();

    Vec c2 = Vec::Zero(n_ + m_);
    c2.head(n_) = c_;
    st = iterate(c2, res.iterations);
    res.status = st;
    if (st != LpStatus::optimal) return res;

    refactor();
    Vec xB = binv_ * b_;
    res.x = Vec::Zero(n_);
    Vec cB(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      cB(i) = head_[i] < n_ ? c_(head_[i]) : 0.0;
      if (head_[i] < n_) {
        res.x(head_[i]) = std::max(0.0, xB(i));
        res.basis.push_back(head_[i]);
      }
    }
    const Vec y = binv_.transpose() * cB;
    res.duals = y.cwiseProduct(sign_);
    res.objective = c_.dot(res.x);
    return res;
  }

 private:
  Vec column(Eigen::Index j) const {
    if (j < n_) return A_.col(j).cwiseProduct(sign_);
    return Vec::Unit(m_, j - n_);
  }

  void refactor() {
    Mat B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = column(head_[i]);
    binv_ = B.partialPivLu().inverse();
  }

  LpStatus iterate(const Vec& cost, int& iterations) {
    int stall_run = 0;
    bool bland = false;  // once on, stays on for the phase
    double last_objective = std::numeric_limits<double>::infinity();
    int since_refactor = 0;
    for (;;) {
      if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
      if (since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      const Vec xB = binv_ * b_;
      Vec cB(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cB(i) = cost(head_[i]);
      const Vec y = binv_.transpose() * cB;
      const Vec ys = y.cwiseProduct(sign_);
      const Vec reduced = cost.head(n_) - A_.transpose() * ys;

      // Degenerate pivots, and pivots whose gain is lost in rounding, can
      // cycle under Dantzig pricing.
      const double objective = cB.dot(xB);
      if (objective < last_objective - 1e-12 * std::max(1.0, std::abs(objective)))
        stall_run = 0;
      else
        ++stall_run;
      last_objective = objective;
      if (stall_run >= opt_.degenerate_run_before_bland) bland = true;
      const double cscale = std::max(1.0, cost.head(n_).lpNorm<Eigen::Infinity>());
      const double thresh = -opt_.optimality_tol * cscale;
      // Artificial columns never (re-)enter.
      Eigen::Index q = -1;
      double best = thresh;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (basic_[j]) continue;
        const double d = reduced(j);
        if (d < best) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q < 0) return LpStatus::optimal;

      const Vec alpha = binv_ * column(q);
      // Small pivots relative to the column make B badly conditioned.
      const double ptol =
          opt_.pivot_tol * std::max(1.0, alpha.lpNorm<Eigen::Infinity>()) * 1e2;
      Eigen::Index r = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (alpha(i) <= ptol) continue;
        const double t = std::max(0.0, xB(i)) / alpha(i);
        const double tie = 1e-12 * std::max(1.0, theta);
        if (r < 0 || t < theta - tie) {
          r = i;
          theta = t;
        } else if (t <= theta + tie && head_[i] < head_[r]) {
          r = i;  // lowest index among ties (Bland)
        }
      }
      if (r < 0) return LpStatus::unbounded;

      pivot(r, q, alpha);
      ++iterations;
      ++since_refactor;
    }
  }

  void pivot(Eigen::Index r, Eigen::Index q, const Vec& alpha) {
    const double piv = alpha(r);
    binv_.row(r) /= piv;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r || alpha(i) == 0.0) continue;
      binv_.row(i) -= alpha(i) * binv_.row(r);
    }
    basic_[head_[r]] = false;
    head_[r] = q;
    basic_[q] = true;
  }

  // Degenerate pivots that replace zero-level artificials by structurals.
  // Rows with no structural entry are redundant; their artificial stays.
  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (head_[r] < n_) continue;
      const Vec row = binv_.row(r).transpose().cwiseProduct(sign_);
      const Vec entries = A_.transpose() * row;
      Eigen::Index q = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (basic_[j]) continue;
        if (std::abs(entries(j)) > best) {
          best = std::abs(entries(j));
          q = j;
        }
      }
      if (q >= 0) pivot(r, q, binv_ * column(q));
    }
  }

  const Mat& A_;
  const Vec& c_;
  LpOptions opt_;
  Eigen::Index m_, n_;
  Vec sign_, b_;
  double scale_ = 1.0;
  std::vector<Eigen::Index> head_;
  std::vector<bool> basic_;
  Mat binv_;
};

}  // namespace detail

inline LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c,
                         const LpOptions& opt = {}) {
  require(A.rows() == b.size() && A.cols() == c.size(),
          ErrorKind::dimension_mismatch, "solve_lp: inconsistent sizes");
  if (A.cols() == 0) {
    LpResult r;
    r.status = b.lpNorm<Eigen::Infinity>() <= opt.feasibility_tol
                   ? LpStatus::optimal
                   : LpStatus::infeasible;
    r.x = Vec::Zero(0);
    r.duals = Vec::Zero(A.rows());
    return r;
  }
  return detail::RevisedSimplex(A, b, c, opt).run();
}

}  // namespace surfenv
