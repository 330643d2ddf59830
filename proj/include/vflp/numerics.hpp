/*
 * Copyright 2026 The vflp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Small dense linear algebra and convex-solver primitives. Everything here is
// a pure function of its arguments.

#ifndef VFLP_NUMERICS_HPP_
#define VFLP_NUMERICS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vflp/error.hpp"

namespace vflp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Singular values below eps * sigma_1 are treated as zero.
struct RankPolicy {
  double eps = 1e-10;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

inline Vector clamp01(const Vector& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

struct SvdFactors {
  Matrix U;  // m x m
  Vector S;  // min(m, d), non-increasing
  Matrix V;  // d x d
};

// Full SVD. Eigen's one-sided Jacobi SVD is used; its output is checked so a
// breakdown surfaces as SolverFailure instead of garbage.
inline SvdFactors svd(const Matrix& a) {
  require_finite(a, "svd");
  if (a.rows() == 0 || a.cols() == 0) {
    throw InvalidArgument("svd: empty matrix");
  }
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw SolverFailure("svd: Jacobi iteration did not converge");
  }
  SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!f.U.allFinite() || !f.S.allFinite() || !f.V.allFinite()) {
    throw SolverFailure("svd: non-finite factors");
  }
  return f;
}

inline std::size_t numerical_rank(const Vector& singular_values, RankPolicy policy = {}) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
  const double cutoff = policy.eps * singular_values(0);
  std::size_t r = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > cutoff) ++r;
  }
  return r;
}

inline std::size_t rank(const Matrix& a, RankPolicy policy = {}) {
  return numerical_rank(svd(a).S, policy);
}

inline Matrix pinv_from_svd(const SvdFactors& f, Index rows, Index cols, RankPolicy policy = {}) {
  const std::size_t r = numerical_rank(f.S, policy);
  Matrix out = Matrix::Zero(cols, rows);
  for (std::size_t i = 0; i < r; ++i) {
    const Index k = static_cast<Index>(i);
    out.noalias() += (1.0 / f.S(k)) * f.V.col(k) * f.U.col(k).transpose();
  }
  return out;
}

inline Matrix pinv(const Matrix& a, RankPolicy policy = {}) {
  return pinv_from_svd(svd(a), a.rows(), a.cols(), policy);
}

// I - A^+ A, the orthogonal projector onto Null(A).
inline Matrix projector_null(const Matrix& a, RankPolicy policy = {}) {
  const Matrix p = Matrix::Identity(a.cols(), a.cols()) - pinv(a, policy) * a;
  return 0.5 * (p + p.transpose());
}

// Orthonormal basis of Null(A): the right singular vectors past the rank.
// Zero columns when A has full column rank.
inline Matrix nullspace_basis(const Matrix& a, RankPolicy policy = {}) {
  const SvdFactors f = svd(a);
  const Index r = static_cast<Index>(numerical_rank(f.S, policy));
  return f.V.rightCols(a.cols() - r);
}

// x - A^+ (A x - b).
inline Vector project_affine(const Vector& x, const Matrix& a, const Vector& b,
                             const Matrix& a_pinv) {
  return x - a_pinv * (a * x - b);
}

inline Vector project_affine(const Vector& x, const Matrix& a, const Vector& b,
                             RankPolicy policy = {}) {
  return project_affine(x, a, b, pinv(a, policy));
}

// S_F = {x : A x = b, 0 <= x <= 1}.
struct PolytopeAffineBox {
  Matrix A;
  Vector b;
  double tau_feas = 1e-6;

  Index dim() const { return A.cols(); }

  double affine_residual(const Vector& x) const {
    return A.rows() == 0 ? 0.0 : (A * x - b).cwiseAbs().maxCoeff();
  }

  double box_violation(const Vector& x) const {
    double v = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      v = std::max({v, -x(i), x(i) - 1.0});
    }
    return v;
  }

  bool contains(const Vector& x) const {
    return x.size() == dim() && affine_residual(x) <= tau_feas && box_violation(x) <= tau_feas;
  }
};

// Thrown by iterative projections; keeps the last iterate for diagnosis.
class ProjectionFailure : public SolverFailure {
 public:
  ProjectionFailure(const std::string& what, Vector last, double affine_res, double box_viol)
      : SolverFailure(what), last_iterate(std::move(last)), affine_residual(affine_res),
        box_violation(box_viol) {}
  Vector last_iterate;
  double affine_residual;
  double box_violation;
};

struct DykstraOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  // on the step between successive iterates
  RankPolicy rank;
};

// Euclidean projection of x0 onto S_F by Dykstra's alternating projections
// between the affine set and the box. Both pieces have closed forms.
inline Vector dykstra_project(const Vector& x0, const PolytopeAffineBox& poly,
                              DykstraOptions options = {}) {
  if (x0.size() != poly.dim()) throw InvalidArgument("dykstra_project: dimension mismatch");
  require_finite(x0, "dykstra_project");
  const Matrix a_pinv = pinv(poly.A, options.rank);
  const Index d = x0.size();
  Vector x = x0;
  Vector p = Vector::Zero(d);
  Vector q = Vector::Zero(d);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector y = project_affine(x + p, poly.A, poly.b, a_pinv);
    p = x + p - y;
    const Vector next = clamp01(y + q);
    q = y + q - next;
    const double step = (next - x).norm();
    const double gap = (y - next).norm();
    x = next;
    // A small step alone is not enough: the correction terms can still be
    // moving while x sits on a box face.
    if (step < options.tolerance && gap < 10.0 * options.tolerance && poly.contains(x)) {
      return x;
    }
  }
  std::ostringstream os;
  os << "dykstra_project: no convergence after " << options.max_iterations
     << " iterations (affine residual " << poly.affine_residual(x) << ")";
  throw ProjectionFailure(os.str(), x, poly.affine_residual(x), poly.box_violation(x));
}

struct BoxLsOptions {
  int max_iterations = 200000;
  double residual_tolerance = 1e-12;    // relative to max(1, |b|)
  double stationarity_tolerance = 1e-12;
};

struct BoxLsResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
};

// min |A x - b| over [0,1]^d by accelerated projected gradient with adaptive
// restart. The minimizer is generally not unique; the point returned depends
// on x_init.
inline BoxLsResult box_least_squares_detailed(const Matrix& a, const Vector& b, const Vector& x_init,
                                              BoxLsOptions options = {}) {
  if (a.cols() != x_init.size() || a.rows() != b.size()) {
    throw InvalidArgument("box_least_squares: dimension mismatch");
  }
  require_finite(a, "box_least_squares");
  require_finite(b, "box_least_squares");
  const double sigma1 = svd(a).S(0);
  BoxLsResult out;
  out.x = clamp01(x_init);
  if (sigma1 == 0.0) {
    out.residual = b.norm();
    return out;
  }
  const double step = 1.0 / (sigma1 * sigma1);
  const double res_tol = options.residual_tolerance * std::max(1.0, b.norm());
  Vector x = out.x;
  Vector y = x;
  double t = 1.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector grad = a.transpose() * (a * y - b);
    const Vector next = clamp01(y - step * grad);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Gradient-based restart keeps the momentum from overshooting along
    // the flat nullspace directions.
    if ((y - next).dot(next - x) > 0.0) {
      t = 1.0;
      y = next;
    } else {
      y = next + ((t - 1.0) / t_next) * (next - x);
      t = t_next;
    }
    const double moved = (next - x).norm();
    x = next;
    const double residual = (a * x - b).norm();
    const double stationarity = (x - clamp01(x - a.transpose() * (a * x - b))).norm();
    if (residual <= res_tol || stationarity <= options.stationarity_tolerance ||
        (moved == 0.0 && it > 1)) {
      out.x = x;
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  std::ostringstream os;
  os << "box_least_squares: no convergence after " << options.max_iterations
     << " iterations (residual " << (a * x - b).norm() << ")";
  throw SolverFailure(os.str());
}

inline Vector box_least_squares(const Matrix& a, const Vector& b, const Vector& x_init,
                                BoxLsOptions options = {}) {
  return box_least_squares_detailed(a, b, x_init, options).x;
}

// Minimal enclosing ball of a finite point set (columns of `points`), from the
// dual QP over the simplex followed by a circumcenter polish on the support.
struct Ball {
  Vector center;
  double radius = 0.0;
};

namespace detail {

inline Vector project_simplex(const Vector& v) {
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    cumulative += u(i);
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u(i) - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

inline double max_distance(const Matrix& points, const Vector& c) {
  return (points.colwise() - c).colwise().norm().maxCoeff();
}

}  // namespace detail

inline Ball minimal_enclosing_ball(const Matrix& points) {
  const Index n = points.cols();
  if (n == 0) throw InvalidArgument("minimal_enclosing_ball: no points");
  if (n == 1) return {points.col(0), 0.0};
  const Vector sq = points.colwise().squaredNorm().transpose();
  const Matrix gram = points.transpose() * points;
  const double lipschitz = 2.0 * std::max(gram.norm(), 1e-300);
  Vector mu = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector y = mu;
  double t = 1.0;
  for (int it = 0; it < 20000; ++it) {
    const Vector grad = sq - 2.0 * gram * y;  // ascent direction of the dual
    const Vector next = detail::project_simplex(y + grad / lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - mu);
    const double moved = (next - mu).lpNorm<Eigen::Infinity>();
    mu = next;
    t = t_next;
    if (moved < 1e-15) break;
  }
  Ball best{points * mu, 0.0};
  best.radius = detail::max_distance(points, best.center);

  std::vector<Index> support;
  for (Index i = 0; i < n; ++i) {
    if (mu(i) > 1e-8) support.push_back(i);
  }
  if (support.size() >= 2) {
    const Vector base = points.col(support[0]);
    const Index s = static_cast<Index>(support.size()) - 1;
    Matrix dirs(points.rows(), s);
    for (Index j = 0; j < s; ++j) dirs.col(j) = points.col(support[j + 1]) - base;
    // Equidistance from the support points, restricted to their affine hull.
    const Matrix lhs = 2.0 * dirs.transpose() * dirs;
    Vector rhs(s);
    for (Index j = 0; j < s; ++j) rhs(j) = dirs.col(j).squaredNorm();
    const Vector lambda = pinv(lhs) * rhs;
    const Vector c = base + dirs * lambda;
    const double r = detail::max_distance(points, c);
    if (c.allFinite() && r <= best.radius) best = {c, r};
  }
  return best;
}

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
  Matrix vertices;  // one vertex per column
};

// Exact Chebyshev center of S_F by vertex enumeration followed by a minimal
// enclosing ball. Exponential in d; intended as a test oracle.
inline ChebyshevBall chebyshev_center_exact(const PolytopeAffineBox& poly, RankPolicy policy = {}) {
  const Index d = poly.dim();
  if (d < 1 || d > 8) throw InvalidArgument("chebyshev_center_exact: requires 1 <= d <= 8");
  const Matrix& a = poly.A;
  const Vector& b = poly.b;
  const Index r = static_cast<Index>(rank(a, policy));
  const Index fixed_count = d - r;
  const double tol = 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff());

  std::vector<Vector> found;
  auto add_vertex = [&](const Vector& v) {
    for (const Vector& w : found) {
      if ((w - v).lpNorm<Eigen::Infinity>() < 1e-9) return;
    }
    found.push_back(v);
  };

  // Iterate over subsets of size fixed_count via bitmasks.
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    if (std::popcount(mask) != fixed_count) continue;
    std::vector<Index> fixed_idx, free_idx;
    for (Index i = 0; i < d; ++i) {
      ((mask >> i) & 1u ? fixed_idx : free_idx).push_back(i);
    }
    Matrix a_free(a.rows(), static_cast<Index>(free_idx.size()));
    for (std::size_t j = 0; j < free_idx.size(); ++j) {
      a_free.col(static_cast<Index>(j)) = a.col(free_idx[j]);
    }
    Matrix free_pinv;
    if (!free_idx.empty()) {
      if (rank(a_free, policy) != free_idx.size()) continue;
      free_pinv = pinv(a_free, policy);
    }
    for (unsigned bits = 0; bits < (1u << fixed_count); ++bits) {
      Vector x = Vector::Zero(d);
      for (std::size_t j = 0; j < fixed_idx.size(); ++j) {
        x(fixed_idx[j]) = ((bits >> j) & 1u) ? 1.0 : 0.0;
      }
      if (!free_idx.empty()) {
        const Vector rhs = b - a * x;
        const Vector x_free = free_pinv * rhs;
        for (std::size_t j = 0; j < free_idx.size(); ++j) {
          x(free_idx[j]) = x_free(static_cast<Index>(j));
        }
      }
      if (a.rows() > 0 && (a * x - b).cwiseAbs().maxCoeff() > tol) continue;
      if (x.minCoeff() < -1e-9 || x.maxCoeff() > 1.0 + 1e-9) continue;
      add_vertex(clamp01(x));
    }
  }
  if (found.empty()) throw InvalidArgument("chebyshev_center_exact: empty polytope");

  Matrix vertices(d, static_cast<Index>(found.size()));
  for (std::size_t j = 0; j < found.size(); ++j) vertices.col(static_cast<Index>(j)) = found[j];
  const Ball ball = minimal_enclosing_ball(vertices);
  return {ball.center, ball.radius, vertices};
}

struct TraceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline Vector eigenvalues_descending(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("eigenvalues: solver failed");
  return es.eigenvalues().reverse();
}

inline void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + ": not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw InvalidArgument(std::string(what) + ": not symmetric");
  }
}

// Von Neumann's trace inequality for symmetric PSD M, P:
//   sum_i m_i p_{n-i+1} <= Tr(M P) <= sum_i m_i p_i.
inline TraceBounds von_neumann_bounds(const Matrix& m, const Matrix& p) {
  require_symmetric(m, "von_neumann_bounds");
  require_symmetric(p, "von_neumann_bounds");
  if (m.rows() != p.rows()) throw InvalidArgument("von_neumann_bounds: dimension mismatch");
  const Vector em = eigenvalues_descending(0.5 * (m + m.transpose()));
  const Vector ep = eigenvalues_descending(0.5 * (p + p.transpose()));
  const Index n = em.size();
  TraceBounds out;
  for (Index i = 0; i < n; ++i) {
    out.upper += em(i) * ep(i);
    out.lower += em(i) * ep(n - 1 - i);
  }
  return out;
}

inline bool is_orthonormal(const Matrix& h, double tol = 1e-8) {
  return h.rows() == h.cols() &&
         (h.transpose() * h - Matrix::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline double nuclear_norm(const Matrix& m) { return svd(m).S.sum(); }

}  // namespace vflp

#endif  // VFLP_NUMERICS_HPP_
