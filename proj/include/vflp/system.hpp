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

#ifndef VFLP_SYSTEM_HPP_
#define VFLP_SYSTEM_HPP_

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "vflp/error.hpp"
#include "vflp/model.hpp"
#include "vflp/numerics.hpp"

namespace vflp {

inline constexpr double kScoreClip = 1e-12;

enum class ScoreSource { clean, noisy };

// A x = b' for one prediction, with the factorizations every attack needs.
struct LinearSystem {
  Matrix A;
  Vector b;
  Matrix A_pinv;
  Matrix projector;  // I - A^+ A
  Matrix null_basis;
  std::size_t rank = 0;
  ScoreSource source = ScoreSource::clean;

  Index d() const { return A.cols(); }
  Index nullity() const { return null_basis.cols(); }
  Vector ls_solution() const { return A_pinv * b; }
  PolytopeAffineBox feasible_set(double tau = 1e-6) const { return {A, b, tau}; }

  static LinearSystem from(const Matrix& a, const Vector& b, ScoreSource src = ScoreSource::clean,
                           RankPolicy policy = {}) {
    if (a.rows() != b.size()) throw InvalidArgument("LinearSystem: rows of A must match b");
    require_finite(a, "LinearSystem A");
    require_finite(b, "LinearSystem b");
    LinearSystem s;
    s.A = a;
    s.b = b;
    s.source = src;
    const SvdFactors f = svd(a);
    s.rank = numerical_rank(f.S, policy);
    s.A_pinv = pinv_from_svd(f, a.rows(), a.cols(), policy);
    s.null_basis = f.V.rightCols(a.cols() - static_cast<Index>(s.rank));
    s.projector = Matrix::Identity(a.cols(), a.cols()) - s.A_pinv * a;
    s.projector = (0.5 * (s.projector + s.projector.transpose())).eval();
    return s;
  }
};

// (k-1) x k consecutive-difference matrix.
inline Matrix difference_matrix(int k) {
  if (k < 2) throw InvalidArgument("difference_matrix: k must be at least 2");
  Matrix j = Matrix::Zero(k - 1, k);
  for (int m = 0; m < k - 1; ++m) {
    j(m, m) = -1.0;
    j(m, m + 1) = 1.0;
  }
  return j;
}

inline Vector log_ratio_scores(const Vector& c, double clip = kScoreClip) {
  if (c.size() < 2) throw InvalidArgument("log_ratio_scores: need at least two scores");
  const Vector l = c.cwiseMax(clip).array().log().matrix();
  return l.tail(c.size() - 1) - l.head(c.size() - 1);
}

// A = J W_pas and b' = c' - J W_act y - J b.
inline LinearSystem build_system(const VflModel& m, const Vector& y_act, const Vector& c,
                                 ScoreSource src = ScoreSource::clean, RankPolicy policy = {}) {
  if (c.size() != m.k) throw InvalidArgument("build_system: score vector length must be k");
  if (y_act.size() != m.W_act.cols()) throw InvalidArgument("build_system: active feature mismatch");
  const Matrix j = difference_matrix(m.k);
  const Vector rhs = log_ratio_scores(c) - j * (m.W_act * y_act) - j * m.b;
  LinearSystem s = LinearSystem::from(j * m.W_pas, rhs, src, policy);
  if (src == ScoreSource::clean) {
    const double gap = (s.A * s.ls_solution() - s.b).norm();
    if (gap > 1e-6) {
      std::ostringstream os;
      os << "build_system: clean scores give an unsatisfiable system (residual " << gap
         << "); scores may be clipped";
      throw SolverFailure(os.str());
    }
  }
  return s;
}

// (R A, R b') for invertible R.
inline LinearSystem transform_system(const LinearSystem& s, const Matrix& r) {
  if (r.rows() != r.cols() || r.rows() != s.A.rows()) {
    throw InvalidArgument("transform_system: R must be square with size rows(A)");
  }
  const Vector sv = svd(r).S;
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw InvalidArgument("transform_system: R is singular or badly conditioned");
  }
  return LinearSystem::from(r * s.A, r * s.b, s.source);
}

}  // namespace vflp

#endif  // VFLP_SYSTEM_HPP_
