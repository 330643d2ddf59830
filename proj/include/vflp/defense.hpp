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

#ifndef VFLP_DEFENSE_HPP_
#define VFLP_DEFENSE_HPP_

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vflp/dataset.hpp"
#include "vflp/error.hpp"
#include "vflp/model.hpp"
#include "vflp/numerics.hpp"
#include "vflp/system.hpp"

namespace vflp {

// ---------------------------------------------------------------------------
// Reparameterization of the passive block by an orthonormal H.

enum class TransformKind { neg_identity, optimal_ls, user };

struct OrthonormalTransform {
  Matrix H;
  TransformKind kind = TransformKind::user;

  static OrthonormalTransform make(Matrix h, TransformKind kind, double tol = 1e-8) {
    if (!is_orthonormal(h, tol)) throw InvalidArgument("OrthonormalTransform: H is not orthonormal");
    return {std::move(h), kind};
  }
  static OrthonormalTransform neg_identity(Index d) {
    return {-Matrix::Identity(d, d), TransformKind::neg_identity};
  }
};

// x_new = diag(scale) (H x - offset). Features whose transformed range is
// degenerate get scale 0.
struct AffineFeatureMap {
  Matrix H;
  Vector scale;
  Vector offset;

  Vector apply(const Vector& x) const { return scale.cwiseProduct(H * x - offset); }
};

struct Pps1Data {
  Dataset data;
  AffineFeatureMap map;
};

// Applies H to the passive block of every row and min-max renormalizes those
// columns over the whole dataset. With H = -I on columns spanning [0,1] this
// is x -> 1 - x.
inline Pps1Data pps1_transform(const Dataset& ds, const std::vector<Index>& passive,
                               const OrthonormalTransform& t) {
  const Index d = static_cast<Index>(passive.size());
  if (t.H.rows() != d || t.H.cols() != d) throw InvalidArgument("pps1_transform: H has wrong size");
  if (!is_orthonormal(t.H)) throw InvalidArgument("pps1_transform: H is not orthonormal");
  const Matrix block = select_cols(ds.X, passive);  // n x d
  const Matrix hx = block * t.H.transpose();
  Pps1Data out{ds, {t.H, Vector::Zero(d), Vector::Zero(d)}};
  for (Index j = 0; j < d; ++j) {
    const double lo = hx.col(j).minCoeff(), hi = hx.col(j).maxCoeff();
    out.map.offset(j) = lo;
    out.map.scale(j) = hi > lo ? 1.0 / (hi - lo) : 0.0;
  }
  for (Index j = 0; j < d; ++j) {
    out.data.X.col(passive[static_cast<std::size_t>(j)]) =
        ((hx.col(j).array() - out.map.offset(j)) * out.map.scale(j)).matrix();
  }
  return out;
}

// Disclosed passive weights W H^{-1} = W H^T.
inline VflModel pps1_reveal_params(const VflModel& m, const Matrix& h) {
  if (h.rows() != m.d() || !is_orthonormal(h)) {
    throw InvalidArgument("pps1_reveal_params: H must be an orthonormal d x d matrix");
  }
  VflModel out = m;
  out.W_pas = m.W_pas * h.transpose();
  return out;
}

// Model on transformed features with exactly the original logits:
// W_new = W H^T diag(1/scale), b_new = b + W H^T offset.
inline VflModel pps1_equivalent_model(const VflModel& m, const AffineFeatureMap& map) {
  if (map.scale.minCoeff() <= 0.0) {
    throw InvalidArgument("pps1_equivalent_model: a transformed feature is constant");
  }
  VflModel out = m;
  const Matrix wh = m.W_pas * map.H.transpose();
  out.W_pas = wh * map.scale.cwiseInverse().asDiagonal();
  out.b = m.b + wh * map.offset;
  return out;
}

// LS attack error per feature when the adversary treats W H^T as the raw
// passive weights:  (1/d)[Tr(K0) + Tr(P K0) - 2 Tr(H P K0)],  P = A^+ A.
inline double pps1_ls_objective(const Matrix& p, const Matrix& k0, const Matrix& h) {
  const double d = static_cast<double>(p.rows());
  return ((k0).trace() + (p * k0).trace() - 2.0 * (h * p * k0).trace()) / d;
}

// (1/d)[Tr((I + P) K0) + 2 |P K0|_*], the maximum of the objective above.
inline double pps1_optimal_value(const Matrix& p, const Matrix& k0) {
  const Index d = p.rows();
  return (((Matrix::Identity(d, d) + p) * k0).trace() + 2.0 * nuclear_norm(p * k0)) /
         static_cast<double>(d);
}

// H* = -V U^T from P K0 = U S V^T.
inline OrthonormalTransform pps1_optimal_H(const LinearSystem& sys, const Matrix& k0) {
  const Index d = sys.d();
  if (k0.rows() != d || k0.cols() != d) throw InvalidArgument("pps1_optimal_H: K0 has wrong size");
  require_symmetric(k0, "pps1_optimal_H K0");
  const Matrix p = Matrix::Identity(d, d) - sys.projector;
  if (sys.projector.cwiseAbs().maxCoeff() <= 1e-10) return OrthonormalTransform::neg_identity(d);
  const SvdFactors f = svd(p * k0);
  Matrix h = -f.V * f.U.transpose();
  if (!is_orthonormal(h)) throw SolverFailure("pps1_optimal_H: result lost orthonormality");
  return {std::move(h), TransformKind::optimal_ls};
}

// ---------------------------------------------------------------------------
// Coordinator noise on the logits.

enum class NoiseScheme { s1, s2, s3, class_label };

inline NoiseScheme parse_noise_scheme(std::string_view s) {
  if (s == "s1") return NoiseScheme::s1;
  if (s == "s2") return NoiseScheme::s2;
  if (s == "s3") return NoiseScheme::s3;
  if (s == "label" || s == "class_label") return NoiseScheme::class_label;
  throw ConfigError("unknown noise scheme '" + std::string(s) + "'");
}

struct NoisePlan {
  double alpha = 0.0;
  NoiseScheme scheme = NoiseScheme::s1;
  Vector v1;           // unit top right singular vector of A^+ J
  double sigma1 = 0.0;

  // Largest attainable Tr(A^+ J S J^T A^+^T) under Tr(S) = alpha.
  double max_objective() const { return sigma1 * sigma1 * alpha; }
};

inline NoisePlan pps2_optimal_direction(const LinearSystem& sys, int k, double alpha = 0.0,
                                        NoiseScheme scheme = NoiseScheme::s1) {
  if (alpha < 0.0) throw InvalidArgument("pps2_optimal_direction: alpha must be nonnegative");
  const Matrix apj = sys.A_pinv * difference_matrix(k);  // d x k
  const SvdFactors f = svd(apj);
  NoisePlan plan;
  plan.alpha = alpha;
  plan.scheme = scheme;
  plan.sigma1 = f.S.size() ? f.S(0) : 0.0;
  plan.v1 = f.V.col(0);
  Index big = 0;
  for (Index i = 1; i < plan.v1.size(); ++i)
    if (std::abs(plan.v1(i)) > std::abs(plan.v1(big))) big = i;
  if (plan.v1(big) < 0.0) plan.v1 = -plan.v1;
  return plan;
}

namespace detail {

// Indices attaining the maximum of z.
inline std::vector<Index> argmax_set(const Vector& z) {
  const double top = z.maxCoeff();
  std::vector<Index> out;
  for (Index i = 0; i < z.size(); ++i)
    if (z(i) == top) out.push_back(i);
  return out;
}

inline bool contains(const std::vector<Index>& s, Index i) {
  return std::find(s.begin(), s.end(), i) != s.end();
}

}  // namespace detail

// Scheme 1: direction v1 with the top-logit entries raised to max_j v1_j,
// rescaled to norm sqrt(alpha). Returns noisy logits.
inline Vector pps2_scheme1_logits(const Vector& z, const NoisePlan& plan) {
  if (plan.v1.size() != z.size()) throw InvalidArgument("pps2_scheme1: v1 has wrong length");
  if (plan.alpha == 0.0) return z;
  const auto top = detail::argmax_set(z);
  Vector n = plan.v1;
  const double vmax = plan.v1.maxCoeff();
  for (Index i : top) n(i) = vmax;
  const double norm = n.norm();
  if (norm == 0.0) return z;
  return z + std::sqrt(plan.alpha) * n / norm;
}

// Scheme 2: z' = z + sqrt(alpha) v1, then the top-logit entries are lifted to
// max_j z'_j. When that maximum sits outside the top set the lifted entries
// are put a relative 1e-12 above it, so the lowest-index argmax cannot move
// to another class on an exact tie.
inline Vector pps2_scheme2_logits(const Vector& z, const NoisePlan& plan) {
  if (plan.v1.size() != z.size()) throw InvalidArgument("pps2_scheme2: v1 has wrong length");
  if (plan.alpha == 0.0) return z;
  const auto top = detail::argmax_set(z);
  Vector zp = z + std::sqrt(plan.alpha) * plan.v1;
  double other = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < z.size(); ++i)
    if (!detail::contains(top, i)) other = std::max(other, zp(i));
  double lifted = zp.maxCoeff();
  if (lifted <= other) lifted = other + 1e-12 * std::max(1.0, std::abs(other));
  for (Index i : top) zp(i) = lifted;
  return zp;
}

// Scheme 3: (1 - alpha) z + alpha, alpha in [0, 1).
inline Vector pps2_scheme3_logits(const Vector& z, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("pps2_scheme3: alpha must lie in [0,1)");
  return ((1.0 - alpha) * z).array() + alpha;
}

inline Vector pps2_scheme1(const Vector& z, const NoisePlan& plan) {
  return softmax(pps2_scheme1_logits(z, plan));
}
inline Vector pps2_scheme2(const Vector& z, const NoisePlan& plan) {
  return softmax(pps2_scheme2_logits(z, plan));
}
inline Vector pps2_scheme3(const Vector& z, double alpha) { return softmax(pps2_scheme3_logits(z, alpha)); }

// Reveals only the label: the (lowest-index) top entry gets 1 - (k-1) eps.
inline Vector pps2_class_label(const Vector& z, double eps) {
  const Index k = z.size();
  if (!(eps > 0.0 && eps < 1.0 / static_cast<double>(k))) {
    throw InvalidArgument("pps2_class_label: eps must lie in (0, 1/k)");
  }
  Vector c = Vector::Constant(k, eps);
  c(argmax_lowest(z)) = 1.0 - static_cast<double>(k - 1) * eps;
  return c;
}

// +-sqrt(alpha) v1 with a random sign: zero mean, correlation alpha v1 v1^T.
inline Vector pps2_random_sign_logits(const Vector& z, const NoisePlan& plan, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  const double s = coin(rng) ? 1.0 : -1.0;
  return z + s * std::sqrt(plan.alpha) * plan.v1;
}

// Noisy scores for any scheme. For class_label the plan's alpha is eps.
inline Vector pps2_apply(const Vector& z, const NoisePlan& plan) {
  switch (plan.scheme) {
    case NoiseScheme::s1: return pps2_scheme1(z, plan);
    case NoiseScheme::s2: return pps2_scheme2(z, plan);
    case NoiseScheme::s3: return pps2_scheme3(z, plan.alpha);
    case NoiseScheme::class_label: return pps2_class_label(z, plan.alpha);
  }
  throw InvalidArgument("pps2_apply: unknown scheme");
}

// (1/d) Tr(P_null K0) + (1/d) Tr(A^+ J S J^T A^+^T).
inline double mse_under_noise(const LinearSystem& sys, const Matrix& s, const Matrix& k0, int k) {
  const Index d = sys.d();
  if (s.rows() != k || s.cols() != k) throw InvalidArgument("mse_under_noise: S must be k x k");
  if (k0.rows() != d || k0.cols() != d) throw InvalidArgument("mse_under_noise: K0 must be d x d");
  const Matrix apj = sys.A_pinv * difference_matrix(k);
  const double noise = (apj * s * apj.transpose()).trace();
  return ((sys.projector * k0).trace() + noise) / static_cast<double>(d);
}

}  // namespace vflp

#endif  // VFLP_DEFENSE_HPP_
