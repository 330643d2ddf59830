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

#ifndef VFLP_ATTACKS_HPP_
#define VFLP_ATTACKS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vflp/error.hpp"
#include "vflp/model.hpp"
#include "vflp/numerics.hpp"
#include "vflp/system.hpp"

namespace vflp {

struct AttackEstimate {
  Vector x;
  std::string name;
  bool feasible = false;
  int iterations = 0;
  double residual = 0.0;  // |A x - b'| (GIA: final divergence in bits)
  double radius = std::numeric_limits<double>::quiet_NaN();  // RCC1 only
  bool converged = true;
};

enum class AttackMethod { half, half_star, ls, clamped_ls, cls, rcc1, rcc2, gia, rg, zero };

inline constexpr std::array<std::pair<std::string_view, AttackMethod>, 10> kAttackNames{{
    {"half", AttackMethod::half},
    {"half_star", AttackMethod::half_star},
    {"ls", AttackMethod::ls},
    {"clamped_ls", AttackMethod::clamped_ls},
    {"cls", AttackMethod::cls},
    {"rcc1", AttackMethod::rcc1},
    {"rcc2", AttackMethod::rcc2},
    {"gia", AttackMethod::gia},
    {"rg", AttackMethod::rg},
    {"zero", AttackMethod::zero},
}};

inline AttackMethod parse_attack(std::string_view name) {
  for (const auto& [key, m] : kAttackNames)
    if (key == name) return m;
  throw ConfigError("unknown attack method '" + std::string(name) + "'");
}

inline std::string attack_name(AttackMethod m) {
  for (const auto& [key, v] : kAttackNames)
    if (v == m) return std::string(key);
  return "?";
}

enum class GiaInit { zeros, half, random };

inline GiaInit parse_gia_init(std::string_view name) {
  if (name == "zeros") return GiaInit::zeros;
  if (name == "half") return GiaInit::half;
  if (name == "random") return GiaInit::random;
  throw ConfigError("unknown GIA init mode '" + std::string(name) + "'");
}

namespace detail {

inline AttackEstimate finish(const LinearSystem& sys, Vector x, std::string name) {
  AttackEstimate e;
  require_finite(x, "attack estimate");
  e.feasible = sys.feasible_set().contains(x);
  e.residual = sys.A.rows() ? (sys.A * x - sys.b).norm() : 0.0;
  e.x = std::move(x);
  e.name = std::move(name);
  return e;
}

// With nul(A) = 0 every estimator in the solution space collapses to A^+ b'.
inline bool determined(const LinearSystem& sys) { return sys.nullity() == 0; }

}  // namespace detail

inline AttackEstimate attack_half(Index d) {
  if (d < 1) throw InvalidArgument("attack_half: d must be at least 1");
  AttackEstimate e;
  e.x = Vector::Constant(d, 0.5);
  e.name = "half";
  e.feasible = true;
  return e;
}

inline AttackEstimate attack_ls(const LinearSystem& sys) {
  return detail::finish(sys, sys.ls_solution(), "ls");
}

inline AttackEstimate attack_clamped_ls(const LinearSystem& sys) {
  return detail::finish(sys, clamp01(sys.ls_solution()), "clamped_ls");
}

inline AttackEstimate attack_cls(const LinearSystem& sys, const Vector& init = Vector()) {
  if (detail::determined(sys)) return detail::finish(sys, sys.ls_solution(), "cls");
  const Vector x0 = init.size() ? init : Vector::Constant(sys.d(), 0.5);
  if (x0.size() != sys.d()) throw InvalidArgument("attack_cls: init has wrong dimension");
  const BoxLsResult r = box_least_squares_detailed(sys.A, sys.b, x0);
  AttackEstimate e = detail::finish(sys, r.x, "cls");
  e.iterations = r.iterations;
  return e;
}

// A^+ b' + (1/2)(I - A^+ A) 1: the point of the solution space nearest 1/2.
inline AttackEstimate attack_half_star(const LinearSystem& sys) {
  const Vector x = sys.ls_solution() + 0.5 * sys.projector * Vector::Ones(sys.d());
  return detail::finish(sys, x, "half_star");
}

// Euclidean projection of 1/2 onto the feasible set.
inline AttackEstimate attack_rcc2(const LinearSystem& sys, DykstraOptions opts = {}) {
  if (detail::determined(sys)) return detail::finish(sys, sys.ls_solution(), "rcc2");
  const Vector x = dykstra_project(Vector::Constant(sys.d(), 0.5), sys.feasible_set(), opts);
  return detail::finish(sys, x, "rcc2");
}

struct Rcc1Options {
  double mu0 = 1.0;
  double mu_factor = 0.2;
  double gap_tolerance = 1e-10;    // stop once mu * nu drops below this
  double newton_tolerance = 1e-9;  // on half the squared Newton decrement
  int max_newton = 200;
  int max_outer = 60;
  double drop_tolerance = 1e-12;   // rows of W below this norm carry no constraint
};

// Multipliers of the semidefinite dual, kept with diagnostics.
struct RccWeights {
  Vector alpha;
  double min_eig = 0.0;  // smallest eigenvalue of sum alpha_i Q_i
  double objective = 0.0;
  double gap_bound = 0.0;  // mu * nu at exit
  int newton_steps = 0;
};

namespace detail {

struct Rcc1Problem {
  Matrix a;  // rows a_i of the nullspace basis (kept rows only)
  Matrix g;  // rows g_i = (q_i - 1/2) a_i
  Vector t;  // t_i = -q_i (1 - q_i)
  Index p = 0;

  Matrix gram(const Vector& alpha) const { return a.transpose() * alpha.asDiagonal() * a; }
  Vector h(const Vector& alpha) const { return g.transpose() * alpha; }

  double objective(const Vector& alpha) const {
    const Matrix m = gram(alpha);
    const Eigen::LLT<Matrix> llt(m);
    const Vector hv = h(alpha);
    return hv.dot(llt.solve(hv)) - alpha.dot(t);
  }
};

inline double barrier_value(const Rcc1Problem& pr, const Vector& alpha, double mu, bool* ok) {
  *ok = false;
  if (alpha.minCoeff() <= 0.0) return 0.0;
  const Matrix m = pr.gram(alpha);
  const Matrix slack = m - Matrix::Identity(pr.p, pr.p);
  Eigen::LLT<Matrix> ls(slack);
  if (ls.info() != Eigen::Success) return 0.0;
  const Matrix lmat = ls.matrixL();
  double logdet = 0.0;
  for (Index i = 0; i < pr.p; ++i) {
    if (!(lmat(i, i) > 0.0)) return 0.0;
    logdet += 2.0 * std::log(lmat(i, i));
  }
  Eigen::LLT<Matrix> lm(m);
  const Vector hv = pr.h(alpha);
  const double f = hv.dot(lm.solve(hv)) - alpha.dot(pr.t);
  if (!std::isfinite(f) || !std::isfinite(logdet)) return 0.0;
  *ok = true;
  return f - mu * (alpha.array().log().sum() + logdet);
}

}  // namespace detail

// Log-barrier interior point for
//   min_alpha  h(alpha)^T M(alpha)^{-1} h(alpha) - alpha^T t
//   s.t.       M(alpha) = sum alpha_i a_i a_i^T >= I,  alpha >= 0,
// in nullspace coordinates u with x = A^+ b' + W u.
inline RccWeights solve_rcc1_dual(const LinearSystem& sys, Rcc1Options opts = {}) {
  const Vector q = sys.ls_solution();
  const Matrix& w = sys.null_basis;
  const Index p = w.cols();
  std::vector<Index> kept;
  for (Index i = 0; i < w.rows(); ++i)
    if (w.row(i).norm() > opts.drop_tolerance) kept.push_back(i);
  detail::Rcc1Problem pr;
  pr.p = p;
  const Index m = static_cast<Index>(kept.size());
  pr.a.resize(m, p);
  pr.g.resize(m, p);
  pr.t.resize(m);
  for (Index r = 0; r < m; ++r) {
    const Index i = kept[static_cast<std::size_t>(r)];
    pr.a.row(r) = w.row(i);
    pr.g.row(r) = (q(i) - 0.5) * w.row(i);
    pr.t(r) = -q(i) * (1.0 - q(i));
  }

  // Smallest uniform weight with sum alpha_i Q_i >= 1.1 I.
  const Vector base_eigs = eigenvalues_descending(pr.a.transpose() * pr.a);
  if (base_eigs(p - 1) <= 1e-12) throw SolverFailure("rcc1: constraint set does not span the nullspace");
  Vector alpha = Vector::Constant(m, 1.1 / base_eigs(p - 1));

  const double nu = static_cast<double>(m + p);
  double mu = opts.mu0;
  int newton_total = 0;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    for (int it = 0; it < opts.max_newton; ++it) {
      const Matrix mm = pr.gram(alpha);
      const Eigen::LLT<Matrix> llt_m(mm);
      const Vector hv = pr.h(alpha);
      const Vector y = llt_m.solve(hv);
      const Matrix n_inv = Eigen::LLT<Matrix>(mm - Matrix::Identity(p, p)).solve(Matrix::Identity(p, p));
      const Vector ay = pr.a * y;
      // c_i = g_i - a_i (a_i^T y), stacked as rows.
      const Matrix c = pr.g - ay.asDiagonal() * pr.a;
      Vector grad = 2.0 * (pr.g * y) - ay.cwiseAbs2() - pr.t;
      Matrix hess = 2.0 * c * llt_m.solve(c.transpose());
      const Matrix an = pr.a * n_inv * pr.a.transpose();
      grad -= mu * alpha.cwiseInverse();
      grad -= mu * an.diagonal();
      hess += mu * Matrix(alpha.cwiseAbs2().cwiseInverse().asDiagonal());
      hess += mu * an.cwiseAbs2();
      hess = 0.5 * (hess + hess.transpose());
      Eigen::LDLT<Matrix> ldlt(hess);
      Vector step = -ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) step = -grad;
      const double decrement = -grad.dot(step);
      ++newton_total;
      if (decrement / 2.0 <= opts.newton_tolerance) break;
      bool ok = false;
      const double f0 = detail::barrier_value(pr, alpha, mu, &ok);
      double s = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 80; ++ls, s *= 0.5) {
        const Vector trial = alpha + s * step;
        bool trial_ok = false;
        const double f1 = detail::barrier_value(pr, trial, mu, &trial_ok);
        if (trial_ok && f1 <= f0 - 0.25 * s * decrement) {
          alpha = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // numerically flat; the next mu continues from here
    }
    if (mu * nu < opts.gap_tolerance) break;
    mu *= opts.mu_factor;
  }

  RccWeights out;
  out.alpha = Vector::Zero(w.rows());
  for (Index r = 0; r < m; ++r) out.alpha(kept[static_cast<std::size_t>(r)]) = alpha(r);
  out.min_eig = eigenvalues_descending(pr.gram(alpha))(p - 1);
  out.objective = pr.objective(alpha);
  out.gap_bound = mu * nu;
  out.newton_steps = newton_total;
  if (!std::isfinite(out.objective) || out.min_eig < 1.0 - 1e-6) {
    std::ostringstream os;
    os << "rcc1: barrier method failed (objective " << out.objective << ", min eigenvalue "
       << out.min_eig << ", gap bound " << out.gap_bound << ")";
    throw SolverFailure(os.str());
  }
  return out;
}

// x = A^+ b' - W M^{-1} h at the dual optimum. The reported radius is the
// square root of the dual objective, an upper bound on the exact Chebyshev
// radius of the feasible set.
inline AttackEstimate attack_rcc1(const LinearSystem& sys, Rcc1Options opts = {}) {
  if (detail::determined(sys)) {
    AttackEstimate e = detail::finish(sys, sys.ls_solution(), "rcc1");
    e.radius = 0.0;
    return e;
  }
  const RccWeights wts = solve_rcc1_dual(sys, opts);
  const Matrix& w = sys.null_basis;
  const Vector q = sys.ls_solution();
  Vector g_alpha = Vector::Zero(w.cols());
  for (Index i = 0; i < w.rows(); ++i) g_alpha += wts.alpha(i) * (q(i) - 0.5) * w.row(i).transpose();
  const Matrix mm = w.transpose() * wts.alpha.asDiagonal() * w;
  const Vector u = -Eigen::LLT<Matrix>(mm).solve(g_alpha);
  AttackEstimate e = detail::finish(sys, q + w * u, "rcc1");
  e.iterations = wts.newton_steps;
  e.radius = std::sqrt(std::max(0.0, wts.objective));
  return e;
}

struct GiaOptions {
  GiaInit init = GiaInit::half;
  double step = 0.05;
  int max_iterations = 5000;
  double tolerance = 1e-10;  // on the projected-gradient norm
  std::uint64_t seed = 0;     // random init only
};

// D(c_hat || c) in bits, with c_hat the scores produced by x_pas.
inline double gia_objective(const VflModel& m, const Vector& y_act, const Vector& c,
                            const Vector& x_pas) {
  const Vector ch = predict(m, y_act, x_pas);
  const Vector lc = c.cwiseMax(kScoreClip).array().log().matrix();
  const Vector lh = ch.cwiseMax(kScoreClip).array().log().matrix();
  return std::max(0.0, ch.dot(lh - lc) / std::log(2.0));
}

// Projected gradient descent on the score divergence over [0,1]^d, given the
// true passive weights. Hitting the cap returns the best point with
// converged = false.
inline AttackEstimate attack_gia(const VflModel& m, const Vector& y_act, const Vector& c,
                                 GiaOptions opts = {}) {
  const Index d = m.d();
  if (c.size() != m.k) throw InvalidArgument("attack_gia: score vector length must be k");
  Vector x;
  switch (opts.init) {
    case GiaInit::zeros: x = Vector::Zero(d); break;
    case GiaInit::half: x = Vector::Constant(d, 0.5); break;
    case GiaInit::random: {
      std::mt19937_64 rng(opts.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      x.resize(d);
      for (Index i = 0; i < d; ++i) x(i) = u(rng);
      break;
    }
  }
  const Vector lc = c.cwiseMax(kScoreClip).array().log().matrix();
  auto gradient = [&](const Vector& xv) {
    const Vector ch = predict(m, y_act, xv);
    const Vector s = ch.cwiseMax(kScoreClip).array().log().matrix() - lc;
    const Vector gz = ch.cwiseProduct(s.array().matrix() - Vector::Constant(s.size(), ch.dot(s)));
    return Vector(m.W_pas.transpose() * gz / std::log(2.0));
  };
  double f = gia_objective(m, y_act, c, x);
  double step = opts.step;
  AttackEstimate e;
  e.name = "gia";
  e.converged = false;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Vector g = gradient(x);
    if ((x - clamp01(x - g)).norm() <= opts.tolerance || f == 0.0) {
      e.converged = true;
      break;
    }
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = clamp01(x - step * g);
      const double ft = gia_objective(m, y_act, c, trial);
      if (ft <= f - 1e-4 * g.dot(x - trial)) {
        x = trial;
        f = ft;
        step *= 1.1;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {  // no descent available at machine precision
      e.converged = true;
      break;
    }
  }
  e.x = x;
  e.iterations = it;
  e.residual = f;
  e.feasible = x.minCoeff() >= 0.0 && x.maxCoeff() <= 1.0;
  return e;
}

// Uniform random guess, the baseline against which Half is compared.
inline AttackEstimate attack_random_guess(Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AttackEstimate e;
  e.x.resize(d);
  for (Index i = 0; i < d; ++i) e.x(i) = u(rng);
  e.name = "rg";
  e.feasible = true;
  return e;
}

inline AttackEstimate attack_zero(Index d) {
  AttackEstimate e;
  e.x = Vector::Zero(d);
  e.name = "zero";
  e.feasible = true;
  return e;
}

// Everything an estimator might need for a single prediction.
struct AttackContext {
  const VflModel* model = nullptr;  // required for gia
  Vector y_act;
  Vector scores;
  const LinearSystem* system = nullptr;
  GiaOptions gia;
  std::mt19937_64* rng = nullptr;  // required for rg
};

inline AttackEstimate run_attack(AttackMethod method, const AttackContext& ctx) {
  auto need_sys = [&]() -> const LinearSystem& {
    if (!ctx.system) throw InvalidArgument("run_attack: this method needs a linear system");
    return *ctx.system;
  };
  const Index d = ctx.system ? ctx.system->d() : (ctx.model ? ctx.model->d() : 0);
  switch (method) {
    case AttackMethod::half: return attack_half(d);
    case AttackMethod::half_star: return attack_half_star(need_sys());
    case AttackMethod::ls: return attack_ls(need_sys());
    case AttackMethod::clamped_ls: return attack_clamped_ls(need_sys());
    case AttackMethod::cls: return attack_cls(need_sys());
    case AttackMethod::rcc1: return attack_rcc1(need_sys());
    case AttackMethod::rcc2: return attack_rcc2(need_sys());
    case AttackMethod::gia:
      if (!ctx.model) throw InvalidArgument("run_attack: gia needs the model");
      return attack_gia(*ctx.model, ctx.y_act, ctx.scores, ctx.gia);
    case AttackMethod::rg:
      if (!ctx.rng) throw InvalidArgument("run_attack: rg needs a random engine");
      return attack_random_guess(d, *ctx.rng);
    case AttackMethod::zero: return attack_zero(d);
  }
  throw InvalidArgument("run_attack: unhandled method");
}

}  // namespace vflp

#endif  // VFLP_ATTACKS_HPP_
