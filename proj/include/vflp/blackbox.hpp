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

// Single passive feature, unknown weight omega and bias b. The adversary sees
// v_i = omega * x_i + b over N predictions and only knows sign information.

#ifndef VFLP_BLACKBOX_HPP_
#define VFLP_BLACKBOX_HPP_

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "vflp/error.hpp"
#include "vflp/numerics.hpp"

namespace vflp {

enum class SignKnowledge { b_zero, same_sign, opposite_sign_known, opposite_sign_unknown };

struct BlackboxEstimate {
  Vector x;
  bool undecidable = false;  // mixed-sign observations under opposite signs
  bool degenerate = false;   // all observations equal
  int omega_sign = 0;        // orientation used (+1, -1; 0 when undecidable)
};

namespace detail {

inline Index argmax_abs(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  return best;
}

inline Index argmin_abs(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) < std::abs(v(best))) best = i;
  return best;
}

inline void require_observations(const Vector& v, const char* who) {
  if (v.size() < 1) throw InvalidArgument(std::string(who) + ": need at least one observation");
  require_finite(v, who);
}

// Increasing (+1) or decreasing (-1) min-max map of signed observations.
inline BlackboxEstimate oriented_minmax(const Vector& v, int omega_sign) {
  BlackboxEstimate e;
  e.omega_sign = omega_sign;
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  if (!(hi > lo)) {
    e.x = Vector::Zero(v.size());
    e.degenerate = true;
    return e;
  }
  e.x = omega_sign > 0 ? Vector((v.array() - lo) / (hi - lo)) : Vector((hi - v.array()) / (hi - lo));
  return e;
}

}  // namespace detail

// b = 0: the largest |v| is taken to come from x = 1.
inline BlackboxEstimate bb_case1(const Vector& v) {
  detail::require_observations(v, "bb_case1");
  const Index m = detail::argmax_abs(v);
  if (v(m) == 0.0) throw InvalidArgument("bb_case1: all observations are zero");
  BlackboxEstimate e;
  e.x = v / v(m);
  e.omega_sign = v(m) > 0 ? 1 : -1;
  return e;
}

// omega, b and v share a sign: the smallest |v| maps to 0 and the largest to 1.
inline BlackboxEstimate bb_case2(const Vector& v) {
  detail::require_observations(v, "bb_case2");
  const Index lo = detail::argmin_abs(v), hi = detail::argmax_abs(v);
  BlackboxEstimate e;
  e.omega_sign = v(hi) >= 0 ? 1 : -1;
  if (v(hi) == v(lo)) {
    e.x = Vector::Zero(v.size());
    e.degenerate = true;
    return e;
  }
  e.x = (v.array() - v(lo)) / (v(hi) - v(lo));
  return e;
}

// The same estimate written as 1 / (1 - a_i), a_i = (v_i - v_M) / (v_i - v_m).
inline Vector bb_case2_ratio_form(const Vector& v) {
  const Index lo = detail::argmin_abs(v), hi = detail::argmax_abs(v);
  Vector x(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) == v(lo)) {
      x(i) = 0.0;
      continue;
    }
    const double a = (v(i) - v(hi)) / (v(i) - v(lo));
    x(i) = 1.0 / (1.0 - a);
  }
  return x;
}

// omega and b have opposite signs. When every observation has one sign, that
// is taken as the sign of b (so omega has the other sign) and the oriented
// min-max estimate is returned. Mixed signs leave the orientation undecided;
// the answer is then 1/2 unless a population mean of x is supplied, in which
// case the orientation whose implied sample mean is closer to it is used.
inline BlackboxEstimate bb_case3(const Vector& v, std::optional<double> population_mean = std::nullopt) {
  detail::require_observations(v, "bb_case3");
  const bool all_pos = v.minCoeff() > 0.0;
  const bool all_neg = v.maxCoeff() < 0.0;
  if (all_pos) return detail::oriented_minmax(v, -1);
  if (all_neg) return detail::oriented_minmax(v, +1);
  if (population_mean) {
    const BlackboxEstimate up = detail::oriented_minmax(v, +1);
    const BlackboxEstimate down = detail::oriented_minmax(v, -1);
    const double gap_up = std::abs(up.x.mean() - *population_mean);
    const double gap_down = std::abs(down.x.mean() - *population_mean);
    return gap_up <= gap_down ? up : down;
  }
  BlackboxEstimate e;
  e.x = Vector::Constant(v.size(), 0.5);
  e.undecidable = true;
  return e;
}

inline BlackboxEstimate bb_estimate(SignKnowledge knowledge, const Vector& v,
                                    std::optional<double> population_mean = std::nullopt) {
  switch (knowledge) {
    case SignKnowledge::b_zero: return bb_case1(v);
    case SignKnowledge::same_sign: return bb_case2(v);
    case SignKnowledge::opposite_sign_known:
    case SignKnowledge::opposite_sign_unknown: return bb_case3(v, population_mean);
  }
  throw InvalidArgument("bb_estimate: unknown sign knowledge");
}

struct BlackboxSimulation {
  SignKnowledge knowledge = SignKnowledge::same_sign;
  double omega = 0.98916;
  double b = 3.048751;
};

// Default simulation parameters per case: b = 0 for case 1, the same-sign
// setting for case 2, and an opposite-sign pair for case 3.
inline BlackboxSimulation default_simulation(int case_id) {
  switch (case_id) {
    case 1: return {SignKnowledge::b_zero, 0.98916, 0.0};
    case 2: return {SignKnowledge::same_sign, 0.98916, 3.048751};
    case 3: return {SignKnowledge::opposite_sign_unknown, -0.98916, 3.048751};
    default: throw ConfigError("blackbox case must be 1, 2 or 3");
  }
}

// Mean over trials of the per-sample squared error with x ~ U[0,1]^N.
inline double blackbox_mean_mse(const BlackboxSimulation& sim, Index n, int trials, std::mt19937_64& rng) {
  if (n < 1 || trials < 1) throw InvalidArgument("blackbox_mean_mse: need n >= 1 and trials >= 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = u(rng);
    const Vector v = (sim.omega * x).array() + sim.b;
    const BlackboxEstimate e = bb_estimate(sim.knowledge, v);
    total += (e.x - x).squaredNorm() / static_cast<double>(n);
  }
  return total / trials;
}

}  // namespace vflp

#endif  // VFLP_BLACKBOX_HPP_
