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

#ifndef VFLP_METRICS_HPP_
#define VFLP_METRICS_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vflp/dataset.hpp"
#include "vflp/error.hpp"
#include "vflp/model.hpp"
#include "vflp/numerics.hpp"
#include "vflp/system.hpp"

namespace vflp {

// (1/(N d)) sum_i |x_i - xhat_i|^2 over matching rows.
inline double empirical_mse(const Matrix& truths, const Matrix& estimates) {
  if (truths.rows() != estimates.rows() || truths.cols() != estimates.cols()) {
    throw InvalidArgument("empirical_mse: truth and estimate shapes differ");
  }
  if (truths.size() == 0) throw InvalidArgument("empirical_mse: no samples");
  return (truths - estimates).squaredNorm() / static_cast<double>(truths.size());
}

struct MomentMatrices {
  Matrix K0;      // E[x x^T]
  Matrix K_half;  // E[(x - 1/2)(x - 1/2)^T]
  Matrix K_mu;    // covariance about the mean
  Vector mu;
  Index count = 0;
};

// Sample moments of the rows of x.
inline MomentMatrices moments_of_rows(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw InvalidArgument("moments: empty sample");
  const double n = static_cast<double>(x.rows());
  MomentMatrices m;
  m.count = x.rows();
  m.mu = x.colwise().mean().transpose();
  m.K0 = x.transpose() * x / n;
  const Matrix centered_half = x.array() - 0.5;
  m.K_half = centered_half.transpose() * centered_half / n;
  const Matrix centered = x.rowwise() - m.mu.transpose();
  m.K_mu = centered.transpose() * centered / n;
  return m;
}

// Moments over all rows of the dataset, restricted to the given columns.
inline MomentMatrices moments(const Dataset& ds, const std::vector<Index>& features) {
  return moments_of_rows(select_cols(ds.X, features));
}

struct MseReport {
  std::string attack;
  double mse_empirical = std::numeric_limits<double>::quiet_NaN();
  double mse_closed = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  Index d = 0;
  int k = 0;
  Index n = 0;

  bool sandwich_holds(double slack = 1e-9) const {
    return lower <= mse_closed + slack && mse_closed <= upper + slack;
  }
};

struct ClosedForms {
  MseReport ls;         // closed form Tr(P K0)/d with eigenvalue bounds
  MseReport half_star;  // closed form Tr(P K_half)/d with eigenvalue bounds
  double mu_lower = 0.0;  // Tr(P K_mu)/d, below both
};

// Exact MSE of the LS and Half* estimates in terms of the null projector P and
// the moment matrices, plus trace-inequality bounds.
inline ClosedForms closed_form_mse(const LinearSystem& sys, const MomentMatrices& m, int k = 0) {
  const Index d = sys.d();
  if (m.K0.rows() != d) throw InvalidArgument("closed forms: moment size does not match the system");
  const double dd = static_cast<double>(d);
  const Matrix& p = sys.projector;
  ClosedForms out;
  auto fill = [&](MseReport& r, const char* name, const Matrix& kz) {
    r.attack = name;
    r.mse_closed = (p * kz).trace() / dd;
    const TraceBounds b = von_neumann_bounds(kz, p);
    r.lower = b.lower / dd;
    r.upper = b.upper / dd;
    r.d = d;
    r.k = k;
    r.n = m.count;
  };
  fill(out.ls, "ls", m.K0);
  fill(out.half_star, "half_star", m.K_half);
  out.mu_lower = (p * m.K_mu).trace() / dd;
  return out;
}

inline void require_probability(const Vector& p, const char* who) {
  require_finite(p, who);
  if (p.minCoeff() < -1e-12 || std::abs(p.sum() - 1.0) > 1e-8) {
    throw InvalidArgument(std::string(who) + ": not a probability vector");
  }
}

// D(p || q) in bits; q clipped below at the score clip.
inline double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("kl_divergence: length mismatch");
  require_probability(p, "kl_divergence");
  require_probability(q, "kl_divergence");
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    s += p(i) * (std::log2(p(i)) - std::log2(std::max(q(i), kScoreClip)));
  }
  return std::max(0.0, s);
}

inline double total_variation(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("total_variation: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

// -sum p log2 q.
inline double cross_entropy(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("cross_entropy: length mismatch");
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) s -= p(i) * std::log2(std::max(q(i), kScoreClip));
  return s;
}

// Passive windows {s, ..., s+d-1 mod d_t}. All windows coincide when d = d_t,
// so only one is returned then.
inline std::vector<VflSplit> space_windows(Index d_t, Index d) {
  if (d < 1 || d > d_t) throw InvalidArgument("space_windows: need 1 <= d <= d_t");
  std::vector<VflSplit> out;
  const Index count = d == d_t ? 1 : d_t;
  for (Index s = 0; s < count; ++s) out.push_back(VflSplit::window(d_t, d, s));
  return out;
}

// Retrains on every window (seed offset by the window start) and averages
// eval(model, window_index). `max_windows` > 0 truncates the sweep.
template <class Eval>
double average_over_space(const Dataset& ds, Index d, const TrainConfig& base, Eval&& eval,
                          std::vector<double>* per_window = nullptr, Index max_windows = 0) {
  auto windows = space_windows(ds.d_t(), d);
  if (max_windows > 0 && static_cast<Index>(windows.size()) > max_windows) windows.resize(max_windows);
  double total = 0.0;
  for (std::size_t s = 0; s < windows.size(); ++s) {
    TrainConfig cfg = base;
    cfg.seed = base.seed + s;
    const VflModel m = train(ds, windows[s], cfg);
    const double v = eval(m, static_cast<Index>(s));
    if (per_window) per_window->push_back(v);
    total += v;
  }
  return total / static_cast<double>(windows.size());
}

}  // namespace vflp

#endif  // VFLP_METRICS_HPP_
