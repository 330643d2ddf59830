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

#ifndef VFLP_MODEL_HPP_
#define VFLP_MODEL_HPP_

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "vflp/dataset.hpp"
#include "vflp/error.hpp"
#include "vflp/numerics.hpp"

namespace vflp {

// Which columns of the full feature vector each party holds.
struct VflSplit {
  std::vector<Index> passive;
  std::vector<Index> active;

  Index d() const { return static_cast<Index>(passive.size()); }
  Index d_t() const { return static_cast<Index>(passive.size() + active.size()); }

  void validate(Index d_t_expected) const {
    std::vector<int> seen(static_cast<std::size_t>(d_t_expected), 0);
    for (const auto* part : {&passive, &active}) {
      for (Index i : *part) {
        if (i < 0 || i >= d_t_expected) throw InvalidArgument("VflSplit: feature index out of range");
        if (seen[static_cast<std::size_t>(i)]++) throw InvalidArgument("VflSplit: duplicate feature index");
      }
    }
    if (d_t() != d_t_expected) throw InvalidArgument("VflSplit: split does not cover all features");
  }

  // Passive block {start, ..., start+d-1} taken modulo d_t; the rest is active.
  static VflSplit window(Index d_t, Index d, Index start) {
    if (d < 0 || d > d_t) throw InvalidArgument("VflSplit::window: need 0 <= d <= d_t");
    VflSplit s;
    std::vector<bool> pas(static_cast<std::size_t>(d_t), false);
    for (Index j = 0; j < d; ++j) {
      const Index idx = (start + j) % d_t;
      s.passive.push_back(idx);
      pas[static_cast<std::size_t>(idx)] = true;
    }
    for (Index j = 0; j < d_t; ++j)
      if (!pas[static_cast<std::size_t>(j)]) s.active.push_back(j);
    return s;
  }
};

struct VflModel {
  Matrix W_act;  // k x (d_t - d)
  Matrix W_pas;  // k x d
  Vector b;      // k
  int k = 0;
  VflSplit split;
  double lambda = 0.0;
  std::uint64_t seed = 0;

  Index d() const { return W_pas.cols(); }

  // Full k x d_t weight matrix in original column order.
  Matrix full_weights() const {
    Matrix w(k, split.d_t());
    for (std::size_t j = 0; j < split.passive.size(); ++j)
      w.col(split.passive[j]) = W_pas.col(static_cast<Index>(j));
    for (std::size_t j = 0; j < split.active.size(); ++j)
      w.col(split.active[j]) = W_act.col(static_cast<Index>(j));
    return w;
  }

  Vector logits(const Vector& y_act, const Vector& x_pas) const {
    if (y_act.size() != W_act.cols() || x_pas.size() != W_pas.cols()) {
      throw InvalidArgument("VflModel: feature dimension mismatch");
    }
    return W_act * y_act + W_pas * x_pas + b;
  }

  Vector passive_part(const Vector& full) const { return gather(full, split.passive); }
  Vector active_part(const Vector& full) const { return gather(full, split.active); }

  void validate() const {
    if (k < 2) throw InvalidArgument("VflModel: k must be at least 2");
    if (W_act.rows() != k || W_pas.rows() != k || b.size() != k) {
      throw InvalidArgument("VflModel: parameter rows must equal k");
    }
    if (W_pas.cols() != split.d() || W_act.cols() != static_cast<Index>(split.active.size())) {
      throw InvalidArgument("VflModel: parameter columns do not match the split");
    }
    require_finite(W_act, "VflModel W_act");
    require_finite(W_pas, "VflModel W_pas");
    require_finite(b, "VflModel b");
  }

 private:
  static Vector gather(const Vector& full, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Index>(j)) = full(idx[j]);
    return out;
  }
};

struct TrainConfig {
  double learning_rate = 0.05;
  int max_epochs = 3000;
  int patience = 20;
  double tolerance = 1e-6;       // relative improvement on validation loss
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // carved from the training rows
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

inline Vector softmax(const Vector& z) {
  require_finite(z, "softmax");
  const Vector e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Row-wise softmax of an n x k logit matrix.
inline Matrix softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    const auto row = z.row(i).array() - z.row(i).maxCoeff();
    out.row(i) = row.exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

inline Index argmax_lowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

// Average cross-entropy plus lambda (|W|_F^2 + |b|^2), and its gradient.
struct LossGrad {
  double loss = 0.0;
  Matrix grad_w;
  Vector grad_b;
};

inline LossGrad loss_and_gradient(const Matrix& w, const Vector& b, const Matrix& x,
                                  const std::vector<int>& y, double lambda) {
  const Index n = x.rows();
  const Matrix z = (x * w.transpose()).rowwise() + b.transpose();
  Matrix c = softmax_rows(z);
  LossGrad out;
  double ce = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    ce -= std::log(std::max(c(i, yi), std::numeric_limits<double>::min()));
    c(i, yi) -= 1.0;
  }
  out.loss = ce / static_cast<double>(n) + lambda * (w.squaredNorm() + b.squaredNorm());
  out.grad_w = c.transpose() * x / static_cast<double>(n) + 2.0 * lambda * w;
  out.grad_b = c.colwise().sum().transpose() / static_cast<double>(n) + 2.0 * lambda * b;
  return out;
}

inline double loss_only(const Matrix& w, const Vector& b, const Matrix& x, const std::vector<int>& y,
                        double lambda) {
  return loss_and_gradient(w, b, x, y, lambda).loss;
}

namespace detail {

inline std::vector<int> select_labels(const std::vector<int>& y, const std::vector<Index>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(y[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

// Full-batch Adam with early stopping on a seeded validation carve-out of the
// training rows. Returns the best-validation parameters.
inline VflModel train(const Dataset& ds, const VflSplit& split, const TrainConfig& cfg) {
  if (ds.n() == 0) throw InvalidArgument("train: empty dataset");
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be positive");
  if (cfg.lambda < 0.0) throw InvalidArgument("train: lambda must be nonnegative");
  if (ds.k < 2) throw InvalidArgument("train: need at least two classes");
  split.validate(ds.d_t());

  std::vector<Index> rows = ds.train_indices();
  if (rows.empty()) throw InvalidArgument("train: no training rows");
  std::mt19937_64 rng(cfg.seed);
  std::vector<Index> fit_rows = rows, val_rows;
  const auto n_val = static_cast<std::size_t>(std::lround(cfg.validation_fraction * rows.size()));
  if (n_val >= 1 && rows.size() - n_val >= 1) {
    std::shuffle(rows.begin(), rows.end(), rng);
    val_rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
  } else {
    val_rows = fit_rows;
  }
  const Matrix x_fit = select_rows(ds.X, fit_rows);
  const Matrix x_val = select_rows(ds.X, val_rows);
  const auto y_fit = detail::select_labels(ds.y, fit_rows);
  const auto y_val = detail::select_labels(ds.y, val_rows);

  const Index k = ds.k, d_t = ds.d_t();
  std::normal_distribution<double> init(0.0, 0.01);
  Matrix w(k, d_t);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < d_t; ++j) w(i, j) = init(rng);
  Vector b = Vector::Zero(k);

  Matrix mw = Matrix::Zero(k, d_t), vw = Matrix::Zero(k, d_t);
  Vector mb = Vector::Zero(k), vb = Vector::Zero(k);
  Matrix best_w = w;
  Vector best_b = b;
  double best_val = loss_only(w, b, x_val, y_val, cfg.lambda);
  int since_best = 0;
  double p1 = 1.0, p2 = 1.0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const LossGrad g = loss_and_gradient(w, b, x_fit, y_fit, cfg.lambda);
    if (!std::isfinite(g.loss)) throw SolverFailure("train: loss diverged (non-finite)");
    p1 *= cfg.beta1;
    p2 *= cfg.beta2;
    mw = cfg.beta1 * mw + (1.0 - cfg.beta1) * g.grad_w;
    vw = cfg.beta2 * vw + (1.0 - cfg.beta2) * g.grad_w.cwiseAbs2();
    mb = cfg.beta1 * mb + (1.0 - cfg.beta1) * g.grad_b;
    vb = cfg.beta2 * vb + (1.0 - cfg.beta2) * g.grad_b.cwiseAbs2();
    const double lr = cfg.learning_rate * std::sqrt(1.0 - p2) / (1.0 - p1);
    w -= (lr * mw.array() / (vw.array().sqrt() + cfg.adam_eps)).matrix();
    b -= (lr * mb.array() / (vb.array().sqrt() + cfg.adam_eps)).matrix();

    const double val = loss_only(w, b, x_val, y_val, cfg.lambda);
    if (!std::isfinite(val)) throw SolverFailure("train: validation loss diverged (non-finite)");
    if (val < best_val - cfg.tolerance * std::abs(best_val)) {
      best_val = val;
      best_w = w;
      best_b = b;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  VflModel m;
  m.k = ds.k;
  m.split = split;
  m.lambda = cfg.lambda;
  m.seed = cfg.seed;
  m.b = best_b;
  m.W_pas = select_cols(best_w, split.passive);
  m.W_act = select_cols(best_w, split.active);
  return m;
}

// Confidence scores for one prediction.
inline Vector predict(const VflModel& m, const Vector& y_act, const Vector& x_pas) {
  return softmax(m.logits(y_act, x_pas));
}

// Confidence scores from a full-width feature row.
inline Vector predict_full(const VflModel& m, const Vector& x_full) {
  return predict(m, m.active_part(x_full), m.passive_part(x_full));
}

inline double accuracy(const VflModel& m, const Dataset& ds, const std::vector<Index>& rows) {
  if (rows.empty()) throw InvalidArgument("accuracy: empty row selection");
  std::size_t hit = 0;
  for (Index i : rows) {
    const Vector z = m.logits(m.active_part(ds.X.row(i).transpose()),
                              m.passive_part(ds.X.row(i).transpose()));
    if (argmax_lowest(z) == ds.y[static_cast<std::size_t>(i)]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

inline double accuracy(const VflModel& m, const Dataset& ds, const std::vector<bool>& mask) {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) rows.push_back(static_cast<Index>(i));
  return accuracy(m, ds, rows);
}

inline nlohmann::json to_json(const VflModel& m) {
  auto flat = [](const Matrix& a) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(a.size()));
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) v.push_back(a(i, j));
    return v;
  };
  nlohmann::json j;
  j["k"] = m.k;
  j["d"] = m.d();
  j["d_t"] = m.split.d_t();
  j["passive"] = m.split.passive;
  j["active"] = m.split.active;
  j["W_act"] = flat(m.W_act);
  j["W_pas"] = flat(m.W_pas);
  j["b"] = std::vector<double>(m.b.data(), m.b.data() + m.b.size());
  j["lambda"] = m.lambda;
  j["seed"] = m.seed;
  return j;
}

inline VflModel model_from_json(const nlohmann::json& j) {
  try {
    VflModel m;
    m.k = j.at("k").get<int>();
    m.split.passive = j.at("passive").get<std::vector<Index>>();
    m.split.active = j.at("active").get<std::vector<Index>>();
    m.lambda = j.at("lambda").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    auto unflat = [&](const char* key, Index rows, Index cols) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (static_cast<Index>(v.size()) != rows * cols) {
        throw InvalidArgument(std::string("model json: wrong length for ") + key);
      }
      Matrix a(rows, cols);
      for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) a(r, c) = v[static_cast<std::size_t>(r * cols + c)];
      return a;
    };
    m.W_pas = unflat("W_pas", m.k, m.split.d());
    m.W_act = unflat("W_act", m.k, static_cast<Index>(m.split.active.size()));
    m.b = unflat("b", m.k, 1);
    m.split.validate(j.at("d_t").get<Index>());
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model json: ") + e.what());
  }
}

inline void save_model(const VflModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("save_model: cannot write '" + path + "'");
  out << to_json(m).dump(2) << '\n';
}

inline VflModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_model: cannot open '" + path + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("load_model: ") + e.what());
  }
}

}  // namespace vflp

#endif  // VFLP_MODEL_HPP_
