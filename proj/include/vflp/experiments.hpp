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

// Experiment drivers shared by the command-line tool and the acceptance
// suite. Every runner is deterministic given its config.

#ifndef VFLP_EXPERIMENTS_HPP_
#define VFLP_EXPERIMENTS_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vflp/attacks.hpp"
#include "vflp/blackbox.hpp"
#include "vflp/dataset.hpp"
#include "vflp/defense.hpp"
#include "vflp/error.hpp"
#include "vflp/metrics.hpp"
#include "vflp/model.hpp"
#include "vflp/system.hpp"

namespace vflp {

struct ExperimentConfig {
  // Data source: a CSV path, or synthetic when empty.
  std::string data_path;
  int label_column = -1;
  double train_fraction = 0.8;
  SyntheticSpec synthetic{.n = 5000};
  std::string dataset_name = "synthetic";

  std::vector<Index> d_grid;  // empty: 1..d_t
  std::vector<AttackMethod> attacks{AttackMethod::half,      AttackMethod::rg,   AttackMethod::zero,
                                    AttackMethod::ls,        AttackMethod::clamped_ls,
                                    AttackMethod::half_star, AttackMethod::cls,  AttackMethod::rcc1,
                                    AttackMethod::rcc2,      AttackMethod::gia};
  GiaInit gia_init = GiaInit::half;
  Index predictions = 200;  // N
  int trials = 20;
  Index max_windows = 0;    // 0: every window
  std::optional<std::uint64_t> seed;
  TrainConfig train;

  std::uint64_t require_seed() const {
    if (!seed) throw ConfigError("a seed is required");
    return *seed;
  }
};

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.require_seed();
  if (cfg.data_path.empty()) {
    SyntheticSpec spec = cfg.synthetic;
    spec.seed = seed;
    return synthesize(spec, cfg.train_fraction);
  }
  return prepare_csv(cfg.data_path, cfg.label_column, cfg.train_fraction, seed);
}

// First N test rows (all of them if fewer).
inline std::vector<Index> prediction_rows(const Dataset& ds, Index n) {
  auto rows = ds.test_indices();
  if (rows.empty()) throw InvalidArgument("prediction_rows: dataset has no test rows");
  if (n > 0 && static_cast<Index>(rows.size()) > n) rows.resize(static_cast<std::size_t>(n));
  return rows;
}

// Maps clean logits (and the row index) to the scores the adversary sees.
using ScoreFn = std::function<Vector(const Vector& z, Index row)>;

struct AttackRun {
  AttackMethod method;
  Matrix truths;     // N x d
  Matrix estimates;  // N x d
  int infeasible = 0;
  double mse() const { return empirical_mse(truths, estimates); }
};

// Runs every method on the same predictions. With `observed` set, the
// adversary sees those scores (system tagged noisy) instead of the clean
// ones. `attacker` defaults to the true model.
inline std::vector<AttackRun> run_attacks(const VflModel& model, const Dataset& ds,
                                          const std::vector<Index>& rows,
                                          const std::vector<AttackMethod>& methods, std::uint64_t seed,
                                          GiaInit gia_init = GiaInit::half, const ScoreFn& observed = {},
                                          const VflModel* attacker = nullptr,
                                          const Matrix* truth_override = nullptr) {
  const VflModel& adv = attacker ? *attacker : model;
  const Index n = static_cast<Index>(rows.size());
  const Index d = model.d();
  std::vector<AttackRun> runs;
  for (AttackMethod m : methods) runs.push_back({m, Matrix(n, d), Matrix(n, d), 0});
  std::mt19937_64 rng(seed);
  for (Index r = 0; r < n; ++r) {
    const Vector full = ds.X.row(rows[static_cast<std::size_t>(r)]).transpose();
    const Vector y = model.active_part(full);
    const Vector x = truth_override ? Vector(truth_override->row(r).transpose()) : model.passive_part(full);
    const Vector z = model.logits(y, model.passive_part(full));
    const Vector c = observed ? observed(z, rows[static_cast<std::size_t>(r)]) : softmax(z);
    const LinearSystem sys =
        build_system(adv, adv.active_part(full), c, observed ? ScoreSource::noisy : ScoreSource::clean);
    AttackContext ctx;
    ctx.model = &adv;
    ctx.y_act = adv.active_part(full);
    ctx.scores = c;
    ctx.system = &sys;
    ctx.gia.init = gia_init;
    ctx.gia.seed = seed + static_cast<std::uint64_t>(r);
    ctx.rng = &rng;
    for (auto& run : runs) {
      const AttackEstimate e = run_attack(run.method, ctx);
      run.truths.row(r) = x.transpose();
      run.estimates.row(r) = e.x.transpose();
      if (!e.feasible) ++run.infeasible;
    }
  }
  return runs;
}

struct CsvRow {
  std::string dataset;
  Index d = 0;
  std::string attack;
  double mse_empirical = std::numeric_limits<double>::quiet_NaN();
  double mse_closed = std::numeric_limits<double>::quiet_NaN();
  double lb = std::numeric_limits<double>::quiet_NaN();
  double ub = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kMseCsvHeader = "dataset,d,attack,mse_empirical,mse_closed,lb,ub";

inline void write_number(std::ostream& os, double v) {
  if (std::isnan(v)) return;
  os << std::setprecision(12) << v;
}

inline void write_csv_row(std::ostream& os, const CsvRow& r) {
  os << r.dataset << ',' << r.d << ',' << r.attack << ',';
  write_number(os, r.mse_empirical);
  os << ',';
  write_number(os, r.mse_closed);
  os << ',';
  write_number(os, r.lb);
  os << ',';
  write_number(os, r.ub);
  os << '\n';
}

// Plot-ready summary of MSE rows, grouped by attack. NaN fields are omitted.
inline nlohmann::json mse_summary(const std::vector<CsvRow>& rows, std::uint64_t seed) {
  nlohmann::json out;
  out["seed"] = seed;
  out["attacks"] = nlohmann::json::object();
  for (const CsvRow& r : rows) {
    nlohmann::json point{{"dataset", r.dataset}, {"d", r.d}, {"mse_empirical", r.mse_empirical}};
    if (!std::isnan(r.mse_closed)) {
      point["mse_closed"] = r.mse_closed;
      point["lb"] = r.lb;
      point["ub"] = r.ub;
    }
    out["attacks"][r.attack].push_back(std::move(point));
  }
  return out;
}

// MSE per attack for every passive dimension, averaged over the moving
// window of passive feature sets. LS and Half* rows also carry the closed
// form and bounds from whole-dataset moments, averaged the same way.
inline std::vector<CsvRow> run_figure1(const ExperimentConfig& cfg, const Dataset& ds) {
  const std::uint64_t seed = cfg.require_seed();
  std::vector<Index> grid = cfg.d_grid;
  if (grid.empty())
    for (Index d = 1; d <= ds.d_t(); ++d) grid.push_back(d);
  const auto rows = prediction_rows(ds, cfg.predictions);
  std::vector<CsvRow> out;
  for (Index d : grid) {
    auto windows = space_windows(ds.d_t(), d);
    if (cfg.max_windows > 0 && static_cast<Index>(windows.size()) > cfg.max_windows) {
      windows.resize(static_cast<std::size_t>(cfg.max_windows));
    }
    std::vector<CsvRow> acc(cfg.attacks.size());
    for (std::size_t a = 0; a < cfg.attacks.size(); ++a) {
      acc[a] = {cfg.dataset_name, d, attack_name(cfg.attacks[a]), 0.0};
      const bool closed = cfg.attacks[a] == AttackMethod::ls || cfg.attacks[a] == AttackMethod::half_star;
      if (closed) acc[a].mse_closed = acc[a].lb = acc[a].ub = 0.0;
    }
    for (std::size_t s = 0; s < windows.size(); ++s) {
      TrainConfig tc = cfg.train;
      tc.seed = seed + s;
      const VflModel model = train(ds, windows[s], tc);
      const auto runs = run_attacks(model, ds, rows, cfg.attacks, seed + 1000 + s, cfg.gia_init);
      const LinearSystem sys = LinearSystem::from(difference_matrix(model.k) * model.W_pas,
                                                  Vector::Zero(model.k - 1));
      const ClosedForms cf = closed_form_mse(sys, moments(ds, windows[s].passive), model.k);
      for (std::size_t a = 0; a < runs.size(); ++a) {
        acc[a].mse_empirical += runs[a].mse();
        const MseReport* rep = cfg.attacks[a] == AttackMethod::ls          ? &cf.ls
                               : cfg.attacks[a] == AttackMethod::half_star ? &cf.half_star
                                                                           : nullptr;
        if (rep) {
          acc[a].mse_closed += rep->mse_closed;
          acc[a].lb += rep->lower;
          acc[a].ub += rep->upper;
        }
      }
    }
    const double w = static_cast<double>(windows.size());
    for (auto& r : acc) {
      r.mse_empirical /= w;
      r.mse_closed /= w;
      r.lb /= w;
      r.ub /= w;
      out.push_back(r);
    }
  }
  return out;
}

struct BlackboxPoint {
  Index n = 0;
  double mse = 0.0;
};

inline std::vector<BlackboxPoint> run_blackbox_figure(int case_id, Index n_min, Index n_max, int trials,
                                                      std::uint64_t seed) {
  if (n_min < 1 || n_max < n_min) throw ConfigError("blackbox: invalid N range");
  if (trials < 1) throw ConfigError("blackbox: trials must be positive");
  const BlackboxSimulation sim = default_simulation(case_id);
  std::vector<BlackboxPoint> out;
  for (Index n = n_min; n <= n_max; ++n) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
    out.push_back({n, blackbox_mean_mse(sim, n, trials, rng)});
  }
  return out;
}

struct TradeoffPoint {
  std::string scheme;
  double param = 0.0;  // alpha, or eps for the class-label scheme
  double avg_kl = 0.0;
  double mse_half_star = 0.0;
  double accuracy = 0.0;
  double baseline_accuracy = 0.0;
  bool labels_preserved = true;
};

inline constexpr const char* kTradeoffCsvHeader =
    "scheme,param,avg_kl,mse_half_star,accuracy,baseline_accuracy,labels_preserved";

// Noisy scores for one scheme on every prediction, measured against the
// clean scores (KL), the true labels (accuracy) and the true features
// (Half* MSE from the noisy system).
inline TradeoffPoint evaluate_noise(const VflModel& model, const Dataset& ds, const std::vector<Index>& rows,
                                    NoiseScheme scheme, double param, std::uint64_t seed) {
  const Matrix a = difference_matrix(model.k) * model.W_pas;
  NoisePlan plan = pps2_optimal_direction(LinearSystem::from(a, Vector::Zero(a.rows())), model.k, param, scheme);
  TradeoffPoint p;
  p.param = param;
  const char* names[] = {"s1", "s2", "s3", "label"};
  p.scheme = names[static_cast<int>(scheme)];
  std::size_t hit = 0, base_hit = 0;
  double kl = 0.0;
  ScoreFn fn = [&](const Vector& z, Index row) {
    const Vector clean = softmax(z);
    const Vector noisy = pps2_apply(z, plan);
    kl += kl_divergence(clean, noisy);
    const Index before = argmax_lowest(clean), after = argmax_lowest(noisy);
    if (before != after) p.labels_preserved = false;
    const int label = ds.y[static_cast<std::size_t>(row)];
    base_hit += before == label;
    hit += after == label;
    return noisy;
  };
  const auto runs = run_attacks(model, ds, rows, {AttackMethod::half_star}, seed, GiaInit::half, fn);
  const double n = static_cast<double>(rows.size());
  p.avg_kl = kl / n;
  p.mse_half_star = runs[0].mse();
  p.accuracy = static_cast<double>(hit) / n;
  p.baseline_accuracy = static_cast<double>(base_hit) / n;
  return p;
}

struct TradeoffGrid {
  std::vector<double> alphas{0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> scheme3_alphas{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  std::vector<double> epsilons{0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4};
};

inline std::vector<TradeoffPoint> run_defense_tradeoff(const ExperimentConfig& cfg, const Dataset& ds, Index d,
                                                       const TradeoffGrid& grid = {}) {
  const std::uint64_t seed = cfg.require_seed();
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const VflModel model = train(ds, VflSplit::window(ds.d_t(), d, 0), tc);
  const auto rows = prediction_rows(ds, cfg.predictions);
  std::vector<TradeoffPoint> out;
  for (NoiseScheme s : {NoiseScheme::s1, NoiseScheme::s2}) {
    for (double a : grid.alphas) out.push_back(evaluate_noise(model, ds, rows, s, a, seed));
  }
  for (double a : grid.scheme3_alphas) out.push_back(evaluate_noise(model, ds, rows, NoiseScheme::s3, a, seed));
  for (double e : grid.epsilons) {
    if (e * model.k < 1.0) out.push_back(evaluate_noise(model, ds, rows, NoiseScheme::class_label, e, seed));
  }
  return out;
}

inline void write_tradeoff_row(std::ostream& os, const TradeoffPoint& p) {
  os << p.scheme << ',' << std::setprecision(12) << p.param << ',' << p.avg_kl << ',' << p.mse_half_star << ','
     << p.accuracy << ',' << p.baseline_accuracy << ',' << (p.labels_preserved ? 1 : 0) << '\n';
}

// Reparameterization defense end to end: train the reference model, train
// again on H-transformed passive features, then attack the disclosed model
// and compare with the original features.
struct Pps1Outcome {
  double mse_ls_before = 0.0, mse_ls_after = 0.0;
  double mse_half_star_before = 0.0, mse_half_star_after = 0.0;
  double avg_kl = 0.0;  // clean vs. retrained scores, bits
  double predicted_delta = 0.0;  // (4/d) Tr(A^+A K_half) over the prediction rows
  Matrix H;
};

inline constexpr const char* kPps1CsvHeader =
    "h,mse_ls_before,mse_ls_after,mse_half_star_before,mse_half_star_after,avg_kl,predicted_delta";

inline Pps1Outcome run_pps1(const Dataset& ds, const VflSplit& split, TransformKind kind, const TrainConfig& tc,
                            Index predictions, std::uint64_t seed) {
  const VflModel base = train(ds, split, tc);
  const auto rows = prediction_rows(ds, predictions);
  const Index d = split.d();
  OrthonormalTransform t = OrthonormalTransform::neg_identity(d);
  const Matrix a = difference_matrix(base.k) * base.W_pas;
  const LinearSystem shape = LinearSystem::from(a, Vector::Zero(a.rows()));
  if (kind == TransformKind::optimal_ls) t = pps1_optimal_H(shape, moments(ds, split.passive).K0);
  const Pps1Data moved = pps1_transform(ds, split.passive, t);
  const VflModel retrained = train(moved.data, split, tc);

  const std::vector<AttackMethod> methods{AttackMethod::ls, AttackMethod::half_star};
  const auto before = run_attacks(base, ds, rows, methods, seed);
  // The adversary attacks the disclosed model on its own scores; the error is
  // measured against the untransformed features.
  const Matrix truth = select_cols(select_rows(ds.X, rows), split.passive);
  const auto after = run_attacks(retrained, moved.data, rows, methods, seed, GiaInit::half, {}, nullptr, &truth);

  Pps1Outcome o;
  o.H = t.H;
  o.mse_ls_before = before[0].mse();
  o.mse_half_star_before = before[1].mse();
  o.mse_ls_after = after[0].mse();
  o.mse_half_star_after = after[1].mse();
  double kl = 0.0;
  for (Index r : rows) {
    kl += kl_divergence(predict_full(base, ds.X.row(r).transpose()),
                        predict_full(retrained, moved.data.X.row(r).transpose()));
  }
  o.avg_kl = kl / static_cast<double>(rows.size());
  const Matrix p = Matrix::Identity(d, d) - shape.projector;
  o.predicted_delta = 4.0 * (p * moments_of_rows(truth).K_half).trace() / static_cast<double>(d);
  return o;
}

}  // namespace vflp

#endif  // VFLP_EXPERIMENTS_HPP_
