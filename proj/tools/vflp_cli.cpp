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

// vflp-cli: experiment runner. Exit codes: 0 success, 2 configuration or
// input error, 3 solver failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vflp/vflp.hpp"

namespace {

using vflp::Index;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// "a..b" (inclusive) or "a,b,c".
std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const Index lo = std::stoll(text.substr(0, dots));
      const Index hi = std::stoll(text.substr(dots + 2));
      if (hi < lo) throw vflp::ConfigError("empty range '" + text + "'");
      for (Index i = lo; i <= hi; ++i) out.push_back(i);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  } catch (const std::logic_error&) {
    throw vflp::ConfigError("cannot parse index list '" + text + "'");
  }
  if (out.empty()) throw vflp::ConfigError("empty index list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw vflp::ConfigError("cannot parse number list '" + text + "'");
  }
  return out;
}

std::vector<std::string> split_names(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& it : items) {
    std::stringstream ss(it);
    std::string name;
    while (std::getline(ss, name, ',')) if (!name.empty()) out.push_back(name);
  }
  return out;
}

// Options shared by every subcommand.
struct Common {
  std::string data;
  int label_col = -1;
  double train_frac = 0.8;
  bool synthetic = false;
  Index n_samples = 5000;
  Index d_total = 10;
  int classes = 2;
  double separation = 1.0;
  double lambda = 0.0;
  int epochs = 3000;
  double lr = 0.05;
  Index predictions = 200;
  int trials = 20;
  bool full = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary;
  std::string name;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "CSV file (header row, label column last unless --label-col)");
    app->add_option("--label-col", label_col, "Label column index (default: last)");
    app->add_option("--train-frac", train_frac, "Training fraction")->check(CLI::Range(0.0, 1.0));
    app->add_flag("--synthetic", synthetic, "Use the synthetic generator (default when --data is absent)");
    app->add_option("--n-samples", n_samples, "Synthetic sample count");
    app->add_option("--d-total", d_total, "Synthetic feature count");
    app->add_option("--classes", classes, "Synthetic class count");
    app->add_option("--separation", separation, "Synthetic class separation");
    app->add_option("--lambda", lambda, "L2 regularization weight");
    app->add_option("--epochs", epochs, "Maximum training epochs");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("-N,--predictions", predictions, "Number of attacked predictions");
    app->add_option("--trials", trials, "Trials per point (black-box)");
    app->add_flag("--full", full, "Paper-scale sizes (N=1000, 100 trials, 50000 synthetic rows)");
    app->add_option("--seed", seed, "Random seed")->required();
    app->add_option("-o,--out", out, "Output CSV path (default: stdout)");
    app->add_option("--name", name, "Dataset name used in CSV rows");
    app->add_option("--summary", summary, "Also write a JSON summary of the MSE rows here");
  }

  vflp::ExperimentConfig config() const {
    vflp::ExperimentConfig cfg;
    if (!synthetic) cfg.data_path = data;
    cfg.label_column = label_col;
    cfg.train_fraction = train_frac;
    cfg.synthetic.n = full ? 50000 : n_samples;
    cfg.synthetic.d_t = d_total;
    cfg.synthetic.k = classes;
    cfg.synthetic.separation = separation;
    cfg.dataset_name = !name.empty() ? name : (cfg.data_path.empty() ? "synthetic" : data);
    cfg.predictions = full ? 1000 : predictions;
    cfg.trials = full ? 100 : trials;
    cfg.seed = seed;
    cfg.train.lambda = lambda;
    cfg.train.max_epochs = epochs;
    cfg.train.learning_rate = lr;
    return cfg;
  }
};

// Writes to --out or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw vflp::InvalidArgument("cannot write '" + path + "'");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void emit_mse(const Common& o, const std::vector<vflp::CsvRow>& rows) {
  Output out(o.out);
  out.os() << vflp::kMseCsvHeader << "\n";
  for (const auto& r : rows) vflp::write_csv_row(out.os(), r);
  if (!o.summary.empty()) {
    std::ofstream js(o.summary);
    if (!js) throw vflp::InvalidArgument("cannot write '" + o.summary + "'");
    js << vflp::mse_summary(rows, o.seed).dump(2) << "\n";
  }
}

vflp::VflSplit split_from(const std::string& passive, Index d_t) {
  vflp::VflSplit s;
  s.passive = parse_index_list(passive);
  std::vector<bool> used(static_cast<std::size_t>(d_t), false);
  for (Index i : s.passive) {
    if (i < 0 || i >= d_t) throw vflp::ConfigError("passive feature index out of range");
    used[static_cast<std::size_t>(i)] = true;
  }
  for (Index j = 0; j < d_t; ++j)
    if (!used[static_cast<std::size_t>(j)]) s.active.push_back(j);
  s.validate(d_t);
  return s;
}

std::vector<vflp::AttackMethod> methods_from(const std::vector<std::string>& names) {
  std::vector<vflp::AttackMethod> out;
  for (const auto& n : split_names(names)) out.push_back(vflp::parse_attack(n));
  if (out.empty()) throw vflp::ConfigError("no attack methods given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-inference attacks and defenses for vertically split logistic regression"};
  app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model and save it as JSON");
  Common train_opts;
  train_opts.attach(train_cmd);
  std::string train_passive = "0..0";
  std::string model_out = "model.json";
  train_cmd->add_option("--passive-features", train_passive, "Passive feature indices, a..b or a,b,c");
  train_cmd->add_option("--model-out", model_out, "Where to write the model");

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "Attack N predictions of one model");
  Common attack_opts;
  attack_opts.attach(attack_cmd);
  std::string attack_passive = "0..0";
  std::string model_in;
  std::vector<std::string> attack_methods{"half_star"};
  std::string gia_init = "half";
  attack_cmd->add_option("--passive-features", attack_passive, "Passive feature indices");
  attack_cmd->add_option("--model", model_in, "Model JSON (trained on the same data); trains one if absent");
  attack_cmd->add_option("--method", attack_methods, "Attack method(s), comma separated");
  attack_cmd->add_option("--init", gia_init, "GIA initialization: zeros, half or random");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Closed-form versus empirical MSE on the same predictions");
  Common eval_opts;
  eval_opts.attach(eval_cmd);
  std::string eval_passive = "0..0";
  eval_cmd->add_option("--passive-features", eval_passive, "Passive feature indices");

  // blackbox
  auto* bb_cmd = app.add_subcommand("blackbox", "Single-feature attacks with sign knowledge only");
  Common bb_opts;
  bb_opts.attach(bb_cmd);
  int bb_case = 2;
  std::string n_grid = "1..100";
  bb_cmd->add_option("--case", bb_case, "1: b = 0, 2: same signs, 3: opposite signs")->check(CLI::Range(1, 3));
  bb_cmd->add_option("--n-grid", n_grid, "Range of N, a..b");

  // figure12
  auto* f12_cmd = app.add_subcommand("figure12", "Black-box MSE against N for all three cases");
  Common f12_opts;
  f12_opts.attach(f12_cmd);
  std::string f12_grid = "1..100";
  f12_cmd->add_option("--n-grid", f12_grid, "Range of N, a..b");

  // figure1
  auto* f1_cmd = app.add_subcommand("figure1", "MSE per feature against passive dimension d");
  Common f1_opts;
  f1_opts.attach(f1_cmd);
  std::string d_grid;
  std::vector<std::string> f1_methods;
  Index windows = 0;
  std::string f1_init = "half";
  f1_cmd->add_option("--d-grid", d_grid, "Passive dimensions, a..b or a,b,c (default 1..d_t)");
  f1_cmd->add_option("--attacks", f1_methods, "Attack list (default: all)");
  f1_cmd->add_option("--windows", windows, "Use only the first W moving windows (0: all)");
  f1_cmd->add_option("--init", f1_init, "GIA initialization");

  // defend
  auto* def_cmd = app.add_subcommand("defend", "Apply one defense and report attack MSE and score fidelity");
  Common def_opts;
  def_opts.attach(def_cmd);
  std::string scheme = "pps1";
  std::string alphas = "1";
  std::string h_kind = "neg_identity";
  Index def_d = 5;
  def_cmd->add_option("--scheme", scheme, "pps1, s1, s2, s3 or label");
  def_cmd->add_option("--alpha", alphas, "Noise budget(s), comma separated (eps for label)");
  def_cmd->set_help_flag("--help", "Print this help message and exit");
  def_cmd->add_option("--h", h_kind, "pps1 transform: neg_identity or optimal");
  def_cmd->add_option("-d,--passive-dim", def_d, "Passive dimension (window starting at feature 0)");

  // tradeoff
  auto* tr_cmd = app.add_subcommand("tradeoff", "Sweep noise budgets: KL against Half* MSE");
  Common tr_opts;
  tr_opts.attach(tr_cmd);
  Index tr_d = 5;
  tr_cmd->add_option("-d,--passive-dim", tr_d, "Passive dimension (window starting at feature 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train_cmd) {
      const auto cfg = train_opts.config();
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      vflp::TrainConfig tc = cfg.train;
      tc.seed = *cfg.seed;
      const vflp::VflModel m = vflp::train(ds, split_from(train_passive, ds.d_t()), tc);
      vflp::save_model(m, model_out);
      std::cout << "train_accuracy," << vflp::accuracy(m, ds, ds.train_indices()) << "\n"
                << "test_accuracy," << vflp::accuracy(m, ds, ds.test_indices()) << "\n";
    } else if (*attack_cmd) {
      const auto cfg = attack_opts.config();
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      const auto methods = methods_from(attack_methods);
      const auto init = vflp::parse_gia_init(gia_init);
      vflp::VflModel m;
      if (!model_in.empty()) {
        m = vflp::load_model(model_in);
        m.split.validate(ds.d_t());
      } else {
        vflp::TrainConfig tc = cfg.train;
        tc.seed = *cfg.seed;
        m = vflp::train(ds, split_from(attack_passive, ds.d_t()), tc);
      }
      const auto rows = vflp::prediction_rows(ds, cfg.predictions);
      const auto runs = vflp::run_attacks(m, ds, rows, methods, *cfg.seed, init);
      std::vector<vflp::CsvRow> csv;
      for (const auto& r : runs) csv.push_back({cfg.dataset_name, m.d(), vflp::attack_name(r.method), r.mse()});
      emit_mse(attack_opts, csv);
    } else if (*eval_cmd) {
      const auto cfg = eval_opts.config();
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      vflp::TrainConfig tc = cfg.train;
      tc.seed = *cfg.seed;
      const vflp::VflModel m = vflp::train(ds, split_from(eval_passive, ds.d_t()), tc);
      const auto rows = vflp::prediction_rows(ds, cfg.predictions);
      const auto runs = vflp::run_attacks(m, ds, rows, {vflp::AttackMethod::ls, vflp::AttackMethod::half_star},
                                          *cfg.seed);
      const vflp::Matrix a = vflp::difference_matrix(m.k) * m.W_pas;
      const auto sys = vflp::LinearSystem::from(a, vflp::Vector::Zero(a.rows()));
      const auto cf = vflp::closed_form_mse(sys, vflp::moments_of_rows(runs[0].truths), m.k);
      emit_mse(eval_opts, {{cfg.dataset_name, m.d(), "ls", runs[0].mse(), cf.ls.mse_closed, cf.ls.lower, cf.ls.upper},
                           {cfg.dataset_name, m.d(), "half_star", runs[1].mse(), cf.half_star.mse_closed,
                            cf.half_star.lower, cf.half_star.upper}});
    } else if (*bb_cmd || *f12_cmd) {
      const Common& o = *bb_cmd ? bb_opts : f12_opts;
      const auto cfg = o.config();
      const auto grid = parse_index_list(*bb_cmd ? n_grid : f12_grid);
      const int trials = o.full ? 100 : (*f12_cmd && o.trials == 20 ? 100 : o.trials);
      Output out(o.out);
      out.os() << "case,N,mse\n";
      std::vector<int> cases = *bb_cmd ? std::vector<int>{bb_case} : std::vector<int>{1, 2, 3};
      for (int c : cases) {
        for (const auto& p : vflp::run_blackbox_figure(c, grid.front(), grid.back(), trials, *cfg.seed)) {
          out.os() << c << ',' << p.n << ',' << std::setprecision(12) << p.mse << "\n";
        }
      }
    } else if (*f1_cmd) {
      auto cfg = f1_opts.config();
      if (!d_grid.empty()) cfg.d_grid = parse_index_list(d_grid);
      if (!f1_methods.empty()) cfg.attacks = methods_from(f1_methods);
      cfg.max_windows = f1_opts.full ? 0 : windows;
      cfg.gia_init = vflp::parse_gia_init(f1_init);
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      emit_mse(f1_opts, vflp::run_figure1(cfg, ds));
    } else if (*def_cmd) {
      const auto cfg = def_opts.config();
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      if (def_d < 1 || def_d > ds.d_t()) throw vflp::ConfigError("passive dimension out of range");
      Output out(def_opts.out);
      if (scheme == "pps1") {
        vflp::TransformKind kind;
        if (h_kind == "neg_identity") kind = vflp::TransformKind::neg_identity;
        else if (h_kind == "optimal") kind = vflp::TransformKind::optimal_ls;
        else throw vflp::ConfigError("unknown --h '" + h_kind + "'");
        vflp::TrainConfig tc = cfg.train;
        tc.seed = *cfg.seed;
        if (tc.lambda == 0.0) tc.lambda = 1e-4;  // the invariance argument needs a strictly convex loss
        const auto o = vflp::run_pps1(ds, vflp::VflSplit::window(ds.d_t(), def_d, 0), kind, tc,
                                      cfg.predictions, *cfg.seed);
        out.os() << vflp::kPps1CsvHeader << "\n"
                 << h_kind << ',' << std::setprecision(12) << o.mse_ls_before << ',' << o.mse_ls_after << ','
                 << o.mse_half_star_before << ',' << o.mse_half_star_after << ',' << o.avg_kl << ','
                 << o.predicted_delta << "\n";
      } else {
        const auto s = vflp::parse_noise_scheme(scheme);
        vflp::TrainConfig tc = cfg.train;
        tc.seed = *cfg.seed;
        const auto m = vflp::train(ds, vflp::VflSplit::window(ds.d_t(), def_d, 0), tc);
        const auto rows = vflp::prediction_rows(ds, cfg.predictions);
        out.os() << vflp::kTradeoffCsvHeader << "\n";
        for (double a : parse_double_list(alphas)) {
          vflp::write_tradeoff_row(out.os(), vflp::evaluate_noise(m, ds, rows, s, a, *cfg.seed));
        }
      }
    } else if (*tr_cmd) {
      const auto cfg = tr_opts.config();
      const vflp::Dataset ds = vflp::load_dataset(cfg);
      if (tr_d < 1 || tr_d > ds.d_t()) throw vflp::ConfigError("passive dimension out of range");
      Output out(tr_opts.out);
      out.os() << vflp::kTradeoffCsvHeader << "\n";
      for (const auto& p : vflp::run_defense_tradeoff(cfg, ds, tr_d)) vflp::write_tradeoff_row(out.os(), p);
    }
  } catch (const vflp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vflp::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vflp::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
