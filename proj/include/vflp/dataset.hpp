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

#ifndef VFLP_DATASET_HPP_
#define VFLP_DATASET_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vflp/error.hpp"
#include "vflp/numerics.hpp"

namespace vflp {

// Raw CSV contents. Cells stay as text until encoding; a column is
// categorical when any of its cells fails to parse as a number.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t label_column = 0;
  std::vector<bool> categorical;  // per column; the label column is ignored

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_columns() const { return header.size(); }
};

// Numeric features plus integer labels, before normalization.
struct NumericTable {
  Matrix X;
  std::vector<int> y;
  int k = 0;
  std::vector<std::string> feature_names;
};

struct Dataset {
  Matrix X;                // n x d_t, entries in [0,1]
  std::vector<int> y;      // labels in [0, k-1]
  int k = 0;
  std::vector<std::string> feature_names;
  std::vector<bool> train_mask;  // test rows are the complement

  Index n() const { return X.rows(); }
  Index d_t() const { return X.cols(); }

  std::vector<Index> train_indices() const { return indices_where(true); }
  std::vector<Index> test_indices() const { return indices_where(false); }

 private:
  std::vector<Index> indices_where(bool train) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < train_mask.size(); ++i)
      if (train_mask[i] == train) out.push_back(static_cast<Index>(i));
    return out;
  }
};

struct SyntheticSpec {
  Index n = 50000;
  Index d_t = 10;
  int k = 2;
  double separation = 1.0;  // scale of the +-1 hypercube class means
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Parses CSV text. `label_column` < 0 selects the last column.
inline RawTable parse_csv(std::istream& in, int label_column = -1) {
  RawTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument("load_csv: ragged row at line " + std::to_string(line_no) + " (" +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()) + ")");
    }
    for (const auto& c : cells) {
      if (c.empty()) {
        throw InvalidArgument("load_csv: missing value at line " + std::to_string(line_no));
      }
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InvalidArgument("load_csv: empty file");
  if (t.rows.empty()) throw InvalidArgument("load_csv: no data rows");
  if (t.header.size() < 2) throw InvalidArgument("load_csv: need at least one feature and a label");
  const int cols = static_cast<int>(t.header.size());
  const int lc = label_column < 0 ? cols - 1 : label_column;
  if (lc >= cols) throw InvalidArgument("load_csv: label column out of range");
  t.label_column = static_cast<std::size_t>(lc);
  t.categorical.assign(t.header.size(), false);
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    for (const auto& row : t.rows) {
      if (!detail::parse_number(row[j])) {
        t.categorical[j] = true;
        break;
      }
    }
  }
  std::vector<std::string> labels;
  for (const auto& row : t.rows) labels.push_back(row[t.label_column]);
  std::sort(labels.begin(), labels.end());
  if (std::unique(labels.begin(), labels.end()) - labels.begin() < 2) {
    throw InvalidArgument("load_csv: label column needs at least two distinct values");
  }
  return t;
}

inline RawTable load_csv(const std::string& path, int label_column = -1) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_csv: cannot open '" + path + "'");
  return parse_csv(in, label_column);
}

// Label strings map to 0..k-1. Numeric labels sort numerically, others
// lexicographically.
inline std::vector<int> encode_labels(const RawTable& t, int* k_out = nullptr) {
  const bool numeric = !t.categorical[t.label_column];
  auto less = [numeric](const std::string& a, const std::string& b) {
    if (numeric) return *detail::parse_number(a) < *detail::parse_number(b);
    return a < b;
  };
  std::map<std::string, int, decltype(less)> ids(less);
  for (const auto& row : t.rows) ids.emplace(row[t.label_column], 0);
  int next = 0;
  for (auto& [key, id] : ids) id = next++;
  std::vector<int> y;
  y.reserve(t.rows.size());
  for (const auto& row : t.rows) y.push_back(ids.at(row[t.label_column]));
  if (k_out) *k_out = next;
  return y;
}

// Each category becomes the training-row mean of the label index for rows in
// that category. Categories never seen in training fall back to the global
// training mean.
inline NumericTable encode_categoricals(const RawTable& t, const std::vector<bool>& train_mask) {
  if (train_mask.size() != t.num_rows()) {
    throw InvalidArgument("encode_categoricals: mask size does not match row count");
  }
  NumericTable out;
  out.y = encode_labels(t, &out.k);
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < t.num_columns(); ++j)
    if (j != t.label_column) feature_cols.push_back(j);
  const Index n = static_cast<Index>(t.num_rows());
  out.X.resize(n, static_cast<Index>(feature_cols.size()));
  double global_sum = 0.0;
  std::size_t global_count = 0;
  for (std::size_t i = 0; i < t.num_rows(); ++i) {
    if (train_mask[i]) {
      global_sum += out.y[i];
      ++global_count;
    }
  }
  const double global_mean = global_count ? global_sum / global_count : 0.0;
  for (std::size_t c = 0; c < feature_cols.size(); ++c) {
    const std::size_t j = feature_cols[c];
    out.feature_names.push_back(t.header[j]);
    if (!t.categorical[j]) {
      for (std::size_t i = 0; i < t.num_rows(); ++i)
        out.X(static_cast<Index>(i), static_cast<Index>(c)) = *detail::parse_number(t.rows[i][j]);
      continue;
    }
    std::map<std::string, std::pair<double, std::size_t>> stats;
    for (std::size_t i = 0; i < t.num_rows(); ++i) {
      if (!train_mask[i]) continue;
      auto& s = stats[t.rows[i][j]];
      s.first += out.y[i];
      ++s.second;
    }
    for (std::size_t i = 0; i < t.num_rows(); ++i) {
      const auto it = stats.find(t.rows[i][j]);
      out.X(static_cast<Index>(i), static_cast<Index>(c)) =
          it == stats.end() ? global_mean : it->second.first / it->second.second;
    }
  }
  return out;
}

// Per-feature min-max scaling. With `fit_rows` empty the range is taken over
// all rows; otherwise only over the listed rows, and the result is clamped.
inline Matrix minmax_scale(const Matrix& x, const std::vector<Index>& fit_rows = {}) {
  Matrix out = x;
  for (Index j = 0; j < x.cols(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (fit_rows.empty()) {
      lo = x.col(j).minCoeff();
      hi = x.col(j).maxCoeff();
    } else {
      for (Index i : fit_rows) {
        lo = std::min(lo, x(i, j));
        hi = std::max(hi, x(i, j));
      }
    }
    if (hi > lo) {
      out.col(j) = ((x.col(j).array() - lo) / (hi - lo)).matrix();
    } else {
      out.col(j).setZero();
    }
  }
  return fit_rows.empty() ? out : Matrix(out.cwiseMax(0.0).cwiseMin(1.0));
}

inline Dataset normalize(const NumericTable& tbl, const std::vector<bool>& train_mask = {},
                         bool train_only = false) {
  require_finite(tbl.X, "normalize");
  Dataset ds;
  std::vector<Index> fit_rows;
  if (train_only) {
    if (train_mask.size() != static_cast<std::size_t>(tbl.X.rows())) {
      throw InvalidArgument("normalize: train-only scaling needs a full train mask");
    }
    for (std::size_t i = 0; i < train_mask.size(); ++i)
      if (train_mask[i]) fit_rows.push_back(static_cast<Index>(i));
  }
  ds.X = minmax_scale(tbl.X, fit_rows);
  ds.y = tbl.y;
  ds.k = tbl.k;
  ds.feature_names = tbl.feature_names;
  ds.train_mask = train_mask.empty() ? std::vector<bool>(tbl.y.size(), true) : train_mask;
  return ds;
}

// Seeded shuffle; the first lround(fraction * n) shuffled rows are training rows.
inline std::vector<bool> make_split_mask(Index n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("split: fraction must lie strictly between 0 and 1");
  }
  const Index n_train = static_cast<Index>(std::lround(fraction * static_cast<double>(n)));
  if (n_train < 1 || n - n_train < 1) {
    throw InvalidArgument("split: need at least one sample on each side");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n_train; ++i) mask[static_cast<std::size_t>(order[i])] = true;
  return mask;
}

inline Dataset split(Dataset ds, double fraction, std::uint64_t seed) {
  ds.train_mask = make_split_mask(ds.n(), fraction, seed);
  return ds;
}

// CSV to Dataset: split first so the categorical encoding only sees training
// rows, then normalize.
inline Dataset prepare_csv(const std::string& path, int label_column, double train_fraction,
                           std::uint64_t seed, bool train_only_normalization = false) {
  const RawTable raw = load_csv(path, label_column);
  const auto mask = make_split_mask(static_cast<Index>(raw.num_rows()), train_fraction, seed);
  return normalize(encode_categoricals(raw, mask), mask, train_only_normalization);
}

// Gaussian clusters around +-separation hypercube vertices, balanced labels,
// min-max normalized. Same spec, same output.
inline Dataset synthesize(const SyntheticSpec& spec, double train_fraction = 0.8) {
  if (spec.k < 2) throw InvalidArgument("synthesize: k must be at least 2");
  if (spec.d_t < 1) throw InvalidArgument("synthesize: d_t must be at least 1");
  if (spec.n < spec.k) throw InvalidArgument("synthesize: need n >= k");
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix means(spec.k, spec.d_t);
  for (int c = 0; c < spec.k; ++c)
    for (Index j = 0; j < spec.d_t; ++j) means(c, j) = coin(rng) ? spec.separation : -spec.separation;
  std::vector<int> y(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) y[static_cast<std::size_t>(i)] = static_cast<int>(i % spec.k);
  std::shuffle(y.begin(), y.end(), rng);
  NumericTable tbl;
  tbl.k = spec.k;
  tbl.y = y;
  tbl.X.resize(spec.n, spec.d_t);
  for (Index i = 0; i < spec.n; ++i)
    for (Index j = 0; j < spec.d_t; ++j)
      tbl.X(i, j) = means(y[static_cast<std::size_t>(i)], j) + spec.noise_scale * gauss(rng);
  for (Index j = 0; j < spec.d_t; ++j) tbl.feature_names.push_back("f" + std::to_string(j));
  return normalize(tbl, make_split_mask(spec.n, train_fraction, spec.seed ^ 0x9e3779b97f4a7c15ULL));
}

// Rows `idx` of X as a new matrix.
inline Matrix select_rows(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
  return out;
}

inline Matrix select_cols(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = x.col(idx[j]);
  return out;
}

}  // namespace vflp

#endif  // VFLP_DATASET_HPP_
