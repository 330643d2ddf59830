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

#include "vflp/defense.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "vflp/attacks.hpp"
#include "vflp/metrics.hpp"

namespace vflp {
namespace {

Vector V(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double max_abs(const Matrix& v) { return v.cwiseAbs().maxCoeff(); }

// Columns spanning exactly [0,1], so min-max renormalization is an identity.
Dataset spanning_dataset(std::mt19937_64& rng, Index n, Index d_t) {
  Dataset ds;
  ds.k = 2;
  ds.X = testing::random_uniform(rng, n * d_t).reshaped(n, d_t);
  ds.X.row(0).setZero();
  ds.X.row(1).setOnes();
  for (Index i = 0; i < n; ++i) ds.y.push_back(static_cast<int>(i % 2));
  ds.train_mask.assign(static_cast<std::size_t>(n), true);
  return ds;
}

TEST(Pps1TransformTest, NegIdentityIsOneMinusX) {
  std::mt19937_64 rng(1);
  Dataset ds = spanning_dataset(rng, 30, 3);
  ds.X.row(5) << 0.3, 0.8, 0.1;
  const Pps1Data out = pps1_transform(ds, {0, 1}, OrthonormalTransform::neg_identity(2));
  EXPECT_NEAR(out.data.X(5, 0), 0.7, 1e-15);
  EXPECT_NEAR(out.data.X(5, 1), 0.2, 1e-15);
  EXPECT_EQ(out.data.X(5, 2), 0.1);  // active column untouched
  EXPECT_LE(max_abs(out.data.X.leftCols(2) - (1.0 - ds.X.leftCols(2).array()).matrix()), 1e-15);
}

TEST(Pps1TransformTest, IdentityAndPermutation) {
  std::mt19937_64 rng(2);
  const Dataset ds = spanning_dataset(rng, 20, 3);
  EXPECT_LE(max_abs(pps1_transform(ds, {0, 1, 2}, {Matrix::Identity(3, 3)}).data.X - ds.X), 1e-15);
  Matrix swap = Matrix::Zero(2, 2);
  swap << 0, 1, 1, 0;
  const Pps1Data p = pps1_transform(ds, {0, 2}, {swap});
  EXPECT_LE(max_abs(p.data.X.col(0) - ds.X.col(2)), 1e-15);
  EXPECT_LE(max_abs(p.data.X.col(2) - ds.X.col(0)), 1e-15);
  EXPECT_THROW(pps1_transform(ds, {0, 1}, {2.0 * Matrix::Identity(2, 2)}), InvalidArgument);
}

TEST(Pps1TransformTest, EquivalentModelKeepsLogits) {
  std::mt19937_64 rng(3);
  const Dataset ds = spanning_dataset(rng, 50, 4);
  VflModel m;
  m.k = 3;
  m.split = VflSplit::window(4, 3, 1);
  m.W_pas = testing::random_matrix(rng, 3, 3);
  m.W_act = testing::random_matrix(rng, 3, 1);
  m.b = testing::random_matrix(rng, 3, 1);
  const OrthonormalTransform t{testing::random_orthonormal(rng, 3)};
  const Pps1Data p = pps1_transform(ds, m.split.passive, t);
  const VflModel eq = pps1_equivalent_model(m, p.map);
  for (Index i = 0; i < ds.n(); ++i) {
    const Vector before = m.logits(m.active_part(ds.X.row(i).transpose()), m.passive_part(ds.X.row(i).transpose()));
    const Vector after =
        eq.logits(eq.active_part(p.data.X.row(i).transpose()), eq.passive_part(p.data.X.row(i).transpose()));
    EXPECT_LE(max_abs(before - after), 1e-10);
  }
}

TEST(RevealParamsTest, Examples) {
  std::mt19937_64 rng(4);
  VflModel m;
  m.k = 2;
  m.split = VflSplit::window(3, 2, 0);
  m.W_pas = testing::random_matrix(rng, 2, 2);
  m.W_act = testing::random_matrix(rng, 2, 1);
  m.b = Vector::Zero(2);
  EXPECT_EQ(pps1_reveal_params(m, Matrix::Identity(2, 2)).W_pas, m.W_pas);
  EXPECT_EQ(pps1_reveal_params(m, -Matrix::Identity(2, 2)).W_pas, -m.W_pas);
  const Matrix h = testing::random_orthonormal(rng, 2);
  const VflModel r = pps1_reveal_params(m, h);
  const Vector x = testing::random_uniform(rng, 2);
  EXPECT_LE(max_abs(r.W_pas * (h * x) - m.W_pas * x), 1e-10);
  EXPECT_THROW(pps1_reveal_params(m, 2.0 * Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(OptimalHTest, DeterminedSystemGivesNegIdentity) {
  std::mt19937_64 rng(5);
  const Matrix a = testing::random_matrix(rng, 3, 3);
  const LinearSystem s = LinearSystem::from(a, Vector::Zero(3));
  const OrthonormalTransform h = pps1_optimal_H(s, testing::random_psd(rng, 3));
  EXPECT_LE(max_abs(h.H + Matrix::Identity(3, 3)), 1e-12);
}

TEST(OptimalHTest, HandExample) {
  // P = diag(1,0), K0 = I: raw objective Tr(diag(2,1)) + 2 = 5, per feature 2.5.
  Matrix a(1, 2);
  a << 1, 0;
  const LinearSystem s = LinearSystem::from(a, V({0.0}));
  const Matrix p = Matrix::Identity(2, 2) - s.projector;
  EXPECT_NEAR(pps1_optimal_value(p, Matrix::Identity(2, 2)) * 2.0, 5.0, 1e-12);
  const OrthonormalTransform h = pps1_optimal_H(s, Matrix::Identity(2, 2));
  EXPECT_TRUE(is_orthonormal(h.H));
  EXPECT_NEAR(pps1_ls_objective(p, Matrix::Identity(2, 2), h.H), 2.5, 1e-12);
}

TEST(OptimalHTest, DominatesRandomOrthonormal) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Index d = 3 + trial % 3;
    const Matrix a = testing::random_matrix(rng, 2, d);
    const LinearSystem s = LinearSystem::from(a, Vector::Zero(2));
    const Matrix x = testing::random_uniform(rng, 200 * d).reshaped(200, d);
    const Matrix k0 = x.transpose() * x / 200.0;
    const Matrix p = Matrix::Identity(d, d) - s.projector;
    const OrthonormalTransform h = pps1_optimal_H(s, k0);
    const double best = pps1_ls_objective(p, k0, h.H);
    EXPECT_NEAR(best, pps1_optimal_value(p, k0), 1e-6);
    for (int i = 0; i < 1000; ++i) {
      EXPECT_LE(pps1_ls_objective(p, k0, testing::random_orthonormal(rng, d)), best + 1e-9);
    }
  }
}

TEST(OptimalHTest, ObjectiveMatchesSimulatedAttack) {
  // The objective is the LS error when the adversary uses W H^T on raw scores.
  std::mt19937_64 rng(7);
  const Index d = 4;
  const Matrix w = testing::random_matrix(rng, 3, d);
  const Matrix j = difference_matrix(3);
  const Matrix x = testing::random_uniform(rng, 300 * d).reshaped(300, d);
  const Matrix k0 = x.transpose() * x / 300.0;
  const LinearSystem s = LinearSystem::from(j * w, Vector::Zero(2));
  const Matrix h = pps1_optimal_H(s, k0).H;
  const Matrix a_new = j * w * h.transpose();
  const Matrix a_new_pinv = pinv(a_new);
  double err = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    const Vector hx = h * xi;
    err += (xi - a_new_pinv * (a_new * hx)).squaredNorm();
  }
  EXPECT_NEAR(err / (300.0 * d), pps1_ls_objective(Matrix::Identity(d, d) - s.projector, k0, h), 1e-10);
}

TEST(Pps2DirectionTest, OptimalityAndAttainment) {
  std::mt19937_64 rng(8);
  const int k = 4;
  const Matrix a = difference_matrix(k) * testing::random_matrix(rng, k, 5);
  const LinearSystem s = LinearSystem::from(a, Vector::Zero(k - 1));
  const double alpha = 2.5;
  const NoisePlan plan = pps2_optimal_direction(s, k, alpha);
  EXPECT_NEAR(plan.v1.norm(), 1.0, 1e-10);
  const Matrix apj = s.A_pinv * difference_matrix(k);
  const Matrix s_star = alpha * plan.v1 * plan.v1.transpose();
  EXPECT_NEAR((apj * s_star * apj.transpose()).trace(), plan.max_objective(), 1e-8);
  for (int i = 0; i < 1000; ++i) {
    Matrix sr = testing::random_psd(rng, k);
    sr *= alpha / sr.trace();
    EXPECT_LE((apj * sr * apj.transpose()).trace(), plan.max_objective() + 1e-8);
  }
  // Sign convention: the largest-magnitude entry is positive.
  Index big = 0;
  plan.v1.cwiseAbs().maxCoeff(&big);
  EXPECT_GT(plan.v1(big), 0.0);
}

TEST(Scheme1Test, Examples) {
  NoisePlan plan;
  plan.v1 = V({0.8, 0.6});
  plan.alpha = 0.0;
  EXPECT_EQ(pps2_scheme1_logits(V({1.0, 0.0}), plan), V({1.0, 0.0}));
  plan.alpha = 4.0;
  // i* = first entry: n~ = (a, b).
  Vector n = pps2_scheme1_logits(V({1.0, 0.0}), plan) - V({1.0, 0.0});
  EXPECT_LE(max_abs(n - 2.0 * V({0.8, 0.6})), 1e-14);
  // i* = second entry: n~ = (a, a).
  n = pps2_scheme1_logits(V({0.0, 1.0}), plan) - V({0.0, 1.0});
  EXPECT_LE(max_abs(n - 2.0 * V({0.8, 0.8}) / std::sqrt(1.28)), 1e-14);
}

TEST(SchemeTest, ArgmaxPreservedOnRandomInputs) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 2000; ++t) {
    const int k = 2 + t % 5;
    const Vector z = testing::random_matrix(rng, k, 1, 3.0);
    NoisePlan plan;
    plan.v1 = testing::random_matrix(rng, k, 1).normalized();
    plan.alpha = std::pow(10.0, -2.0 + 4.0 * testing::random_uniform(rng, 1)(0));
    const Index label = argmax_lowest(softmax(z));
    EXPECT_EQ(argmax_lowest(pps2_scheme1(z, plan)), label);
    EXPECT_EQ(argmax_lowest(pps2_scheme2(z, plan)), label);
    EXPECT_EQ(argmax_lowest(pps2_scheme3(z, std::min(plan.alpha, 0.99))), label);
    EXPECT_EQ(argmax_lowest(pps2_class_label(z, 0.5 / k)), label);
  }
}

TEST(Scheme2Test, Examples) {
  NoisePlan plan;
  plan.v1 = V({0.6, 0.8});
  plan.alpha = 0.0;
  EXPECT_EQ(pps2_scheme2_logits(V({1.0, 0.0}), plan), V({1.0, 0.0}));
  plan.alpha = 1.0;
  // z' = (2.6, 0.8): the top entry already leads, so nothing is lifted.
  EXPECT_LE(max_abs(pps2_scheme2_logits(V({2.0, 0.0}), plan) - V({2.6, 0.8})), 1e-15);
  // z' = (1.1, 1.3): the top entry is lifted to the maximum.
  const Vector zt = pps2_scheme2_logits(V({0.5, 0.5 - 1e-3}), plan);
  EXPECT_GE(zt(0), zt(1));
  EXPECT_NEAR(zt(0), 1.3 - 1e-3, 1e-9);
}

TEST(Scheme3Test, Examples) {
  const Vector z = V({2.0, -1.0, 0.5});
  EXPECT_LE(max_abs(pps2_scheme3(z, 0.0) - softmax(z)), 1e-15);
  EXPECT_LE(max_abs(pps2_scheme3(z, 0.4) - softmax(0.6 * z)), 1e-15);
  EXPECT_LE(max_abs(pps2_scheme3(z, 1.0 - 1e-12) - Vector::Constant(3, 1.0 / 3.0)), 1e-9);
  EXPECT_THROW(pps2_scheme3(z, 1.0), InvalidArgument);
}

TEST(ClassLabelTest, Examples) {
  EXPECT_LE(max_abs(pps2_class_label(V({1.0, 0.0}), 0.1) - V({0.9, 0.1})), 1e-15);
  EXPECT_THROW(pps2_class_label(V({1.0, 0.0}), 0.5), InvalidArgument);
  // Once the label vector is sharper than the scores, KL grows as eps shrinks.
  const Vector z = V({0.3, 1.2, -0.4});
  double previous = -1.0;
  for (double eps : {0.1, 0.01, 1e-4, 1e-8}) {
    const double kl = kl_divergence(softmax(z), pps2_class_label(z, eps));
    EXPECT_GT(kl, previous);
    previous = kl;
  }
}

TEST(MseUnderNoiseTest, Examples) {
  std::mt19937_64 rng(10);
  const int k = 3;
  const Matrix a = difference_matrix(k) * testing::random_matrix(rng, k, 4);
  const LinearSystem s = LinearSystem::from(a, Vector::Zero(k - 1));
  const Matrix k0 = testing::random_psd(rng, 4);
  const double clean = (s.projector * k0).trace() / 4.0;
  EXPECT_NEAR(mse_under_noise(s, Matrix::Zero(k, k), k0, k), clean, 1e-12);
  const NoisePlan plan = pps2_optimal_direction(s, k, 1.5);
  const Matrix s_star = plan.alpha * plan.v1 * plan.v1.transpose();
  EXPECT_NEAR(mse_under_noise(s, s_star, k0, k), clean + plan.max_objective() / 4.0, 1e-10);
  EXPECT_NEAR(mse_under_noise(s, 2.0 * s_star, k0, k) - clean, 2.0 * (mse_under_noise(s, s_star, k0, k) - clean),
              1e-10);
}

TEST(MseUnderNoiseTest, MatchesSimulationWithRandomSignNoise) {
  // LS error on noisy scores averages to the closed form.
  std::mt19937_64 rng(11);
  const int k = 3;
  const Index d = 4;
  VflModel m;
  m.k = k;
  m.split = VflSplit::window(6, d, 0);
  m.W_pas = testing::random_matrix(rng, k, d);
  m.W_act = testing::random_matrix(rng, k, 2);
  m.b = testing::random_matrix(rng, k, 1);
  const Matrix a = difference_matrix(k) * m.W_pas;
  const LinearSystem shape = LinearSystem::from(a, Vector::Zero(k - 1));
  const NoisePlan plan = pps2_optimal_direction(shape, k, 0.7);
  const int n = 4000;
  const Matrix xs = testing::random_uniform(rng, n * d).reshaped(n, d);
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = xs.row(i).transpose();
    const Vector y = testing::random_uniform(rng, 2);
    const Vector z = m.logits(y, x);
    const Vector c = softmax(pps2_random_sign_logits(z, plan, rng));
    const LinearSystem s = build_system(m, y, c, ScoreSource::noisy);
    err += (x - attack_ls(s).x).squaredNorm();
  }
  const Matrix k0 = xs.transpose() * xs / n;
  const Matrix s_star = plan.alpha * plan.v1 * plan.v1.transpose();
  EXPECT_NEAR(err / (n * d), mse_under_noise(shape, s_star, k0, k), 5e-3);
}

}  // namespace
}  // namespace vflp
