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

#include "vflp/dataset.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace vflp {
namespace {

RawTable parse(const std::string& text, int label_col = -1) {
  std::istringstream in(text);
  return parse_csv(in, label_col);
}

TEST(LoadCsvTest, NumericTable) {
  const RawTable t = parse("a,b,label\n1,2,0\n3,4,1\n5,6,0\n");
  EXPECT_EQ(t.num_rows(), 3u);
  EXPECT_EQ(t.num_columns(), 3u);
  EXPECT_EQ(t.label_column, 2u);
  EXPECT_FALSE(t.categorical[0]);
  EXPECT_FALSE(t.categorical[1]);
}

TEST(LoadCsvTest, HeaderOnlyIsAnError) {
  try {
    parse("a,b,label\n");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("no data rows"), std::string::npos);
  }
}

TEST(LoadCsvTest, MixedColumnIsCategorical) {
  const RawTable t = parse("a,color,label\n1,red,0\n2,3,1\n3,blue,1\n");
  EXPECT_FALSE(t.categorical[0]);
  EXPECT_TRUE(t.categorical[1]);
}

TEST(LoadCsvTest, Errors) {
  EXPECT_THROW(parse(""), InvalidArgument);
  EXPECT_THROW(parse("a,b,label\n1,2\n"), InvalidArgument);
  EXPECT_THROW(parse("a,b,label\n1,,0\n2,3,1\n"), InvalidArgument);
  EXPECT_THROW(parse("a,label\n1,0\n2,0\n"), InvalidArgument);  // single class
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), InvalidArgument);
}

TEST(LoadCsvTest, LabelColumnSelection) {
  const RawTable t = parse("label,a\nx,1\ny,2\n", 0);
  EXPECT_EQ(t.label_column, 0u);
  const NumericTable n = encode_categoricals(t, {true, true});
  EXPECT_EQ(n.k, 2);
  EXPECT_EQ(n.X.cols(), 1);
  EXPECT_EQ(n.y[0], 0);
  EXPECT_EQ(n.y[1], 1);
}

TEST(EncodeCategoricalsTest, TargetMeanOnTrainingRows) {
  const RawTable t = parse("color,label\nblue,1\nred,0\nred,1\nblue,1\ngreen,0\n");
  const std::vector<bool> mask = {true, true, true, true, false};
  const NumericTable n = encode_categoricals(t, mask);
  EXPECT_DOUBLE_EQ(n.X(0, 0), 1.0);  // blue only seen with label 1
  EXPECT_DOUBLE_EQ(n.X(1, 0), 0.5);
  // green never appears in training: global training mean 3/4.
  EXPECT_DOUBLE_EQ(n.X(4, 0), 0.75);
}

TEST(EncodeCategoricalsTest, NumericTableUnchanged) {
  const RawTable t = parse("a,b,label\n1.5,2,0\n3,-4,1\n");
  const NumericTable n = encode_categoricals(t, {true, true});
  EXPECT_DOUBLE_EQ(n.X(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(n.X(1, 1), -4.0);
}

TEST(NormalizeTest, Examples) {
  NumericTable t;
  t.X.resize(3, 3);
  t.X << 2, 5, 0.0, 4, 5, 0.5, 6, 5, 1.0;
  t.y = {0, 1, 0};
  t.k = 2;
  const Dataset ds = normalize(t);
  EXPECT_DOUBLE_EQ(ds.X(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ds.X(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(ds.X(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(ds.X(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(ds.X(2, 1), 0.0);
  EXPECT_DOUBLE_EQ(ds.X(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(ds.X(2, 2), 1.0);
}

TEST(NormalizeTest, TrainOnlyClampsTestRows) {
  NumericTable t;
  t.X.resize(3, 1);
  t.X << 0, 10, 20;
  t.y = {0, 1, 0};
  t.k = 2;
  const Dataset ds = normalize(t, {true, true, false}, true);
  EXPECT_DOUBLE_EQ(ds.X(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(ds.X(2, 0), 1.0);
}

TEST(SplitTest, Sizes) {
  auto count = [](const std::vector<bool>& m) { return std::count(m.begin(), m.end(), true); };
  EXPECT_EQ(count(make_split_mask(10, 0.8, 1)), 8);
  EXPECT_EQ(count(make_split_mask(4, 0.5, 1)), 2);
  EXPECT_EQ(make_split_mask(50, 0.8, 3), make_split_mask(50, 0.8, 3));
  EXPECT_NE(make_split_mask(50, 0.8, 3), make_split_mask(50, 0.8, 4));
  EXPECT_THROW(make_split_mask(1, 0.8, 1), InvalidArgument);
  EXPECT_THROW(make_split_mask(10, 1.0, 1), InvalidArgument);
  EXPECT_THROW(make_split_mask(10, 0.0, 1), InvalidArgument);
}

TEST(SynthesizeTest, TableShapeAndRange) {
  SyntheticSpec spec;
  spec.seed = 5;
  const Dataset ds = synthesize(spec);
  EXPECT_EQ(ds.n(), 50000);
  EXPECT_EQ(ds.d_t(), 10);
  EXPECT_EQ(ds.k, 2);
  EXPECT_GE(ds.X.minCoeff(), 0.0);
  EXPECT_LE(ds.X.maxCoeff(), 1.0);
  std::vector<int> counts(2, 0);
  for (int y : ds.y) counts[static_cast<std::size_t>(y)]++;
  for (int c : counts) EXPECT_NEAR(c, 25000, 2500);
  EXPECT_EQ(std::count(ds.train_mask.begin(), ds.train_mask.end(), true), 40000);
}

TEST(SynthesizeTest, Deterministic) {
  SyntheticSpec spec{.n = 300, .d_t = 4, .k = 3, .seed = 9};
  const Dataset a = synthesize(spec), b = synthesize(spec);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.train_mask, b.train_mask);
  spec.seed = 10;
  EXPECT_NE(synthesize(spec).X, a.X);
}

TEST(SynthesizeTest, LabelsInRangeForManyClasses) {
  const Dataset ds = synthesize({.n = 700, .d_t = 3, .k = 7, .seed = 2});
  for (int y : ds.y) {
    EXPECT_GE(y, 0);
    EXPECT_LT(y, 7);
  }
  EXPECT_THROW(synthesize({.n = 3, .d_t = 3, .k = 7}), InvalidArgument);
}

}  // namespace
}  // namespace vflp
