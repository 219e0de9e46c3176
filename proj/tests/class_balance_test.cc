/*
 * Copyright 2026 The fedst Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedst/class_balance.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fedst/errors.h"
#include "fedst/rng.h"
#include "support/oracles.h"

namespace fedst {
namespace {

std::vector<std::int64_t> RandomCounts(std::mt19937_64& rng, int classes, int max_count) {
  std::uniform_int_distribution<std::int64_t> draw(0, max_count);
  std::vector<std::int64_t> m(static_cast<std::size_t>(classes));
  do {
    for (auto& v : m) v = draw(rng);
  } while (std::accumulate(m.begin(), m.end(), std::int64_t{0}) == 0);
  return m;
}

std::int64_t Sum(const Budgets& n) { return std::accumulate(n.begin(), n.end(), std::int64_t{0}); }

TEST(ClassCountsTest, HistogramAndMajority) {
  const std::vector<int> labels{2, 0, 2, 1, 2, 0};
  const ClassCounts c = ClassCounts::FromLabels(labels, 4, 0.0);
  EXPECT_EQ(c.m, (std::vector<std::int64_t>{2, 1, 3, 0}));
  EXPECT_EQ(c.k_star, 2);
  EXPECT_EQ(ClassCounts::FromCounts({4, 4}, 0.0).k_star, 0);
  EXPECT_THROW(ClassCounts::FromLabels(std::vector<int>{5}, 4, 0.0), DomainError);
}

TEST(BudgetsTest, WorkedExamples) {
  EXPECT_EQ(BalancedBudgets(ClassCounts::FromCounts({5, 3, 0}, 0.0)), (Budgets{0, 2, 5}));
  EXPECT_EQ(BalancedBudgets(ClassCounts::FromCounts({4, 4}, 0.5)), (Budgets{2, 2}));
}

TEST(BudgetsTest, RoundsHalfUp) {
  // (1 + 0.5) * 3 = 4.5 rounds to 5.
  EXPECT_EQ(BalancedBudgets(ClassCounts::FromCounts({3, 1}, 0.5)), (Budgets{2, 4}));
}

TEST(BudgetsTest, BalanceIdentityOverRandomCounts) {
  std::mt19937_64 rng(1);
  for (double gamma : {0.0, 0.5, 1.0}) {
    for (int trial = 0; trial < 300; ++trial) {
      const int k = 1 + static_cast<int>(rng() % 12);
      const ClassCounts c = ClassCounts::FromCounts(RandomCounts(rng, k, 50), gamma);
      const Budgets n = BalancedBudgets(c);
      const std::int64_t majority = *std::max_element(c.m.begin(), c.m.end());
      const auto expected_top = static_cast<std::int64_t>(std::floor(gamma * majority + 0.5));
      for (std::size_t j = 0; j < n.size(); ++j) {
        ASSERT_GE(n[j], 0);
        ASSERT_EQ(c.m[j] + n[j], c.m[0] + n[0]);
      }
      // The rounding of (1 + gamma) m* and gamma m* agree because m* is an integer.
      EXPECT_EQ(n[static_cast<std::size_t>(c.k_star)], expected_top);
      EXPECT_LE(std::abs(static_cast<double>(c.m[0] + n[0]) - (1 + gamma) * majority), 0.5);
    }
  }
}

TEST(BudgetsTest, RejectsDegenerateCounts) {
  EXPECT_THROW(BalancedBudgets(ClassCounts::FromCounts({0, 0, 0}, 0.0)), DomainError);
  EXPECT_THROW(BalancedBudgets(ClassCounts::FromCounts({}, 0.0)), DomainError);
  EXPECT_THROW(BalancedBudgets(ClassCounts::FromCounts({1, 2}, -1.0)), DomainError);
}

TEST(EqualBudgetsTest, WorkedExamples) {
  EXPECT_EQ(EqualBudgets(ClassCounts::FromCounts({5, 3, 0}, 0.0)), (Budgets{3, 2, 2}));
  EXPECT_EQ(EqualBudgets(ClassCounts::FromCounts({6}, 0.5)), (Budgets{3}));
  EXPECT_EQ(EqualBudgets(ClassCounts::FromCounts({6}, 0.0)), (Budgets{0}));
}

TEST(EqualBudgetsTest, KeepsTheBalancedTotal) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 12);
    const double gamma = (rng() % 3) * 0.5;
    const ClassCounts c = ClassCounts::FromCounts(RandomCounts(rng, k, 40), gamma);
    const Budgets eq = EqualBudgets(c);
    ASSERT_EQ(Sum(eq), Sum(BalancedBudgets(c)));
    const auto [lo, hi] = std::minmax_element(eq.begin(), eq.end());
    EXPECT_LE(*hi - *lo, 1);
    EXPECT_TRUE(std::is_sorted(eq.rbegin(), eq.rend()));
  }
  EXPECT_EQ(ComputeBudgets(ClassCounts::FromCounts({5, 3, 0}, 0.0), SamplingStrategy::kEqual),
            (Budgets{3, 2, 2}));
  EXPECT_EQ(ComputeBudgets(ClassCounts::FromCounts({5, 3, 0}, 0.0), SamplingStrategy::kBalanced),
            (Budgets{0, 2, 5}));
}

TEST(SampleSyntheticTest, RowsGroupedByClassWithExactCounts) {
  const Matrix protos = Matrix::Identity(3, 4);
  const Budgets n{2, 0, 3};
  const SynthBatch batch = SampleSynthetic(protos, n, 0.1, 7);
  EXPECT_EQ(batch.features.rows(), 5);
  EXPECT_EQ(batch.classes, (ClassList{0, 0, 2, 2, 2}));
  EXPECT_EQ(batch.sigma, 0.1);
}

TEST(SampleSyntheticTest, EmptyBudgetsGiveEmptyBatch) {
  const SynthBatch batch = SampleSynthetic(Matrix::Identity(3, 3), Budgets{0, 0, 0}, 0.5, 1);
  EXPECT_EQ(batch.features.rows(), 0);
  EXPECT_EQ(batch.features.cols(), 3);
  EXPECT_TRUE(batch.classes.empty());
}

TEST(SampleSyntheticTest, VanishingSigmaSitsOnPrototype) {
  std::mt19937_64 rng(3);
  const Matrix protos = testing::RandomUnitRows(rng, 4, 6);
  const SynthBatch batch = SampleSynthetic(protos, Budgets{3, 3, 3, 3}, 1e-12, 5);
  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) {
    const auto k = batch.classes[static_cast<std::size_t>(i)];
    EXPECT_LT((batch.features.row(i) - protos.row(k)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SampleSyntheticTest, DrawsAreNotRenormalized) {
  const SynthBatch batch = SampleSynthetic(Matrix::Identity(2, 2), Budgets{50, 0}, 0.3, 9);
  int off_sphere = 0;
  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) {
    if (std::abs(batch.features.row(i).norm() - 1.0) > 1e-3) ++off_sphere;
  }
  EXPECT_GT(off_sphere, 40);
}

TEST(SampleSyntheticTest, MomentsMatchLargeSample) {
  std::mt19937_64 rng(4);
  const int d = 8;
  const int n = 10000;
  const double sigma = 0.2;
  const Matrix protos = testing::RandomUnitRows(rng, 2, d);
  const SynthBatch batch = SampleSynthetic(protos, Budgets{n, n}, sigma, 11);
  for (int k = 0; k < 2; ++k) {
    const auto block = batch.features.middleRows(k * n, n);
    for (int c = 0; c < d; ++c) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += block(i, c);
      mean /= n;
      double var = 0.0;
      for (int i = 0; i < n; ++i) var += (block(i, c) - mean) * (block(i, c) - mean);
      var /= (n - 1);
      EXPECT_LT(std::abs(mean - protos(k, c)), 4 * sigma / std::sqrt(n));
      EXPECT_LT(std::abs(var / (sigma * sigma) - 1.0), 0.10);
    }
  }
}

TEST(SampleSyntheticTest, DeterministicInSeed) {
  const Matrix protos = Matrix::Identity(3, 5);
  const Budgets n{4, 1, 2};
  const SynthBatch a = SampleSynthetic(protos, n, 0.03, 42);
  const SynthBatch b = SampleSynthetic(protos, n, 0.03, 42);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.classes, b.classes);
  EXPECT_NE(a.features, SampleSynthetic(protos, n, 0.03, 43).features);

  Rng r1(42);
  EXPECT_EQ(SampleSynthetic(protos, n, 0.03, r1).features, a.features);
}

TEST(SampleSyntheticTest, RejectsBadArguments) {
  const Matrix protos = Matrix::Identity(2, 2);
  EXPECT_THROW(SampleSynthetic(protos, Budgets{1, 1}, 0.0, 1), DomainError);
  EXPECT_THROW(SampleSynthetic(protos, Budgets{1, -1}, 0.1, 1), DomainError);
  EXPECT_THROW(SampleSynthetic(protos, Budgets{1}, 0.1, 1), ShapeError);
}

}  // namespace
}  // namespace fedst
