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

#include "fedst/partition.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "fedst/errors.h"

namespace fedst {
namespace {

// Labels in random order where every class holds at least `min_per_class`
// samples, so a contiguous shard of that size touches at most two classes.
std::vector<int> RandomLabels(std::mt19937_64& rng, int n, int classes, int min_per_class) {
  std::vector<int> labels;
  for (int k = 0; k < classes; ++k) labels.insert(labels.end(), min_per_class, k);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  while (static_cast<int>(labels.size()) < n) labels.push_back(pick(rng));
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

// Brute-force cover check independent of PartitionMap::IsExactCover.
bool CoversExactly(const PartitionMap& map, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& list : map.clients) {
    for (auto i : list) {
      if (i >= n || seen[i]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; });
}

std::size_t DistinctClasses(const IndexList& list, const std::vector<int>& labels) {
  std::set<int> classes;
  for (auto i : list) classes.insert(labels[i]);
  return classes.size();
}

TEST(PartitionStrategyTest, NamesRoundTrip) {
  for (auto s : {PartitionStrategy::kIid, PartitionStrategy::kSharding, PartitionStrategy::kLda}) {
    EXPECT_EQ(ParsePartitionStrategy(ToString(s)), s);
  }
  EXPECT_THROW(ParsePartitionStrategy("dirichlet"), DomainError);
}

TEST(PartitionIidTest, EvenSplit) {
  const PartitionMap map = PartitionIid(100, 10, 1);
  ASSERT_EQ(map.num_clients(), 10u);
  for (const auto& list : map.clients) EXPECT_EQ(list.size(), 10u);
  EXPECT_TRUE(CoversExactly(map, 100));
}

TEST(PartitionIidTest, RemainderGoesOneEach) {
  const PartitionMap map = PartitionIid(10, 3, 2);
  std::multiset<std::size_t> sizes;
  for (const auto& list : map.clients) sizes.insert(list.size());
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{3, 3, 4}));
}

TEST(PartitionIidTest, RejectsMoreClientsThanSamples) {
  EXPECT_THROW(PartitionIid(3, 4, 0), DomainError);
  EXPECT_THROW(PartitionIid(3, 0, 0), DomainError);
}

TEST(PartitionIidTest, ListsAreSortedAndNonEmpty) {
  const PartitionMap map = PartitionIid(57, 8, 3);
  EXPECT_TRUE(map.EmptyClients().empty());
  for (const auto& list : map.clients) EXPECT_TRUE(std::is_sorted(list.begin(), list.end()));
}

TEST(PartitionShardingTest, PaperScaleShards) {
  std::vector<int> labels(50000);
  for (int i = 0; i < 50000; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
  const PartitionMap map = PartitionSharding(labels, 100, 2, 5);
  ASSERT_EQ(map.num_clients(), 100u);
  for (const auto& list : map.clients) {
    EXPECT_EQ(list.size(), 500u);
    EXPECT_LE(DistinctClasses(list, labels), 2u);
  }
  EXPECT_TRUE(CoversExactly(map, 50000));
}

TEST(PartitionShardingTest, ClassConcentrationOverRandomLabels) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const int clients = 2 + static_cast<int>(rng() % 15);
    const int s = 1 + static_cast<int>(rng() % 3);
    const int classes = 2 + static_cast<int>(rng() % 9);
    const int n = clients * s * (3 + static_cast<int>(rng() % 20)) + static_cast<int>(rng() % 7);
    const int shard = (n + clients * s - 1) / (clients * s);
    if (classes * shard > n) continue;
    const auto labels = RandomLabels(rng, n, classes, shard);
    const PartitionMap map = PartitionSharding(labels, clients, s, rng());
    ASSERT_TRUE(CoversExactly(map, static_cast<std::size_t>(n)));
    EXPECT_TRUE(map.EmptyClients().empty());
    for (const auto& list : map.clients) {
      EXPECT_LE(DistinctClasses(list, labels),
                static_cast<std::size_t>(std::min(classes, 2 * s)));
    }
  }
}

TEST(PartitionShardingTest, UnevenShardSizesDifferByAtMostOne) {
  const std::vector<int> labels(103, 0);
  const PartitionMap map = PartitionSharding(labels, 10, 1, 7);
  std::size_t lo = 1000;
  std::size_t hi = 0;
  for (const auto& list : map.clients) {
    lo = std::min(lo, list.size());
    hi = std::max(hi, list.size());
  }
  EXPECT_LE(hi - lo, 1u);
  EXPECT_THROW(PartitionSharding(labels, 60, 2, 7), DomainError);
  EXPECT_THROW(PartitionSharding(labels, 10, 0, 7), DomainError);
}

TEST(PartitionLdaTest, HugeAlphaIsNearUniform) {
  std::vector<int> labels(10000);
  for (int i = 0; i < 10000; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
  const PartitionMap map = PartitionLda(labels, 10, 1e6, 8);
  for (const auto& list : map.clients) {
    std::vector<int> per_class(10, 0);
    for (auto i : list) ++per_class[static_cast<std::size_t>(labels[i])];
    for (int c : per_class) EXPECT_NEAR(c / 1000.0, 0.1, 0.005);
  }
}

TEST(PartitionLdaTest, ClassTotalsAreExact) {
  std::mt19937_64 rng(9);
  for (double alpha : {0.01, 0.1, 1.0, 10.0}) {
    const auto labels = RandomLabels(rng, 777, 7, 0);
    const PartitionMap map = PartitionLda(labels, 13, alpha, rng());
    ASSERT_TRUE(CoversExactly(map, labels.size()));
    std::vector<std::size_t> expected(7, 0);
    for (int l : labels) ++expected[static_cast<std::size_t>(l)];
    std::vector<std::size_t> got(7, 0);
    for (const auto& list : map.clients) {
      for (auto i : list) ++got[static_cast<std::size_t>(labels[i])];
    }
    EXPECT_EQ(got, expected);
  }
}

TEST(PartitionLdaTest, HeterogeneityGrowsAsAlphaShrinks) {
  std::vector<int> labels(5000);
  for (int i = 0; i < 5000; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
  auto median_classes = [&](double alpha) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PartitionMap map = PartitionLda(labels, 20, alpha, seed);
      std::vector<std::size_t> counts;
      for (const auto& list : map.clients) counts.push_back(DistinctClasses(list, labels));
      std::nth_element(counts.begin(), counts.begin() + 10, counts.end());
      total += static_cast<double>(counts[10]);
    }
    return total / 20.0;
  };
  const double tight = median_classes(0.05);
  const double mid = median_classes(0.5);
  const double loose = median_classes(100.0);
  EXPECT_LT(tight, mid);
  EXPECT_LT(mid, loose);
  EXPECT_LT(tight, 5.0);  // fewer than half of the 10 classes
  EXPECT_DOUBLE_EQ(loose, 10.0);
}

TEST(PartitionLdaTest, TinyAlphaMayLeaveClientsEmpty) {
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  const PartitionMap map = PartitionLda(labels, 10, 1e-4, 3);
  EXPECT_TRUE(CoversExactly(map, 40));
  EXPECT_GE(map.EmptyClients().size(), 1u);
  EXPECT_THROW(PartitionLda(labels, 10, 0.0, 3), DomainError);
}

TEST(PartitionMapTest, DeterministicInSeed) {
  std::mt19937_64 rng(10);
  const auto labels = RandomLabels(rng, 300, 5, 30);
  EXPECT_EQ(PartitionIid(300, 7, 4), PartitionIid(300, 7, 4));
  EXPECT_EQ(PartitionSharding(labels, 6, 2, 4), PartitionSharding(labels, 6, 2, 4));
  EXPECT_EQ(PartitionLda(labels, 6, 0.3, 4), PartitionLda(labels, 6, 0.3, 4));
  EXPECT_NE(PartitionIid(300, 7, 4), PartitionIid(300, 7, 5));
}

TEST(PartitionMapTest, JsonRoundTrip) {
  std::mt19937_64 rng(11);
  const auto labels = RandomLabels(rng, 200, 4, 0);
  for (const PartitionMap& map :
       {PartitionIid(200, 5, 1), PartitionSharding(labels, 5, 3, 2), PartitionLda(labels, 5, 0.2, 3)}) {
    EXPECT_EQ(PartitionMap::FromJson(map.ToJson()), map);
  }
}

TEST(PartitionMapTest, FromJsonRejectsBrokenCover) {
  auto doc = PartitionIid(20, 4, 1).ToJson();
  doc["clients"][0].push_back(doc["clients"][1][0]);
  EXPECT_THROW(PartitionMap::FromJson(doc), FormatError);
  EXPECT_THROW(PartitionMap::FromJson(nlohmann::json::object()), FormatError);
}

}  // namespace
}  // namespace fedst
