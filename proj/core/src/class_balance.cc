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

#include <cmath>
#include <numeric>
#include <string>

#include "fedst/errors.h"

namespace fedst {
namespace {

int ArgmaxCount(const std::vector<std::int64_t>& m) {
  int best = 0;
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (m[k] > m[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

void CheckCounts(const ClassCounts& counts) {
  if (counts.m.empty()) throw DomainError("class counts are empty");
  if (!(counts.gamma >= 0.0) || !std::isfinite(counts.gamma)) {
    throw DomainError("gamma must be a finite nonnegative number");
  }
  std::int64_t total = 0;
  for (auto v : counts.m) {
    if (v < 0) throw DomainError("class counts must be nonnegative");
    total += v;
  }
  if (total == 0) throw DomainError("class counts are all zero");
}

}  // namespace

ClassCounts ClassCounts::FromLabels(std::span<const int> hard_labels, int num_classes,
                                    double gamma) {
  if (num_classes < 1) throw DomainError("num_classes must be positive");
  std::vector<std::int64_t> m(static_cast<std::size_t>(num_classes), 0);
  for (int label : hard_labels) {
    if (label < 0 || label >= num_classes) throw DomainError("label out of range");
    ++m[static_cast<std::size_t>(label)];
  }
  return FromCounts(std::move(m), gamma);
}

ClassCounts ClassCounts::FromCounts(std::vector<std::int64_t> counts, double gamma) {
  ClassCounts out;
  out.k_star = counts.empty() ? 0 : ArgmaxCount(counts);
  out.m = std::move(counts);
  out.gamma = gamma;
  return out;
}

Budgets BalancedBudgets(const ClassCounts& counts) {
  CheckCounts(counts);
  const std::int64_t majority = counts.m[static_cast<std::size_t>(ArgmaxCount(counts.m))];
  const auto target =
      static_cast<std::int64_t>(std::floor((1.0 + counts.gamma) * static_cast<double>(majority) + 0.5));
  Budgets n(counts.m.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = target - counts.m[k];
  return n;
}

Budgets EqualBudgets(const ClassCounts& counts) {
  const Budgets balanced = BalancedBudgets(counts);
  const std::int64_t total = std::accumulate(balanced.begin(), balanced.end(), std::int64_t{0});
  const auto classes = static_cast<std::int64_t>(balanced.size());
  Budgets n(balanced.size(), total / classes);
  for (std::int64_t k = 0; k < total % classes; ++k) ++n[static_cast<std::size_t>(k)];
  return n;
}

Budgets ComputeBudgets(const ClassCounts& counts, SamplingStrategy strategy) {
  return strategy == SamplingStrategy::kBalanced ? BalancedBudgets(counts) : EqualBudgets(counts);
}

SynthBatch SampleSynthetic(const Matrix& prototypes, std::span<const std::int64_t> budgets,
                           double sigma, Rng& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (static_cast<Eigen::Index>(budgets.size()) != prototypes.rows()) {
    throw ShapeError("SampleSynthetic: budget count != prototype count");
  }
  std::int64_t total = 0;
  for (auto n : budgets) {
    if (n < 0) throw DomainError("SampleSynthetic: negative budget");
    total += n;
  }
  SynthBatch batch;
  batch.sigma = sigma;
  batch.features.resize(static_cast<Eigen::Index>(total), prototypes.cols());
  batch.classes.reserve(static_cast<std::size_t>(total));
  std::normal_distribution<double> noise(0.0, sigma);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    for (std::int64_t j = 0; j < budgets[k]; ++j, ++row) {
      for (Eigen::Index c = 0; c < prototypes.cols(); ++c) {
        batch.features(row, c) = prototypes(static_cast<Eigen::Index>(k), c) + noise(rng);
      }
      batch.classes.push_back(static_cast<int>(k));
    }
  }
  return batch;
}

SynthBatch SampleSynthetic(const Matrix& prototypes, std::span<const std::int64_t> budgets,
                           double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return SampleSynthetic(prototypes, budgets, sigma, rng);
}

}  // namespace fedst
