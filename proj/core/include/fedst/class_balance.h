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

#ifndef FEDST_CLASS_BALANCE_H_
#define FEDST_CLASS_BALANCE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedst/rng.h"
#include "fedst/types.h"

namespace fedst {

using Budgets = std::vector<std::int64_t>;

// Pseudo-label histogram of one client plus the majority class.
struct ClassCounts {
  std::vector<std::int64_t> m;
  int k_star = 0;
  double gamma = 0.0;

  // Histogram of `hard_labels` over `num_classes` classes.
  static ClassCounts FromLabels(std::span<const int> hard_labels, int num_classes, double gamma);
  // Takes explicit counts; k_star is recomputed.
  static ClassCounts FromCounts(std::vector<std::int64_t> counts, double gamma);
};

struct SynthBatch {
  Matrix features;   // rows drawn from N(T_k, sigma^2 I), not re-normalized
  ClassList classes;
  double sigma = 0.0;
};

enum class SamplingStrategy { kBalanced, kEqual };

// Class-balanced budgets: n_k = round((1 + gamma) m_{k*}) - m_k, so that
// m_k + n_k is the same for every class. Rounds half up.
Budgets BalancedBudgets(const ClassCounts& counts);

// Same total as BalancedBudgets, split evenly; the remainder goes to the
// lowest class indices.
Budgets EqualBudgets(const ClassCounts& counts);

Budgets ComputeBudgets(const ClassCounts& counts, SamplingStrategy strategy);

// Draws budgets[k] samples around prototype k. Rows are grouped by class in
// ascending class order.
SynthBatch SampleSynthetic(const Matrix& prototypes, std::span<const std::int64_t> budgets,
                           double sigma, Rng& rng);
SynthBatch SampleSynthetic(const Matrix& prototypes, std::span<const std::int64_t> budgets,
                           double sigma, std::uint64_t seed);

}  // namespace fedst

#endif  // FEDST_CLASS_BALANCE_H_
