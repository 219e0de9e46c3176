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

#ifndef FEDST_PSEUDO_LABEL_H_
#define FEDST_PSEUDO_LABEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedst/types.h"

namespace fedst {

// Per-client soft pseudo-labels q_j, one simplex row per local sample.
struct SoftLabelTable {
  Matrix q;
  std::uint64_t step = 0;

  std::size_t size() const { return static_cast<std::size_t>(q.rows()); }
};

struct EntropyReport {
  std::vector<double> per_sample;  // nats
  double upper_bound = 0.0;        // log K
  double mean = 0.0;
  double max = 0.0;
};

// softmax([I_j . T_1, ..., I_j . T_K]) with raw (unscaled) cosine logits.
// Both inputs must have unit-norm rows within 1e-6.
Matrix ZeroShotProbs(const Matrix& features, const Matrix& prototypes);

// q^0 = zero-shot probabilities; step = 0.
SoftLabelTable InitTable(const Matrix& zero_shot);

// q = beta * q + (1 - beta) * predictions for every row; step + 1.
SoftLabelTable UpdateTable(const SoftLabelTable& table, const Matrix& predictions, double beta);

// Same moving average restricted to `rows` of the table; predictions row i
// belongs to table row rows[i]. Mutates in place and bumps the step counter.
void UpdateRows(SoftLabelTable& table, std::span<const std::size_t> rows,
                const Matrix& predictions, double beta);

// argmax per row, lowest index on ties.
ClassList HardLabels(const SoftLabelTable& table);

// Shannon entropy per row with 0 log 0 = 0.
EntropyReport ComputeEntropyReport(const Matrix& probs);

// CSV with header "sample_index,entropy".
void WriteEntropyCsv(const EntropyReport& report, const std::string& path);

}  // namespace fedst

#endif  // FEDST_PSEUDO_LABEL_H_
