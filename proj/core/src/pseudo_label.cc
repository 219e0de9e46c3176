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

#include "fedst/pseudo_label.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "fedst/errors.h"

namespace fedst {
namespace {

constexpr double kSimplexTol = 1e-6;

void CheckBeta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
}

}  // namespace

Matrix ZeroShotProbs(const Matrix& features, const Matrix& prototypes) {
  if (features.cols() != prototypes.cols()) {
    throw ShapeError("ZeroShotProbs: feature dim != prototype dim");
  }
  CheckFinite(features, "ZeroShotProbs features");
  CheckFinite(prototypes, "ZeroShotProbs prototypes");
  if (!RowsUnitNorm(features, kSimplexTol) || !RowsUnitNorm(prototypes, kSimplexTol)) {
    throw NumericError("ZeroShotProbs: rows must be unit-norm");
  }
  Matrix probs = features * prototypes.transpose();
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    auto row = probs.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return probs;
}

SoftLabelTable InitTable(const Matrix& zero_shot) {
  CheckSimplexRows(zero_shot, kSimplexTol, "InitTable");
  return SoftLabelTable{zero_shot, 0};
}

SoftLabelTable UpdateTable(const SoftLabelTable& table, const Matrix& predictions, double beta) {
  CheckBeta(beta);
  if (predictions.rows() != table.q.rows() || predictions.cols() != table.q.cols()) {
    throw ShapeError("UpdateTable: predictions shape != table shape");
  }
  CheckSimplexRows(predictions, kSimplexTol, "UpdateTable predictions");
  SoftLabelTable out;
  out.q = beta * table.q + (1.0 - beta) * predictions;
  out.step = table.step + 1;
  return out;
}

void UpdateRows(SoftLabelTable& table, std::span<const std::size_t> rows,
                const Matrix& predictions, double beta) {
  CheckBeta(beta);
  if (predictions.rows() != static_cast<Eigen::Index>(rows.size()) ||
      predictions.cols() != table.q.cols()) {
    throw ShapeError("UpdateRows: predictions shape does not match row list");
  }
  CheckSimplexRows(predictions, kSimplexTol, "UpdateRows predictions");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= table.size()) throw ShapeError("UpdateRows: row index out of range");
    const auto r = static_cast<Eigen::Index>(rows[i]);
    table.q.row(r) = beta * table.q.row(r) +
                     (1.0 - beta) * predictions.row(static_cast<Eigen::Index>(i));
  }
  ++table.step;
}

ClassList HardLabels(const SoftLabelTable& table) { return ArgmaxRows(table.q); }

EntropyReport ComputeEntropyReport(const Matrix& probs) {
  CheckSimplexRows(probs, kSimplexTol, "ComputeEntropyReport");
  EntropyReport report;
  report.upper_bound = std::log(static_cast<double>(probs.cols()));
  report.per_sample.reserve(static_cast<std::size_t>(probs.rows()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double p = probs(i, k);
      if (p > 0.0) h -= p * std::log(p);
    }
    report.per_sample.push_back(h);
    sum += h;
    report.max = std::max(report.max, h);
  }
  if (!report.per_sample.empty()) report.mean = sum / static_cast<double>(probs.rows());
  return report;
}

void WriteEntropyCsv(const EntropyReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "sample_index,entropy\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < report.per_sample.size(); ++i) {
    out << i << ',' << report.per_sample[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace fedst
