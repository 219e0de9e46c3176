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

#include "fedst/types.h"

#include <cmath>
#include <string>

#include "fedst/errors.h"

namespace fedst {

namespace {

// Plain scan; Eigen's allFinite is several times slower on large matrices.
bool AllFinite(const double* data, Eigen::Index n) {
  bool ok = true;
  for (Eigen::Index i = 0; i < n; ++i) ok &= std::isfinite(data[i]);
  return ok;
}

}  // namespace

void CheckFinite(const Matrix& m, const char* what) {
  if (!AllFinite(m.data(), m.size())) throw NumericError(std::string(what) + ": non-finite entry");
}

void CheckFinite(const Vector& v, const char* what) {
  if (!AllFinite(v.data(), v.size())) throw NumericError(std::string(what) + ": non-finite entry");
}

void CheckSimplexRows(const Matrix& probs, double tol, const char* what) {
  CheckFinite(probs, what);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    if (row.minCoeff() < -tol || std::abs(row.sum() - 1.0) > tol) {
      throw NumericError(std::string(what) + ": row " + std::to_string(i) +
                         " is not on the probability simplex");
    }
  }
}

void NormalizeRows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) m.row(i) /= norm;
  }
}

bool RowsUnitNorm(const Matrix& m, double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

Matrix GatherRows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(m.rows())) {
      throw ShapeError("GatherRows: row index " + std::to_string(rows[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

ClassList ArgmaxRows(const Matrix& m) {
  ClassList out(static_cast<std::size_t>(m.rows()), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < m.cols(); ++k) {
      if (m(i, k) > m(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double Accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("Accuracy: length mismatch");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace fedst
