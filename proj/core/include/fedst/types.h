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

#ifndef FEDST_TYPES_H_
#define FEDST_TYPES_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fedst {

// Row-major so that one sample (or one class) is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Class indices in [0, K).
using ClassList = std::vector<int>;
// Dataset row indices.
using IndexList = std::vector<std::size_t>;

// Throws NumericError if any entry is NaN or infinite.
void CheckFinite(const Matrix& m, const char* what);
void CheckFinite(const Vector& v, const char* what);

// Throws NumericError unless every row is nonnegative (up to -tol) and sums
// to one within `tol`.
void CheckSimplexRows(const Matrix& probs, double tol, const char* what);

// L2-normalizes every row in place. Zero rows are left untouched.
void NormalizeRows(Matrix& m);

// True when every row has unit L2 norm within `tol`.
bool RowsUnitNorm(const Matrix& m, double tol);

// Gathers `rows` of `m` into a new matrix, preserving order.
Matrix GatherRows(const Matrix& m, std::span<const std::size_t> rows);

// Row-wise argmax; ties go to the lowest column index.
ClassList ArgmaxRows(const Matrix& m);

// Fraction of positions where predicted == truth. Empty input yields 0.
double Accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace fedst

#endif  // FEDST_TYPES_H_
