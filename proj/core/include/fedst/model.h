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

#ifndef FEDST_MODEL_H_
#define FEDST_MODEL_H_

#include <span>

#include "fedst/types.h"

namespace fedst {

// Probabilities are clamped to this floor before taking logs.
inline constexpr double kLogFloor = 1e-12;

// Linear softmax head f(z) = softmax(W z + b) over frozen features.
struct LinearModel {
  Matrix weights;  // K x d
  Vector bias;     // K

  int num_classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }

  bool operator==(const LinearModel& other) const {
    return weights == other.weights && bias == other.bias;
  }
};

struct SgdOptions {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
};

// SGD-with-momentum state. Buffers always match the model's shape.
struct OptimizerState {
  Matrix momentum_w;
  Vector momentum_b;
  SgdOptions options;

  // Zero buffers shaped like `model`. Validates the hyperparameters.
  static OptimizerState Fresh(const LinearModel& model, const SgdOptions& options);
};

struct LossValue {
  double total = 0.0;
  double self_train = 0.0;
  double synth = 0.0;
  double lambda = 0.0;
};

struct Gradients {
  Matrix w;
  Vector b;
};

// Row j of the result is softmax(W z_j + b). Throws ShapeError on a
// dimension mismatch and NumericError on non-finite input.
Matrix Forward(const LinearModel& model, const Matrix& features);

// Mean over rows of -q_j . log f(z_j), with the log floored at kLogFloor.
// `targets` rows must lie on the simplex within 1e-6.
double SelfTrainLoss(const LinearModel& model, const Matrix& features, const Matrix& targets);

// Mean over synthetic rows of -log f(z)[class]. Zero when there are no rows.
double SynthLoss(const LinearModel& model, const Matrix& synth_features,
                 std::span<const int> synth_classes);

LossValue CombinedLoss(const LinearModel& model, const Matrix& features, const Matrix& targets,
                       const Matrix& synth_features, std::span<const int> synth_classes,
                       double lambda);

// Analytic gradient of SelfTrainLoss + lambda * SynthLoss with respect to W
// and b. Targets are treated as constants. Optionally reports the loss that
// the same forward pass produced.
Gradients ComputeGradients(const LinearModel& model, const Matrix& features,
                           const Matrix& targets, const Matrix& synth_features,
                           std::span<const int> synth_classes, double lambda,
                           LossValue* loss = nullptr);

// grad += wd * param; v = momentum * v + grad; param -= lr * v.
// Applied to both W and b. Throws NumericError for a non-finite gradient.
void SgdStep(LinearModel& model, OptimizerState& state, const Gradients& grads);

// W = prototypes (row k is T_k), b = 0. With `require_normalized` the
// prototype rows must have unit norm within 1e-6.
LinearModel InitFromPrototypes(const Matrix& prototypes, bool require_normalized = true);

// One-hot encoding of class indices as a targets matrix.
Matrix OneHot(std::span<const int> classes, int num_classes);

}  // namespace fedst

#endif  // FEDST_MODEL_H_
