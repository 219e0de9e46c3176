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

#include "fedst/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedst/errors.h"

namespace fedst {
namespace {

void CheckFeatureShape(const LinearModel& model, const Matrix& features, const char* what) {
  if (model.bias.size() != model.weights.rows()) {
    throw ShapeError(std::string(what) + ": bias length does not match class count");
  }
  if (features.cols() != model.weights.cols()) {
    throw ShapeError(std::string(what) + ": feature dim " + std::to_string(features.cols()) +
                     " != model dim " + std::to_string(model.weights.cols()));
  }
}

void CheckClasses(std::span<const int> classes, Eigen::Index rows, int num_classes,
                  const char* what) {
  if (static_cast<Eigen::Index>(classes.size()) != rows) {
    throw ShapeError(std::string(what) + ": class list length != synthetic row count");
  }
  for (int c : classes) {
    if (c < 0 || c >= num_classes) {
      throw DomainError(std::string(what) + ": class index " + std::to_string(c) +
                        " out of range");
    }
  }
}

// Softmax of the logits without input validation.
Matrix Probabilities(const LinearModel& model, const Matrix& features) {
  Matrix logits = features * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return logits;
}

double FlooredLog(double p) { return std::log(std::max(p, kLogFloor)); }

double SelfTrainFromProbs(const Matrix& probs, const Matrix& targets) {
  if (probs.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      if (targets(i, k) != 0.0) sum -= targets(i, k) * FlooredLog(probs(i, k));
    }
  }
  return sum / static_cast<double>(probs.rows());
}

double SynthFromProbs(const Matrix& probs, std::span<const int> classes) {
  if (probs.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    sum -= FlooredLog(probs(i, classes[static_cast<std::size_t>(i)]));
  }
  return sum / static_cast<double>(probs.rows());
}

void ValidateTargets(const Matrix& features, const Matrix& targets, int num_classes) {
  if (targets.rows() != features.rows() || targets.cols() != num_classes) {
    throw ShapeError("soft-label targets shape does not match features/classes");
  }
  CheckSimplexRows(targets, 1e-6, "soft-label targets");
}

}  // namespace

OptimizerState OptimizerState::Fresh(const LinearModel& model, const SgdOptions& options) {
  if (!(options.lr >= 0.0) || !std::isfinite(options.lr)) {
    throw DomainError("learning rate must be a finite nonnegative number");
  }
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw DomainError("momentum must lie in [0, 1)");
  }
  if (!(options.weight_decay >= 0.0) || !std::isfinite(options.weight_decay)) {
    throw DomainError("weight decay must be a finite nonnegative number");
  }
  OptimizerState state;
  state.momentum_w = Matrix::Zero(model.weights.rows(), model.weights.cols());
  state.momentum_b = Vector::Zero(model.bias.size());
  state.options = options;
  return state;
}

Matrix Forward(const LinearModel& model, const Matrix& features) {
  CheckFeatureShape(model, features, "Forward");
  CheckFinite(features, "Forward features");
  CheckFinite(model.weights, "Forward weights");
  CheckFinite(model.bias, "Forward bias");
  return Probabilities(model, features);
}

double SelfTrainLoss(const LinearModel& model, const Matrix& features, const Matrix& targets) {
  ValidateTargets(features, targets, model.num_classes());
  return SelfTrainFromProbs(Forward(model, features), targets);
}

double SynthLoss(const LinearModel& model, const Matrix& synth_features,
                 std::span<const int> synth_classes) {
  CheckClasses(synth_classes, synth_features.rows(), model.num_classes(), "SynthLoss");
  if (synth_features.rows() == 0) return 0.0;
  return SynthFromProbs(Forward(model, synth_features), synth_classes);
}

LossValue CombinedLoss(const LinearModel& model, const Matrix& features, const Matrix& targets,
                       const Matrix& synth_features, std::span<const int> synth_classes,
                       double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  LossValue loss;
  loss.lambda = lambda;
  loss.self_train = SelfTrainLoss(model, features, targets);
  loss.synth = SynthLoss(model, synth_features, synth_classes);
  loss.total = loss.self_train + lambda * loss.synth;
  return loss;
}

Gradients ComputeGradients(const LinearModel& model, const Matrix& features,
                           const Matrix& targets, const Matrix& synth_features,
                           std::span<const int> synth_classes, double lambda,
                           LossValue* loss) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  const int num_classes = model.num_classes();
  ValidateTargets(features, targets, num_classes);
  CheckClasses(synth_classes, synth_features.rows(), num_classes, "ComputeGradients");
  CheckFeatureShape(model, features, "ComputeGradients");
  CheckFinite(features, "ComputeGradients features");
  if (synth_features.rows() > 0) {
    CheckFeatureShape(model, synth_features, "ComputeGradients");
    CheckFinite(synth_features, "ComputeGradients synthetic features");
  }

  Gradients grads{Matrix::Zero(num_classes, model.dim()), Vector::Zero(num_classes)};
  LossValue value;
  value.lambda = lambda;

  if (features.rows() > 0) {
    const Matrix probs = Probabilities(model, features);
    value.self_train = SelfTrainFromProbs(probs, targets);
    const Matrix residual = (probs - targets) / static_cast<double>(features.rows());
    grads.w.noalias() += residual.transpose() * features;
    grads.b += residual.colwise().sum().transpose();
  }
  if (synth_features.rows() > 0) {
    const Matrix probs = Probabilities(model, synth_features);
    value.synth = SynthFromProbs(probs, synth_classes);
    Matrix residual = probs;
    for (Eigen::Index i = 0; i < residual.rows(); ++i) {
      residual(i, synth_classes[static_cast<std::size_t>(i)]) -= 1.0;
    }
    residual *= lambda / static_cast<double>(synth_features.rows());
    grads.w.noalias() += residual.transpose() * synth_features;
    grads.b += residual.colwise().sum().transpose();
  }
  value.total = value.self_train + lambda * value.synth;
  if (loss != nullptr) *loss = value;
  return grads;
}

void SgdStep(LinearModel& model, OptimizerState& state, const Gradients& grads) {
  if (grads.w.rows() != model.weights.rows() || grads.w.cols() != model.weights.cols() ||
      grads.b.size() != model.bias.size() ||
      state.momentum_w.rows() != model.weights.rows() ||
      state.momentum_w.cols() != model.weights.cols() ||
      state.momentum_b.size() != model.bias.size()) {
    throw ShapeError("SgdStep: gradient/optimizer shape does not match model");
  }
  CheckFinite(grads.w, "SgdStep gradient W");
  CheckFinite(grads.b, "SgdStep gradient b");
  const SgdOptions& opt = state.options;

  state.momentum_w = opt.momentum * state.momentum_w + grads.w + opt.weight_decay * model.weights;
  state.momentum_b = opt.momentum * state.momentum_b + grads.b + opt.weight_decay * model.bias;
  model.weights -= opt.lr * state.momentum_w;
  model.bias -= opt.lr * state.momentum_b;
}

LinearModel InitFromPrototypes(const Matrix& prototypes, bool require_normalized) {
  if (prototypes.rows() == 0 || prototypes.cols() == 0) {
    throw ShapeError("InitFromPrototypes: empty prototype matrix");
  }
  CheckFinite(prototypes, "prototypes");
  if (require_normalized && !RowsUnitNorm(prototypes, 1e-6)) {
    throw NumericError("InitFromPrototypes: prototype rows are not unit-norm");
  }
  return LinearModel{prototypes, Vector::Zero(prototypes.rows())};
}

Matrix OneHot(std::span<const int> classes, int num_classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(classes.size()), num_classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || classes[i] >= num_classes) {
      throw DomainError("OneHot: class index out of range");
    }
    out(static_cast<Eigen::Index>(i), classes[i]) = 1.0;
  }
  return out;
}

}  // namespace fedst
