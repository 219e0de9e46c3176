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

#ifndef FEDST_SYNTH_WORLD_H_
#define FEDST_SYNTH_WORLD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedst/types.h"

namespace fedst {

// Desk-scale stand-in for an aligned image/text feature space.
struct SynthWorldConfig {
  int num_classes = 10;
  int dim = 32;
  int n_per_class = 500;       // training samples per class
  int n_test_per_class = 200;  // held-out samples per class
  // 1 gives orthonormal prototypes (when K < d); smaller values blend every
  // prototype toward one shared direction, so pairwise cosines rise to
  // PrototypeCosineBound(proto_separation).
  double proto_separation = 1.0;
  double noise_sigma = 0.1;
  // Norm of an offset shared by every image-feature center and orthogonal to
  // the prototype span (the image/text modality gap). Shrinks all zero-shot
  // logits without changing their order.
  double modality_gap = 0.0;
  // Spread of a per-class additive bias on zero-shot logits: the shared
  // offset also satisfies offset . T_k = b_k with the b_k evenly spaced over
  // [-class_bias, class_bias] in random class order.
  double class_bias = 0.0;
  std::uint64_t seed = 0;

  // Non-fatal problems (e.g. K > d, so prototypes cannot be orthogonal).
  std::vector<std::string> Warnings() const;
  // Throws DomainError for unusable values.
  void Validate() const;
};

struct LabeledFeatures {
  Matrix features;
  ClassList labels;
};

struct SynthWorld {
  Matrix prototypes;    // K x d, unit rows
  Matrix image_centers; // K x d, unit rows
  LabeledFeatures train;
  LabeledFeatures test;
};

// K unit-norm prototypes: K + 1 Gaussian draws, Gram-Schmidt over the first
// min(K + 1, d) rows, then every prototype blended toward the extra (shared)
// row per proto_separation and re-normalized. Deterministic in config.seed.
Matrix MakePrototypes(const SynthWorldConfig& config);

// Pairwise prototype cosine produced by MakePrototypes when K + 1 <= d:
// (1 - s)^2 / (s^2 + (1 - s)^2).
double PrototypeCosineBound(double proto_separation);

// normalize(T_k + o) for one offset o shared by all classes, built from the
// modality gap and class bias described in SynthWorldConfig. Both zero
// returns the prototypes.
Matrix MakeImageCenters(const Matrix& prototypes, double gap, double class_bias,
                        std::uint64_t seed);

// n_per_class rows per class: center_k + N(0, noise_sigma^2 I), each row
// L2-normalized. Rows are grouped by class in ascending order.
LabeledFeatures MakeDataset(const Matrix& centers, int n_per_class, double noise_sigma,
                            std::uint64_t seed);

SynthWorld MakeWorld(const SynthWorldConfig& config);

// Nearest-prototype accuracy on the world's test split.
double ZeroShotAccuracy(const SynthWorld& world);

// Log-scale bisection on noise_sigma so the world's zero-shot test accuracy
// lands near `target`. Returns the config with the tuned noise.
SynthWorldConfig TuneNoiseForZeroShot(SynthWorldConfig config, double target,
                                      int iterations = 30);

}  // namespace fedst

#endif  // FEDST_SYNTH_WORLD_H_
