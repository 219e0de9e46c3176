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

#include "fedst/synth_world.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fedst/errors.h"
#include "fedst/rng.h"

namespace fedst {
namespace {

constexpr std::uint64_t kPrototypeTag = 1;
constexpr std::uint64_t kCenterTag = 3;
constexpr std::uint64_t kTrainTag = 4;
constexpr std::uint64_t kTestTag = 5;

Matrix GaussianMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

std::vector<std::string> SynthWorldConfig::Warnings() const {
  std::vector<std::string> out;
  if (num_classes > dim) {
    out.push_back("num_classes > dim: prototypes cannot be mutually orthogonal");
  }
  return out;
}

void SynthWorldConfig::Validate() const {
  if (num_classes < 1 || dim < 1) throw DomainError("num_classes and dim must be positive");
  if (n_per_class < 0 || n_test_per_class < 0) throw DomainError("sample counts must be >= 0");
  if (!(proto_separation > 0.0 && proto_separation <= 1.0)) {
    throw DomainError("proto_separation must lie in (0, 1]");
  }
  if (!(noise_sigma > 0.0)) throw DomainError("noise_sigma must be positive");
  if (!(modality_gap >= 0.0)) throw DomainError("modality_gap must be nonnegative");
  if (!(class_bias >= 0.0)) throw DomainError("class_bias must be nonnegative");
}

Matrix MakePrototypes(const SynthWorldConfig& config) {
  config.Validate();
  Rng rng(DeriveSeed(config.seed, {stream::kWorld, kPrototypeTag}));
  // Row K is the shared blend direction.
  Matrix draws = GaussianMatrix(config.num_classes + 1, config.dim, rng);

  const Eigen::Index ortho = std::min(draws.rows(), draws.cols());
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    if (i < ortho) {
      // Two passes of modified Gram-Schmidt keep the rows orthogonal to
      // ~1e-15 even for nearly dependent draws.
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < i; ++j) {
          draws.row(i) -= draws.row(i).dot(draws.row(j)) * draws.row(j);
        }
      }
    }
    draws.row(i).normalize();
  }

  Matrix protos = draws.topRows(config.num_classes);
  if (config.proto_separation < 1.0) {
    const double s = config.proto_separation;
    protos *= s;
    protos.rowwise() += (1.0 - s) * draws.row(config.num_classes);
    NormalizeRows(protos);
  }
  return protos;
}

double PrototypeCosineBound(double proto_separation) {
  const double s = proto_separation;
  return (1.0 - s) * (1.0 - s) / (s * s + (1.0 - s) * (1.0 - s));
}

Matrix MakeImageCenters(const Matrix& prototypes, double gap, double class_bias,
                        std::uint64_t seed) {
  if (!(gap >= 0.0)) throw DomainError("modality gap must be nonnegative");
  if (!(class_bias >= 0.0)) throw DomainError("class bias must be nonnegative");
  if (gap == 0.0 && class_bias == 0.0) return prototypes;
  Rng rng(DeriveSeed(seed, {stream::kWorld, kCenterTag}));
  const Eigen::Index classes = prototypes.rows();
  Vector offset = Vector::Zero(prototypes.cols());

  if (gap > 0.0) {
    // Random direction with the prototype span projected out.
    Vector dir = GaussianMatrix(1, prototypes.cols(), rng).row(0).transpose();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(prototypes.transpose());
    const Eigen::Index rank = std::min(prototypes.rows(), prototypes.cols());
    const Eigen::MatrixXd basis =
        qr.householderQ() * Eigen::MatrixXd::Identity(prototypes.cols(), rank);
    dir -= basis * (basis.transpose() * dir);
    if (dir.norm() > 1e-9) offset += gap * dir.normalized();
  }

  if (class_bias > 0.0 && classes > 1) {
    // Evenly spaced biases in [-class_bias, class_bias], randomly assigned.
    Vector bias(classes);
    for (Eigen::Index k = 0; k < classes; ++k) {
      bias(k) = class_bias * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(classes - 1));
    }
    std::shuffle(bias.data(), bias.data() + classes, rng);
    // Min-norm o with T o = bias.
    offset += prototypes.transpose() *
              (prototypes * prototypes.transpose()).completeOrthogonalDecomposition().solve(bias);
  }

  Matrix centers = prototypes;
  centers.rowwise() += offset.transpose();
  NormalizeRows(centers);
  return centers;
}

LabeledFeatures MakeDataset(const Matrix& centers, int n_per_class, double noise_sigma,
                            std::uint64_t seed) {
  if (!(noise_sigma > 0.0)) throw DomainError("noise_sigma must be positive");
  if (n_per_class < 0) throw DomainError("n_per_class must be nonnegative");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  const Eigen::Index classes = centers.rows();
  LabeledFeatures out;
  out.features.resize(classes * n_per_class, centers.cols());
  out.labels.reserve(static_cast<std::size_t>(classes * n_per_class));
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < classes; ++k) {
    for (int j = 0; j < n_per_class; ++j, ++row) {
      for (Eigen::Index c = 0; c < centers.cols(); ++c) {
        out.features(row, c) = centers(k, c) + noise(rng);
      }
      out.labels.push_back(static_cast<int>(k));
    }
  }
  NormalizeRows(out.features);
  return out;
}

SynthWorld MakeWorld(const SynthWorldConfig& config) {
  SynthWorld world;
  world.prototypes = MakePrototypes(config);
  world.image_centers = MakeImageCenters(world.prototypes, config.modality_gap, config.class_bias,
                                         config.seed);
  world.train = MakeDataset(world.image_centers, config.n_per_class, config.noise_sigma,
                            DeriveSeed(config.seed, {stream::kWorld, kTrainTag}));
  world.test = MakeDataset(world.image_centers, config.n_test_per_class, config.noise_sigma,
                           DeriveSeed(config.seed, {stream::kWorld, kTestTag}));
  return world;
}

}  // namespace fedst

namespace fedst {

double ZeroShotAccuracy(const SynthWorld& world) {
  const Matrix logits = world.test.features * world.prototypes.transpose();
  return Accuracy(ArgmaxRows(logits), world.test.labels);
}

SynthWorldConfig TuneNoiseForZeroShot(SynthWorldConfig config, double target, int iterations) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("target accuracy must lie in (0, 1)");
  double lo = 1e-4;
  double hi = 2.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = std::sqrt(lo * hi);
    config.noise_sigma = mid;
    if (ZeroShotAccuracy(MakeWorld(config)) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  config.noise_sigma = std::sqrt(lo * hi);
  return config;
}

}  // namespace fedst
