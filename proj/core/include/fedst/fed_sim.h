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

#ifndef FEDST_FED_SIM_H_
#define FEDST_FED_SIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedst/class_balance.h"
#include "fedst/model.h"
#include "fedst/partition.h"
#include "fedst/pseudo_label.h"
#include "fedst/types.h"

namespace fedst {

// Which loss terms a client optimizes. kCombined is the full method; the
// other two exist for component ablations.
enum class LossComponents { kCombined, kSelfTrainOnly, kSynthOnly };

// Training targets: soft pseudo-labels (unsupervised) or true labels
// (supervised FedAvg / centralized linear probe baselines).
enum class Objective { kSelfTraining, kSupervised };

struct TrainConfig {
  int rounds = 10;
  int local_epochs = 1;
  double participation = 0.1;
  int batch_size = 64;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  double beta = 0.9;
  double gamma = 0.0;
  double lambda = 1.0;
  double sigma = 0.03;
  std::uint64_t seed = 0;

  SamplingStrategy sampling = SamplingStrategy::kBalanced;
  LossComponents components = LossComponents::kCombined;
  // Weight client models by local sample count instead of uniformly.
  bool weighted_aggregation = false;
  // When false, RoundMetrics::wall_time_ms is reported as 0 so metric files
  // are byte-for-byte reproducible.
  bool record_wall_time = true;
  // Worker threads for the clients of one round. Results do not depend on it.
  int threads = 1;

  SgdOptions sgd() const { return {lr, momentum, weight_decay}; }
  // Throws DomainError for out-of-range values.
  void Validate() const;
};

struct Dataset {
  Matrix train;
  ClassList train_labels;  // partitioning, supervised baselines and evaluation only
  Matrix test;
  ClassList test_labels;

  int num_train() const { return static_cast<int>(train.rows()); }
};

struct ClientState {
  int id = 0;
  IndexList indices;  // rows of Dataset::train
  SoftLabelTable labels;
};

struct ServerState {
  LinearModel global;
  int round = 0;
  Matrix prototypes;
};

struct LossSummary {
  double total = 0.0;
  double self_train = 0.0;
  double synth = 0.0;
  int iterations = 0;
};

struct LocalResult {
  LinearModel model;
  OptimizerState optimizer;
  LossSummary loss;
};

struct RoundMetrics {
  int round = 0;
  double global_test_accuracy = 0.0;
  double mean_local_total_loss = 0.0;
  double mean_local_self_train_loss = 0.0;
  double mean_local_synth_loss = 0.0;
  double pseudo_label_accuracy = 0.0;
  std::vector<int> participating_clients;
  double wall_time_ms = 0.0;

  bool operator==(const RoundMetrics&) const = default;
};

// Global model = prototype-initialized linear head, round 0.
ServerState ServerPrepare(const Matrix& prototypes);

// ceil(participation * N) distinct client ids (sorted), uniform without
// replacement, deterministic per (seed, round). Clients whose size is zero
// in `client_sizes` (when given) are never picked; if too few clients are
// eligible all eligible ones are returned.
std::vector<int> SampleParticipants(int num_clients, double participation, std::uint64_t seed,
                                    int round, std::span<const std::size_t> client_sizes = {});

// One client's local training for one round, starting from `global` with a
// fresh optimizer. Self-training updates the client's soft-label rows of
// each batch from the pre-step predictions, then steps on
// L_iST + lambda * L_tSamp with a synthetic batch drawn from epoch-start
// pseudo-label counts. Batch order and synthetic draws derive from
// (seed, round, client id).
LocalResult LocalUpdate(ClientState& client, const LinearModel& global,
                        const Matrix& train_features, const Matrix& prototypes,
                        const TrainConfig& config, int round);

// Supervised variant: cross-entropy against `true_labels` (indexed like the
// training matrix), no pseudo-labels, no synthetic data.
LocalResult LocalUpdateSupervised(const ClientState& client, const LinearModel& global,
                                  const Matrix& train_features, std::span<const int> true_labels,
                                  const TrainConfig& config, int round);

// Elementwise mean of W and b. `weights`, when non-empty, gives relative
// client weights (normalized internally).
LinearModel Aggregate(std::span<const LinearModel> models, std::span<const double> weights = {});

// Argmax accuracy of `model` on (features, labels).
double EvaluateAccuracy(const LinearModel& model, const Matrix& features,
                        std::span<const int> labels);

// Full unsupervised protocol. Entry 0 is the evaluation of the
// prototype-initialized model; entry r the global model after round r.
std::vector<RoundMetrics> RunFederated(const Dataset& data, const PartitionMap& partition,
                                       const Matrix& prototypes, const TrainConfig& config);

// Supervised FedAvg baseline over the same protocol.
std::vector<RoundMetrics> RunSupervisedFedAvg(const Dataset& data, const PartitionMap& partition,
                                              const Matrix& prototypes,
                                              const TrainConfig& config);

struct CentralizedResult {
  std::vector<RoundMetrics> metrics;
  double final_accuracy = 0.0;
  LinearModel model;
};

// Training on the pooled training set as a single data holder (client id
// 0). Runs config.rounds passes of config.local_epochs epochs; each pass
// restarts the optimizer, matching one federated round. participation is
// ignored.
CentralizedResult RunCentralized(const Dataset& data, const Matrix& prototypes,
                                 const TrainConfig& config, Objective objective);

// Supervised linear probe from prototype initialization.
CentralizedResult RunCentralizedProbe(const Dataset& data, const Matrix& prototypes,
                                      const TrainConfig& config);

}  // namespace fedst

#endif  // FEDST_FED_SIM_H_
