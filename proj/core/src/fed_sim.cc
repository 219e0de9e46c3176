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

#include "fedst/fed_sim.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fedst/errors.h"
#include "fedst/rng.h"

namespace fedst {
namespace {

using Clock = std::chrono::steady_clock;

// Shuffled local positions for one epoch.
std::vector<std::size_t> BatchOrder(std::size_t n, const TrainConfig& config, int round,
                                    int client_id, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(config.seed, {stream::kBatchOrder, static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(client_id),
                                   static_cast<std::uint64_t>(epoch)}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// Shared epoch/batch loop. `table` selects self-training; when null the
// client trains on `true_labels`.
LocalResult TrainLocal(const ClientState& client, SoftLabelTable* table,
                       std::span<const int> true_labels, const LinearModel& global,
                       const Matrix& train, const Matrix& prototypes, const TrainConfig& config,
                       int round) {
  const std::size_t n = client.indices.size();
  if (n == 0) throw DomainError("local update on a client without data");
  const int num_classes = global.num_classes();
  const bool self_training = table != nullptr;
  const bool use_real = !self_training || config.components != LossComponents::kSynthOnly;
  const bool use_synth = self_training &&
                         config.components != LossComponents::kSelfTrainOnly &&
                         config.lambda > 0.0;
  const double lambda = use_synth ? config.lambda : 0.0;

  LocalResult result{global, OptimizerState::Fresh(global, config.sgd()), {}};
  Rng synth_rng(DeriveSeed(config.seed, {stream::kSynthetic, static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(client.id)}));
  const Matrix empty_features(0, global.dim());
  const Matrix empty_targets(0, num_classes);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    Budgets budgets;
    if (use_synth) {
      const auto hard = HardLabels(*table);
      budgets = ComputeBudgets(ClassCounts::FromLabels(hard, num_classes, config.gamma),
                               config.sampling);
    }
    const auto order = BatchOrder(n, config, round, client.id, epoch);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> positions(order.data() + start, stop - start);
      IndexList rows(positions.size());
      for (std::size_t i = 0; i < positions.size(); ++i) rows[i] = client.indices[positions[i]];
      const Matrix features = GatherRows(train, rows);

      Matrix targets;
      if (self_training) {
        UpdateRows(*table, positions, Forward(result.model, features), config.beta);
        targets = GatherRows(table->q, positions);
      } else {
        ClassList classes(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) classes[i] = true_labels[rows[i]];
        targets = OneHot(classes, num_classes);
      }

      SynthBatch synth;
      if (use_synth) {
        synth = SampleSynthetic(prototypes, budgets, config.sigma, synth_rng);
      } else {
        synth.features = empty_features;
      }

      LossValue loss;
      const Gradients grads =
          use_real ? ComputeGradients(result.model, features, targets, synth.features,
                                      synth.classes, lambda, &loss)
                   : ComputeGradients(result.model, empty_features, empty_targets,
                                      synth.features, synth.classes, lambda, &loss);
      SgdStep(result.model, result.optimizer, grads);

      result.loss.total += loss.total;
      result.loss.self_train += loss.self_train;
      result.loss.synth += loss.synth;
      ++result.loss.iterations;
    }
  }
  if (result.loss.iterations > 0) {
    const double it = static_cast<double>(result.loss.iterations);
    result.loss.total /= it;
    result.loss.self_train /= it;
    result.loss.synth /= it;
  }
  return result;
}

std::vector<ClientState> MakeClients(const Dataset& data, const PartitionMap& partition,
                                     const Matrix& prototypes, bool with_labels) {
  std::vector<ClientState> clients(partition.num_clients());
  for (std::size_t c = 0; c < clients.size(); ++c) {
    clients[c].id = static_cast<int>(c);
    clients[c].indices = partition.clients[c];
    if (with_labels) {
      clients[c].labels = InitTable(ZeroShotProbs(GatherRows(data.train, clients[c].indices),
                                                  prototypes));
    }
  }
  return clients;
}

double PseudoLabelAccuracy(std::span<const ClientState> clients, std::span<const int> truth) {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& client : clients) {
    const auto hard = HardLabels(client.labels);
    for (std::size_t i = 0; i < hard.size(); ++i) hits += hard[i] == truth[client.indices[i]];
    total += hard.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

// Runs `fn(i)` for i in [0, count) on up to `threads` workers. Rethrows the
// first failure.
template <typename Fn>
void ParallelFor(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void CheckInputs(const Dataset& data, const PartitionMap& partition, const Matrix& prototypes,
                 const TrainConfig& config) {
  config.Validate();
  if (data.train.cols() != prototypes.cols() || data.test.cols() != prototypes.cols()) {
    throw ShapeError("dataset feature dim != prototype dim");
  }
  if (partition.num_samples != static_cast<std::size_t>(data.train.rows()) ||
      !partition.IsExactCover()) {
    throw ShapeError("partition does not cover the training set");
  }
  if (data.test_labels.size() != static_cast<std::size_t>(data.test.rows())) {
    throw ShapeError("test labels length != test rows");
  }
}

std::vector<RoundMetrics> RunProtocol(const Dataset& data, const PartitionMap& partition,
                                      const Matrix& prototypes, const TrainConfig& config,
                                      Objective objective) {
  CheckInputs(data, partition, prototypes, config);
  const bool self_training = objective == Objective::kSelfTraining;
  if (!self_training && data.train_labels.size() != static_cast<std::size_t>(data.train.rows())) {
    throw ShapeError("supervised training needs one label per training row");
  }
  ServerState server = ServerPrepare(prototypes);
  std::vector<ClientState> clients = MakeClients(data, partition, prototypes, self_training);
  std::vector<std::size_t> sizes(clients.size());
  for (std::size_t c = 0; c < clients.size(); ++c) sizes[c] = clients[c].indices.size();

  std::vector<RoundMetrics> metrics;
  metrics.reserve(static_cast<std::size_t>(config.rounds) + 1);
  RoundMetrics initial;
  initial.global_test_accuracy = EvaluateAccuracy(server.global, data.test, data.test_labels);
  initial.pseudo_label_accuracy =
      self_training ? PseudoLabelAccuracy(clients, data.train_labels) : 1.0;
  metrics.push_back(initial);

  for (int round = 1; round <= config.rounds; ++round) {
    const auto start = Clock::now();
    const auto participants = SampleParticipants(static_cast<int>(clients.size()),
                                                 config.participation, config.seed, round, sizes);
    std::vector<LinearModel> uploads(participants.size());
    std::vector<LossSummary> losses(participants.size());
    ParallelFor(participants.size(), config.threads, [&](std::size_t i) {
      ClientState& client = clients[static_cast<std::size_t>(participants[i])];
      LocalResult local =
          self_training
              ? LocalUpdate(client, server.global, data.train, prototypes, config, round)
              : LocalUpdateSupervised(client, server.global, data.train, data.train_labels,
                                      config, round);
      uploads[i] = std::move(local.model);
      losses[i] = local.loss;
    });

    if (!uploads.empty()) {
      std::vector<double> weights;
      if (config.weighted_aggregation) {
        for (int id : participants) {
          weights.push_back(static_cast<double>(sizes[static_cast<std::size_t>(id)]));
        }
      }
      server.global = Aggregate(uploads, weights);
    }
    server.round = round;

    RoundMetrics m;
    m.round = round;
    m.global_test_accuracy = EvaluateAccuracy(server.global, data.test, data.test_labels);
    for (const auto& l : losses) {
      m.mean_local_total_loss += l.total;
      m.mean_local_self_train_loss += l.self_train;
      m.mean_local_synth_loss += l.synth;
    }
    if (!losses.empty()) {
      const double count = static_cast<double>(losses.size());
      m.mean_local_total_loss /= count;
      m.mean_local_self_train_loss /= count;
      m.mean_local_synth_loss /= count;
    }
    m.pseudo_label_accuracy =
        self_training ? PseudoLabelAccuracy(clients, data.train_labels) : 1.0;
    m.participating_clients = participants;
    if (config.record_wall_time) {
      m.wall_time_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    metrics.push_back(std::move(m));
  }
  return metrics;
}

}  // namespace

void TrainConfig::Validate() const {
  if (rounds < 0) throw DomainError("rounds must be nonnegative");
  if (local_epochs < 1) throw DomainError("local_epochs must be at least 1");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw DomainError("participation must lie in (0, 1]");
  }
  if (batch_size < 1) throw DomainError("batch_size must be at least 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be nonnegative");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (threads < 1) throw DomainError("threads must be at least 1");
  // Delegates the optimizer checks.
  OptimizerState::Fresh(LinearModel{Matrix::Zero(1, 1), Vector::Zero(1)}, sgd());
}

ServerState ServerPrepare(const Matrix& prototypes) {
  return ServerState{InitFromPrototypes(prototypes), 0, prototypes};
}

std::vector<int> SampleParticipants(int num_clients, double participation, std::uint64_t seed,
                                    int round, std::span<const std::size_t> client_sizes) {
  if (num_clients < 1) throw DomainError("number of clients must be at least 1");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw DomainError("participation must lie in (0, 1]");
  }
  if (!client_sizes.empty() && client_sizes.size() != static_cast<std::size_t>(num_clients)) {
    throw ShapeError("client_sizes length != number of clients");
  }
  std::vector<int> eligible;
  for (int c = 0; c < num_clients; ++c) {
    if (client_sizes.empty() || client_sizes[static_cast<std::size_t>(c)] > 0) {
      eligible.push_back(c);
    }
  }
  // The epsilon keeps 0.1 * 100 from rounding up to 11.
  const auto wanted = static_cast<std::size_t>(
      std::ceil(participation * static_cast<double>(num_clients) - 1e-9));
  Rng rng(DeriveSeed(seed, {stream::kParticipants, static_cast<std::uint64_t>(round)}));
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(std::min(wanted, eligible.size()));
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

LocalResult LocalUpdate(ClientState& client, const LinearModel& global,
                        const Matrix& train_features, const Matrix& prototypes,
                        const TrainConfig& config, int round) {
  if (client.labels.size() != client.indices.size()) {
    throw ShapeError("soft-label table rows != client sample count");
  }
  return TrainLocal(client, &client.labels, {}, global, train_features, prototypes, config,
                    round);
}

LocalResult LocalUpdateSupervised(const ClientState& client, const LinearModel& global,
                                  const Matrix& train_features, std::span<const int> true_labels,
                                  const TrainConfig& config, int round) {
  if (true_labels.size() != static_cast<std::size_t>(train_features.rows())) {
    throw ShapeError("true labels length != training rows");
  }
  return TrainLocal(client, nullptr, true_labels, global, train_features, Matrix(), config,
                    round);
}

LinearModel Aggregate(std::span<const LinearModel> models, std::span<const double> weights) {
  if (models.empty()) throw DomainError("Aggregate: no models");
  if (!weights.empty() && weights.size() != models.size()) {
    throw ShapeError("Aggregate: weight count != model count");
  }
  const auto& first = models.front();
  for (const auto& m : models) {
    if (m.weights.rows() != first.weights.rows() || m.weights.cols() != first.weights.cols() ||
        m.bias.size() != first.bias.size()) {
      throw ShapeError("Aggregate: model shapes differ");
    }
  }
  std::vector<double> w(models.size(), 1.0 / static_cast<double>(models.size()));
  if (!weights.empty()) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("Aggregate: weights must sum to a positive value");
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (weights[i] < 0.0) throw DomainError("Aggregate: negative weight");
      w[i] = weights[i] / total;
    }
  }
  LinearModel out{Matrix::Zero(first.weights.rows(), first.weights.cols()),
                  Vector::Zero(first.bias.size())};
  for (std::size_t i = 0; i < models.size(); ++i) {
    out.weights += w[i] * models[i].weights;
    out.bias += w[i] * models[i].bias;
  }
  return out;
}

double EvaluateAccuracy(const LinearModel& model, const Matrix& features,
                        std::span<const int> labels) {
  return Accuracy(ArgmaxRows(Forward(model, features)), labels);
}

std::vector<RoundMetrics> RunFederated(const Dataset& data, const PartitionMap& partition,
                                       const Matrix& prototypes, const TrainConfig& config) {
  return RunProtocol(data, partition, prototypes, config, Objective::kSelfTraining);
}

std::vector<RoundMetrics> RunSupervisedFedAvg(const Dataset& data, const PartitionMap& partition,
                                              const Matrix& prototypes,
                                              const TrainConfig& config) {
  return RunProtocol(data, partition, prototypes, config, Objective::kSupervised);
}

CentralizedResult RunCentralized(const Dataset& data, const Matrix& prototypes,
                                 const TrainConfig& config, Objective objective) {
  config.Validate();
  if (data.train.cols() != prototypes.cols() || data.test.cols() != prototypes.cols()) {
    throw ShapeError("dataset feature dim != prototype dim");
  }
  const bool self_training = objective == Objective::kSelfTraining;
  ClientState pooled;
  pooled.id = 0;
  pooled.indices.resize(static_cast<std::size_t>(data.train.rows()));
  std::iota(pooled.indices.begin(), pooled.indices.end(), std::size_t{0});
  if (self_training) pooled.labels = InitTable(ZeroShotProbs(data.train, prototypes));

  CentralizedResult result;
  result.model = InitFromPrototypes(prototypes);
  auto pseudo_accuracy = [&] {
    return self_training ? PseudoLabelAccuracy({&pooled, 1}, data.train_labels) : 1.0;
  };

  RoundMetrics initial;
  initial.global_test_accuracy = EvaluateAccuracy(result.model, data.test, data.test_labels);
  initial.pseudo_label_accuracy = pseudo_accuracy();
  result.metrics.push_back(initial);

  for (int round = 1; round <= config.rounds; ++round) {
    const auto start = Clock::now();
    LocalResult pass =
        self_training
            ? LocalUpdate(pooled, result.model, data.train, prototypes, config, round)
            : LocalUpdateSupervised(pooled, result.model, data.train, data.train_labels, config,
                                    round);
    result.model = std::move(pass.model);

    RoundMetrics m;
    m.round = round;
    m.global_test_accuracy = EvaluateAccuracy(result.model, data.test, data.test_labels);
    m.mean_local_total_loss = pass.loss.total;
    m.mean_local_self_train_loss = pass.loss.self_train;
    m.mean_local_synth_loss = pass.loss.synth;
    m.pseudo_label_accuracy = pseudo_accuracy();
    m.participating_clients = {0};
    if (config.record_wall_time) {
      m.wall_time_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    result.metrics.push_back(std::move(m));
  }
  result.final_accuracy = result.metrics.back().global_test_accuracy;
  return result;
}

CentralizedResult RunCentralizedProbe(const Dataset& data, const Matrix& prototypes,
                                      const TrainConfig& config) {
  return RunCentralized(data, prototypes, config, Objective::kSupervised);
}

}  // namespace fedst
