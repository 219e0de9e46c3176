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

// Command-line front end: synthetic data generation, partitioning, training
// runs, zero-shot evaluation, entropy reports and ablation sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedst/config.h"
#include "fedst/errors.h"
#include "fedst/fed_sim.h"
#include "fedst/io.h"
#include "fedst/partition.h"
#include "fedst/pseudo_label.h"
#include "fedst/synth_world.h"

namespace fedst {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by several subcommands. Unset optionals leave the config
// file's values alone.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> strategy;
  std::optional<int> shards;
  std::optional<double> alpha;
  std::optional<int> clients;
};

void AddOverrideFlags(CLI::App* cmd, Overrides& o, bool partition_flags) {
  cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory");
  if (!partition_flags) return;
  cmd->add_option("--strategy", o.strategy, "Partition strategy")
      ->check(CLI::IsMember({"iid", "sharding", "lda"}));
  cmd->add_option("--s", o.shards, "Shards per client (sharding)")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", o.alpha, "Dirichlet concentration (lda)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--clients", o.clients, "Number of clients")->check(CLI::PositiveNumber);
}

void ApplyPartitionOverrides(const Overrides& o, PartitionSpec& spec) {
  if (o.strategy) spec.strategy = ParsePartitionStrategy(*o.strategy);
  if (o.shards) spec.shards_per_client = *o.shards;
  if (o.alpha) spec.alpha = *o.alpha;
  if (o.clients) spec.num_clients = *o.clients;
  if (o.seed) spec.seed = *o.seed;
  if (o.strategy || o.shards || o.alpha || o.clients) spec.manifest.clear();
}

fs::path EnsureDir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

FeatureFile LoadLabeled(const std::string& path, const char* role) {
  if (path.empty()) throw ConfigError(std::string("no path given for ") + role);
  FeatureFile file = ReadFeatures(path, /*normalize=*/true);
  if (!file.labels) throw FormatError(path + ": " + role + " file carries no labels");
  return file;
}

PartitionMap BuildPartition(const PartitionSpec& spec, std::span<const int> labels) {
  if (!spec.manifest.empty()) {
    PartitionMap map = PartitionMap::FromJson(ReadJson(spec.manifest));
    if (map.num_samples != labels.size()) {
      throw FormatError(spec.manifest + ": manifest covers " + std::to_string(map.num_samples) +
                        " samples, training set has " + std::to_string(labels.size()));
    }
    return map;
  }
  switch (spec.strategy) {
    case PartitionStrategy::kIid:
      return PartitionIid(labels.size(), spec.num_clients, spec.seed);
    case PartitionStrategy::kSharding:
      return PartitionSharding(labels, spec.num_clients, spec.shards_per_client, spec.seed);
    case PartitionStrategy::kLda:
      return PartitionLda(labels, spec.num_clients, spec.alpha, spec.seed);
  }
  throw DomainError("unknown partition strategy");
}

struct LoadedRun {
  RunConfig config;
  Dataset data;
  Matrix prototypes;
};

LoadedRun LoadRun(const std::string& config_path, const Overrides& o) {
  LoadedRun run;
  run.config = LoadRunConfig(config_path);
  if (o.seed) run.config.train.seed = *o.seed;
  if (o.out) run.config.output_dir = *o.out;
  ApplyPartitionOverrides(o, run.config.partition);

  FeatureFile train = LoadLabeled(run.config.data.train_features, "training features");
  FeatureFile test = LoadLabeled(run.config.data.test_features, "test features");
  if (run.config.data.prototypes.empty()) throw ConfigError("no prototype file given");
  run.prototypes = ReadFeatures(run.config.data.prototypes, /*normalize=*/true).features;
  run.data = Dataset{std::move(train.features), std::move(*train.labels),
                     std::move(test.features), std::move(*test.labels)};
  return run;
}

json FinalMetricsJson(const RoundMetrics& m) {
  return json{{"round", m.round},
              {"global_test_accuracy", m.global_test_accuracy},
              {"mean_local_total_loss", m.mean_local_total_loss},
              {"mean_local_self_train_loss", m.mean_local_self_train_loss},
              {"mean_local_synth_loss", m.mean_local_synth_loss},
              {"pseudo_label_accuracy", m.pseudo_label_accuracy}};
}

std::vector<RoundMetrics> Execute(const LoadedRun& run, Method method,
                                  const TrainConfig& train, const PartitionMap& partition) {
  switch (method) {
    case Method::kFstCbdg:
      return RunFederated(run.data, partition, run.prototypes, train);
    case Method::kSupervisedFedAvg:
      return RunSupervisedFedAvg(run.data, partition, run.prototypes, train);
    case Method::kCentralizedProbe:
      return RunCentralizedProbe(run.data, run.prototypes, train).metrics;
  }
  throw DomainError("unknown method");
}

// --- subcommands ------------------------------------------------------------

int GenSynth(const std::string& config_path, std::optional<double> target_zs,
             const Overrides& o) {
  SynthWorldConfig config;
  if (!config_path.empty()) config = SynthWorldConfigFromJson(ReadJson(config_path));
  if (o.seed) config.seed = *o.seed;
  for (const auto& w : config.Warnings()) std::cerr << "warning: " << w << '\n';
  if (target_zs) config = TuneNoiseForZeroShot(config, *target_zs);
  const SynthWorld world = MakeWorld(config);

  const fs::path dir = EnsureDir(o.out.value_or("synth"));
  WriteFeatures((dir / "train.fedf").string(), world.train.features,
                std::span<const int>(world.train.labels), true);
  WriteFeatures((dir / "test.fedf").string(), world.test.features,
                std::span<const int>(world.test.labels), true);
  WriteFeatures((dir / "prototypes.fedf").string(), world.prototypes, std::nullopt, true);
  std::vector<std::string> names;
  for (int k = 0; k < config.num_classes; ++k) names.push_back("class_" + std::to_string(k));
  WriteClassNames((dir / "class_names.json").string(), names);
  const double zs = ZeroShotAccuracy(world);
  WriteJson((dir / "world.json").string(),
            json{{"world", ToJson(config)}, {"zero_shot_test_accuracy", zs}});
  std::printf("wrote %s: %lld train, %lld test, K=%d, d=%d, zero-shot %.4f\n",
              dir.string().c_str(), static_cast<long long>(world.train.features.rows()),
              static_cast<long long>(world.test.features.rows()), config.num_classes,
              config.dim, zs);
  return 0;
}

int PartitionCmd(const std::string& labels_path, const std::string& config_path,
                 const Overrides& o) {
  PartitionSpec spec;
  if (!config_path.empty()) spec = PartitionSpecFromJson(ReadJson(config_path));
  ApplyPartitionOverrides(o, spec);
  const FeatureFile file = LoadLabeled(labels_path, "label");
  const PartitionMap map = BuildPartition(spec, *file.labels);
  const fs::path dir = EnsureDir(o.out.value_or("."));
  WriteJson((dir / "partition.json").string(), map.ToJson());
  std::printf("wrote %s: %zu clients, %zu empty\n", (dir / "partition.json").string().c_str(),
              map.num_clients(), map.EmptyClients().size());
  return 0;
}

int RunCmd(const std::string& config_path, const Overrides& o) {
  const LoadedRun run = LoadRun(config_path, o);
  const PartitionMap partition = BuildPartition(run.config.partition, run.data.train_labels);
  const auto metrics = Execute(run, run.config.method, run.config.train, partition);

  const fs::path dir = EnsureDir(run.config.output_dir);
  ExportMetrics(metrics, (dir / "metrics.csv").string());
  WriteJson((dir / "partition.json").string(), partition.ToJson());
  json manifest{{"config", ToJson(run.config)},
                {"partition_manifest", (dir / "partition.json").string()},
                {"zero_shot_test_accuracy", metrics.front().global_test_accuracy},
                {"final", FinalMetricsJson(metrics.back())}};
  WriteJson((dir / "manifest.json").string(), manifest);
  for (const auto& m : metrics) {
    std::printf("round %2d  test acc %.4f  pseudo-label acc %.4f  loss %.5f\n", m.round,
                m.global_test_accuracy, m.pseudo_label_accuracy, m.mean_local_total_loss);
  }
  return 0;
}

int EvalZeroShot(const std::string& features_path, const std::string& prototypes_path,
                 const Overrides& o) {
  const FeatureFile file = LoadLabeled(features_path, "feature");
  const Matrix protos = ReadFeatures(prototypes_path, true).features;
  const double acc = Accuracy(ArgmaxRows(ZeroShotProbs(file.features, protos)), *file.labels);
  std::printf("zero-shot accuracy %.4f over %lld samples\n", acc,
              static_cast<long long>(file.features.rows()));
  if (o.out) {
    const fs::path dir = EnsureDir(*o.out);
    WriteJson((dir / "zeroshot.json").string(),
              json{{"features", features_path}, {"prototypes", prototypes_path},
                   {"accuracy", acc}});
  }
  return 0;
}

int EntropyCmd(const std::string& features_path, const std::string& prototypes_path,
               const Overrides& o) {
  const Matrix features = ReadFeatures(features_path, true).features;
  const Matrix protos = ReadFeatures(prototypes_path, true).features;
  const EntropyReport report = ComputeEntropyReport(ZeroShotProbs(features, protos));
  const fs::path dir = EnsureDir(o.out.value_or("."));
  WriteEntropyCsv(report, (dir / "entropy.csv").string());
  std::size_t high = 0;
  for (double h : report.per_sample) high += h > 0.9 * report.upper_bound;
  std::printf("mean %.4f  max %.4f  upper bound %.4f (nats)  rows above 0.9 bound %.1f%%\n",
              report.mean, report.max, report.upper_bound,
              100.0 * static_cast<double>(high) /
                  static_cast<double>(std::max<std::size_t>(1, report.per_sample.size())));
  return 0;
}

int Ablate(const std::string& config_path, const Overrides& o) {
  const LoadedRun run = LoadRun(config_path, o);
  const PartitionMap partition = BuildPartition(run.config.partition, run.data.train_labels);
  struct Variant {
    std::string name;
    LossComponents components;
    SamplingStrategy sampling;
  };
  const Variant variants[] = {
      {"combined-balanced", LossComponents::kCombined, SamplingStrategy::kBalanced},
      {"combined-equal", LossComponents::kCombined, SamplingStrategy::kEqual},
      {"self-train-only", LossComponents::kSelfTrainOnly, SamplingStrategy::kBalanced},
      {"synth-only", LossComponents::kSynthOnly, SamplingStrategy::kBalanced},
  };
  const fs::path dir = EnsureDir(run.config.output_dir);
  json summary = json::array();
  for (const auto& v : variants) {
    TrainConfig train = run.config.train;
    train.components = v.components;
    train.sampling = v.sampling;
    const auto metrics = RunFederated(run.data, partition, run.prototypes, train);
    ExportMetrics(metrics, (dir / ("metrics_" + v.name + ".csv")).string());
    summary.push_back({{"variant", v.name},
                       {"zero_shot_test_accuracy", metrics.front().global_test_accuracy},
                       {"final_test_accuracy", metrics.back().global_test_accuracy}});
    std::printf("%-18s final test acc %.4f\n", v.name.c_str(),
                metrics.back().global_test_accuracy);
  }
  WriteJson((dir / "ablation.json").string(),
            json{{"config", ToJson(run.config)}, {"results", summary}});
  return 0;
}

}  // namespace
}  // namespace fedst

int main(int argc, char** argv) {
  using namespace fedst;
  CLI::App app{"Federated self-training over frozen vision-language features"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;
  std::string features_path;
  std::string prototypes_path;
  std::optional<double> target_zs;

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic aligned-feature world");
  gen->add_option("--config", config_path, "World config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--target-zero-shot", target_zs,
                  "Tune noise so zero-shot test accuracy lands here")
      ->check(CLI::Range(0.0, 1.0));
  AddOverrideFlags(gen, o, false);

  auto* part = app.add_subcommand("partition", "Split a labeled feature file across clients");
  part->add_option("--labels", features_path, "Labeled feature file")
      ->required()
      ->check(CLI::ExistingFile);
  part->add_option("--config", config_path, "Partition spec (JSON)")->check(CLI::ExistingFile);
  AddOverrideFlags(part, o, true);

  auto* run = app.add_subcommand("run", "Train from a run config; writes metrics and manifest");
  run->add_option("--config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  AddOverrideFlags(run, o, true);

  auto* zs = app.add_subcommand("eval-zeroshot", "Zero-shot accuracy of prototypes on features");
  zs->add_option("--features", features_path)->required()->check(CLI::ExistingFile);
  zs->add_option("--prototypes", prototypes_path)->required()->check(CLI::ExistingFile);
  AddOverrideFlags(zs, o, false);

  auto* ent = app.add_subcommand("entropy-report", "Per-sample zero-shot entropy CSV");
  ent->add_option("--features", features_path)->required()->check(CLI::ExistingFile);
  ent->add_option("--prototypes", prototypes_path)->required()->check(CLI::ExistingFile);
  AddOverrideFlags(ent, o, false);

  auto* abl = app.add_subcommand("ablate", "Loss-component and sampling-strategy sweep");
  abl->add_option("--config", config_path, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  AddOverrideFlags(abl, o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return GenSynth(config_path, target_zs, o);
    if (*part) return PartitionCmd(features_path, config_path, o);
    if (*run) return RunCmd(config_path, o);
    if (*zs) return EvalZeroShot(features_path, prototypes_path, o);
    if (*ent) return EntropyCmd(features_path, prototypes_path, o);
    if (*abl) return Ablate(config_path, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
