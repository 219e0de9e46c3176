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

#include "fedst/config.h"

#include <filesystem>
#include <set>

#include "fedst/errors.h"
#include "fedst/io.h"

namespace fedst {
namespace {

using nlohmann::json;

void RejectUnknown(const json& doc, const std::set<std::string>& allowed, const char* section) {
  if (!doc.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
void Read(const json& doc, const char* key, T& out, const char* section) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

std::string ToString(Method method) {
  switch (method) {
    case Method::kFstCbdg: return "fst-cbdg";
    case Method::kSupervisedFedAvg: return "fedavg";
    case Method::kCentralizedProbe: return "centralized";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  if (name == "fst-cbdg") return Method::kFstCbdg;
  if (name == "fedavg") return Method::kSupervisedFedAvg;
  if (name == "centralized") return Method::kCentralizedProbe;
  throw ConfigError("unknown method '" + name + "'");
}

std::string ToString(SamplingStrategy strategy) {
  return strategy == SamplingStrategy::kBalanced ? "balanced" : "equal";
}

SamplingStrategy ParseSamplingStrategy(const std::string& name) {
  if (name == "balanced") return SamplingStrategy::kBalanced;
  if (name == "equal") return SamplingStrategy::kEqual;
  throw ConfigError("unknown sampling strategy '" + name + "'");
}

std::string ToString(LossComponents components) {
  switch (components) {
    case LossComponents::kCombined: return "combined";
    case LossComponents::kSelfTrainOnly: return "self-train";
    case LossComponents::kSynthOnly: return "synth";
  }
  return "unknown";
}

LossComponents ParseLossComponents(const std::string& name) {
  if (name == "combined") return LossComponents::kCombined;
  if (name == "self-train") return LossComponents::kSelfTrainOnly;
  if (name == "synth") return LossComponents::kSynthOnly;
  throw ConfigError("unknown loss components '" + name + "'");
}

json ToJson(const TrainConfig& c) {
  return json{{"rounds", c.rounds},
              {"local_epochs", c.local_epochs},
              {"participation", c.participation},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"momentum", c.momentum},
              {"weight_decay", c.weight_decay},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"lambda", c.lambda},
              {"sigma", c.sigma},
              {"seed", c.seed},
              {"sampling", ToString(c.sampling)},
              {"components", ToString(c.components)},
              {"weighted_aggregation", c.weighted_aggregation},
              {"record_wall_time", c.record_wall_time},
              {"threads", c.threads}};
}

TrainConfig TrainConfigFromJson(const json& doc, TrainConfig c) {
  static const std::set<std::string> kKeys = {
      "rounds", "local_epochs", "participation", "batch_size", "lr",
      "momentum", "weight_decay", "beta", "gamma", "lambda", "sigma", "seed",
      "sampling", "components", "weighted_aggregation", "record_wall_time", "threads"};
  RejectUnknown(doc, kKeys, "train");
  Read(doc, "rounds", c.rounds, "train");
  Read(doc, "local_epochs", c.local_epochs, "train");
  Read(doc, "participation", c.participation, "train");
  Read(doc, "batch_size", c.batch_size, "train");
  Read(doc, "lr", c.lr, "train");
  Read(doc, "momentum", c.momentum, "train");
  Read(doc, "weight_decay", c.weight_decay, "train");
  Read(doc, "beta", c.beta, "train");
  Read(doc, "gamma", c.gamma, "train");
  Read(doc, "lambda", c.lambda, "train");
  Read(doc, "sigma", c.sigma, "train");
  Read(doc, "seed", c.seed, "train");
  Read(doc, "weighted_aggregation", c.weighted_aggregation, "train");
  Read(doc, "record_wall_time", c.record_wall_time, "train");
  Read(doc, "threads", c.threads, "train");
  std::string name;
  if (doc.contains("sampling")) {
    Read(doc, "sampling", name, "train");
    c.sampling = ParseSamplingStrategy(name);
  }
  if (doc.contains("components")) {
    Read(doc, "components", name, "train");
    c.components = ParseLossComponents(name);
  }
  try {
    c.Validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return c;
}

json DescribeTrainDefaults() {
  const json values = ToJson(TrainConfig{});
  static const std::set<std::string> kFromPaper = {
      "rounds", "local_epochs", "participation", "lr", "momentum",
      "weight_decay", "beta", "gamma", "lambda", "sampling", "components"};
  json out = json::object();
  for (const auto& [key, value] : values.items()) {
    out[key] = {{"default", value}, {"source", kFromPaper.contains(key) ? "paper" : "artifact"}};
  }
  return out;
}

json ToJson(const PartitionSpec& p) {
  json doc{{"strategy", ToString(p.strategy)},
           {"num_clients", p.num_clients},
           {"shards_per_client", p.shards_per_client},
           {"alpha", p.alpha},
           {"seed", p.seed}};
  if (!p.manifest.empty()) doc["manifest"] = p.manifest;
  return doc;
}

PartitionSpec PartitionSpecFromJson(const json& doc, PartitionSpec p) {
  RejectUnknown(doc, {"strategy", "num_clients", "shards_per_client", "alpha", "seed", "manifest"},
                "partition");
  if (doc.contains("strategy")) {
    std::string name;
    Read(doc, "strategy", name, "partition");
    try {
      p.strategy = ParsePartitionStrategy(name);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("partition: ") + e.what());
    }
  }
  Read(doc, "num_clients", p.num_clients, "partition");
  Read(doc, "shards_per_client", p.shards_per_client, "partition");
  Read(doc, "alpha", p.alpha, "partition");
  Read(doc, "seed", p.seed, "partition");
  Read(doc, "manifest", p.manifest, "partition");
  if (p.num_clients < 1) throw ConfigError("partition.num_clients must be at least 1");
  return p;
}

json ToJson(const SynthWorldConfig& c) {
  return json{{"num_classes", c.num_classes},
              {"dim", c.dim},
              {"n_per_class", c.n_per_class},
              {"n_test_per_class", c.n_test_per_class},
              {"proto_separation", c.proto_separation},
              {"noise_sigma", c.noise_sigma},
              {"modality_gap", c.modality_gap},
              {"class_bias", c.class_bias},
              {"seed", c.seed}};
}

SynthWorldConfig SynthWorldConfigFromJson(const json& doc, SynthWorldConfig c) {
  RejectUnknown(doc,
                {"num_classes", "dim", "n_per_class", "n_test_per_class", "proto_separation",
                 "noise_sigma", "modality_gap", "class_bias", "seed"},
                "world");
  Read(doc, "num_classes", c.num_classes, "world");
  Read(doc, "dim", c.dim, "world");
  Read(doc, "n_per_class", c.n_per_class, "world");
  Read(doc, "n_test_per_class", c.n_test_per_class, "world");
  Read(doc, "proto_separation", c.proto_separation, "world");
  Read(doc, "noise_sigma", c.noise_sigma, "world");
  Read(doc, "modality_gap", c.modality_gap, "world");
  Read(doc, "class_bias", c.class_bias, "world");
  Read(doc, "seed", c.seed, "world");
  try {
    c.Validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("world: ") + e.what());
  }
  return c;
}

json ToJson(const RunConfig& c) {
  return json{{"method", ToString(c.method)},
              {"train", ToJson(c.train)},
              {"data",
               {{"train_features", c.data.train_features},
                {"test_features", c.data.test_features},
                {"prototypes", c.data.prototypes}}},
              {"partition", ToJson(c.partition)},
              {"output", {{"dir", c.output_dir}}}};
}

RunConfig RunConfigFromJson(const json& doc, const std::string& base_dir) {
  RejectUnknown(doc, {"method", "train", "data", "partition", "output"}, "run config");
  RunConfig c;
  if (doc.contains("method")) {
    std::string name;
    Read(doc, "method", name, "run config");
    c.method = ParseMethod(name);
  }
  if (doc.contains("train")) c.train = TrainConfigFromJson(doc["train"]);
  if (doc.contains("partition")) c.partition = PartitionSpecFromJson(doc["partition"]);
  if (doc.contains("data")) {
    const auto& data = doc["data"];
    RejectUnknown(data, {"train_features", "test_features", "prototypes"}, "data");
    Read(data, "train_features", c.data.train_features, "data");
    Read(data, "test_features", c.data.test_features, "data");
    Read(data, "prototypes", c.data.prototypes, "data");
  }
  if (doc.contains("output")) {
    RejectUnknown(doc["output"], {"dir"}, "output");
    Read(doc["output"], "dir", c.output_dir, "output");
  }
  c.data.train_features = Resolve(c.data.train_features, base_dir);
  c.data.test_features = Resolve(c.data.test_features, base_dir);
  c.data.prototypes = Resolve(c.data.prototypes, base_dir);
  c.partition.manifest = Resolve(c.partition.manifest, base_dir);
  c.output_dir = Resolve(c.output_dir, base_dir);
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  const auto doc = ReadJson(path);
  return RunConfigFromJson(doc, std::filesystem::path(path).parent_path().string());
}

}  // namespace fedst
