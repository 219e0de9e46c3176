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

#ifndef FEDST_CONFIG_H_
#define FEDST_CONFIG_H_

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "fedst/fed_sim.h"
#include "fedst/partition.h"
#include "fedst/synth_world.h"

namespace fedst {

enum class Method { kFstCbdg, kSupervisedFedAvg, kCentralizedProbe };

std::string ToString(Method method);
Method ParseMethod(const std::string& name);
std::string ToString(SamplingStrategy strategy);
SamplingStrategy ParseSamplingStrategy(const std::string& name);
std::string ToString(LossComponents components);
LossComponents ParseLossComponents(const std::string& name);

struct PartitionSpec {
  PartitionStrategy strategy = PartitionStrategy::kIid;
  int num_clients = 100;
  int shards_per_client = 2;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  // Existing partition manifest; when set the fields above are ignored.
  std::string manifest;
};

struct DataPaths {
  std::string train_features;
  std::string test_features;
  std::string prototypes;
};

// A run document:
//   { "method": "fst-cbdg", "train": {...}, "data": {...},
//     "partition": {...}, "output": {"dir": "..."} }
// Unknown keys are rejected at every level; missing keys keep defaults.
struct RunConfig {
  Method method = Method::kFstCbdg;
  TrainConfig train;
  DataPaths data;
  PartitionSpec partition;
  std::string output_dir = "out";
};

nlohmann::json ToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& doc, TrainConfig base = {});

// Default values of every TrainConfig key, each tagged with where the value
// comes from ("paper" for the published setup, "artifact" otherwise).
nlohmann::json DescribeTrainDefaults();

nlohmann::json ToJson(const PartitionSpec& spec);
PartitionSpec PartitionSpecFromJson(const nlohmann::json& doc, PartitionSpec base = {});

nlohmann::json ToJson(const SynthWorldConfig& config);
SynthWorldConfig SynthWorldConfigFromJson(const nlohmann::json& doc, SynthWorldConfig base = {});

nlohmann::json ToJson(const RunConfig& config);
// Relative data/output paths are resolved against `base_dir` when non-empty.
RunConfig RunConfigFromJson(const nlohmann::json& doc, const std::string& base_dir = "");
RunConfig LoadRunConfig(const std::string& path);

}  // namespace fedst

#endif  // FEDST_CONFIG_H_
