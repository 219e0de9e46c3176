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

#ifndef FEDST_PARTITION_H_
#define FEDST_PARTITION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedst/types.h"

namespace fedst {

enum class PartitionStrategy { kIid, kSharding, kLda };

std::string ToString(PartitionStrategy strategy);
// Accepts "iid", "sharding", "lda". Throws DomainError otherwise.
PartitionStrategy ParsePartitionStrategy(const std::string& name);

// Disjoint assignment of dataset rows to clients. Each client's list is
// sorted ascending.
struct PartitionMap {
  std::vector<IndexList> clients;
  PartitionStrategy strategy = PartitionStrategy::kIid;
  int shards_per_client = 0;  // sharding only
  double alpha = 0.0;         // lda only
  std::uint64_t seed = 0;
  std::size_t num_samples = 0;

  std::size_t num_clients() const { return clients.size(); }
  std::vector<int> EmptyClients() const;
  // True when the lists are disjoint and cover [0, num_samples).
  bool IsExactCover() const;

  nlohmann::json ToJson() const;
  static PartitionMap FromJson(const nlohmann::json& doc);
  bool operator==(const PartitionMap&) const = default;
};

// Random permutation cut into contiguous chunks whose sizes differ by <= 1.
PartitionMap PartitionIid(std::size_t num_samples, int num_clients, std::uint64_t seed);

// Label-sorted order cut into num_clients * shards_per_client contiguous
// shards (sizes differ by <= 1); every client draws its shards without
// replacement.
PartitionMap PartitionSharding(std::span<const int> labels, int num_clients,
                               int shards_per_client, std::uint64_t seed);

// Per class, proportions p ~ Dir(alpha * 1_N) across clients, turned into
// integer counts by largest remainder. Clients may end up empty.
PartitionMap PartitionLda(std::span<const int> labels, int num_clients, double alpha,
                          std::uint64_t seed);

}  // namespace fedst

#endif  // FEDST_PARTITION_H_
