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

#include "fedst/partition.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fedst/errors.h"
#include "fedst/rng.h"

namespace fedst {
namespace {

void CheckClients(int num_clients) {
  if (num_clients < 1) throw DomainError("number of clients must be at least 1");
}

void SortClients(PartitionMap& map) {
  for (auto& list : map.clients) std::sort(list.begin(), list.end());
}

Rng PartitionRng(std::uint64_t seed) { return Rng(DeriveSeed(seed, {stream::kPartition})); }

// Dirichlet(alpha * 1_n) via normalized gamma draws. With very small alpha
// every gamma draw can underflow to zero; the limit then puts all mass on a
// single uniformly chosen client.
std::vector<double> SampleDirichlet(int n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& v : p) {
    v = gamma(rng);
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(p.begin(), p.end(), 0.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    p[static_cast<std::size_t>(pick(rng))] = 1.0;
    return p;
  }
  for (auto& v : p) v /= sum;
  return p;
}

// Integer counts summing to `total` closest to total * p (largest remainder,
// ties to the lowest index).
std::vector<std::size_t> LargestRemainder(const std::vector<double>& p, std::size_t total) {
  std::vector<std::size_t> counts(p.size());
  std::vector<double> remainder(p.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Floating error can overshoot by a unit in pathological cases.
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

}  // namespace

std::string ToString(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kIid: return "iid";
    case PartitionStrategy::kSharding: return "sharding";
    case PartitionStrategy::kLda: return "lda";
  }
  return "unknown";
}

PartitionStrategy ParsePartitionStrategy(const std::string& name) {
  if (name == "iid") return PartitionStrategy::kIid;
  if (name == "sharding") return PartitionStrategy::kSharding;
  if (name == "lda") return PartitionStrategy::kLda;
  throw DomainError("unknown partition strategy '" + name + "'");
}

std::vector<int> PartitionMap::EmptyClients() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].empty()) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool PartitionMap::IsExactCover() const {
  std::vector<char> seen(num_samples, 0);
  std::size_t total = 0;
  for (const auto& list : clients) {
    for (std::size_t idx : list) {
      if (idx >= num_samples || seen[idx]) return false;
      seen[idx] = 1;
      ++total;
    }
  }
  return total == num_samples;
}

nlohmann::json PartitionMap::ToJson() const {
  nlohmann::json doc;
  doc["strategy"] = ToString(strategy);
  doc["num_clients"] = clients.size();
  doc["num_samples"] = num_samples;
  doc["seed"] = seed;
  if (strategy == PartitionStrategy::kSharding) doc["shards_per_client"] = shards_per_client;
  if (strategy == PartitionStrategy::kLda) doc["alpha"] = alpha;
  doc["empty_clients"] = EmptyClients();
  doc["clients"] = clients;
  return doc;
}

PartitionMap PartitionMap::FromJson(const nlohmann::json& doc) {
  PartitionMap map;
  try {
    map.strategy = ParsePartitionStrategy(doc.at("strategy").get<std::string>());
    map.num_samples = doc.at("num_samples").get<std::size_t>();
    map.seed = doc.at("seed").get<std::uint64_t>();
    map.clients = doc.at("clients").get<std::vector<IndexList>>();
    if (map.strategy == PartitionStrategy::kSharding) {
      map.shards_per_client = doc.at("shards_per_client").get<int>();
    }
    if (map.strategy == PartitionStrategy::kLda) map.alpha = doc.at("alpha").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("partition manifest: ") + e.what());
  }
  if (doc.contains("num_clients") &&
      doc["num_clients"].get<std::size_t>() != map.clients.size()) {
    throw FormatError("partition manifest: num_clients does not match client list");
  }
  if (!map.IsExactCover()) throw FormatError("partition manifest is not an exact cover");
  SortClients(map);
  return map;
}

PartitionMap PartitionIid(std::size_t num_samples, int num_clients, std::uint64_t seed) {
  CheckClients(num_clients);
  const auto n_clients = static_cast<std::size_t>(num_clients);
  if (n_clients > num_samples) throw DomainError("more clients than samples");
  IndexList perm(num_samples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = PartitionRng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  PartitionMap map;
  map.strategy = PartitionStrategy::kIid;
  map.seed = seed;
  map.num_samples = num_samples;
  map.clients.resize(n_clients);
  const std::size_t base = num_samples / n_clients;
  const std::size_t extra = num_samples % n_clients;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < n_clients; ++c) {
    const std::size_t size = base + (c < extra ? 1 : 0);
    map.clients[c].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                          perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  SortClients(map);
  return map;
}

PartitionMap PartitionSharding(std::span<const int> labels, int num_clients,
                               int shards_per_client, std::uint64_t seed) {
  CheckClients(num_clients);
  if (shards_per_client < 1) throw DomainError("shards per client must be at least 1");
  const std::size_t n = labels.size();
  const std::size_t num_shards =
      static_cast<std::size_t>(num_clients) * static_cast<std::size_t>(shards_per_client);
  if (num_shards > n) throw DomainError("clients * shards exceeds the number of samples");

  IndexList sorted(n);
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

  std::vector<std::size_t> shard_start(num_shards + 1, 0);
  const std::size_t base = n / num_shards;
  const std::size_t extra = n % num_shards;
  for (std::size_t s = 0; s < num_shards; ++s) {
    shard_start[s + 1] = shard_start[s] + base + (s < extra ? 1 : 0);
  }

  std::vector<std::size_t> shard_order(num_shards);
  std::iota(shard_order.begin(), shard_order.end(), std::size_t{0});
  Rng rng = PartitionRng(seed);
  std::shuffle(shard_order.begin(), shard_order.end(), rng);

  PartitionMap map;
  map.strategy = PartitionStrategy::kSharding;
  map.shards_per_client = shards_per_client;
  map.seed = seed;
  map.num_samples = n;
  map.clients.resize(static_cast<std::size_t>(num_clients));
  for (std::size_t i = 0; i < num_shards; ++i) {
    const std::size_t shard = shard_order[i];
    auto& list = map.clients[i / static_cast<std::size_t>(shards_per_client)];
    for (std::size_t p = shard_start[shard]; p < shard_start[shard + 1]; ++p) {
      list.push_back(sorted[p]);
    }
  }
  SortClients(map);
  return map;
}

PartitionMap PartitionLda(std::span<const int> labels, int num_clients, double alpha,
                          std::uint64_t seed) {
  CheckClients(num_clients);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");

  std::map<int, IndexList> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  Rng rng = PartitionRng(seed);
  PartitionMap map;
  map.strategy = PartitionStrategy::kLda;
  map.alpha = alpha;
  map.seed = seed;
  map.num_samples = labels.size();
  map.clients.resize(static_cast<std::size_t>(num_clients));
  for (auto& [cls, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto p = SampleDirichlet(num_clients, alpha, rng);
    const auto counts = LargestRemainder(p, members.size());
    std::size_t pos = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      auto& list = map.clients[c];
      list.insert(list.end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                  members.begin() + static_cast<std::ptrdiff_t>(pos + counts[c]));
      pos += counts[c];
    }
  }
  SortClients(map);
  return map;
}

}  // namespace fedst
