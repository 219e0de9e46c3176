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

#ifndef FEDST_RNG_H_
#define FEDST_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedst {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Derives a stream seed from a base seed and a list of coordinates
// (round, client id, purpose tag, ...). Order-sensitive.
std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

// Stream tags used with DeriveSeed so independent consumers never share draws.
namespace stream {
inline constexpr std::uint64_t kParticipants = 0x7061727469636970ULL;
inline constexpr std::uint64_t kBatchOrder = 0x62617463686f7264ULL;
inline constexpr std::uint64_t kSynthetic = 0x73796e7468657469ULL;
inline constexpr std::uint64_t kPartition = 0x7061727469746e6fULL;
inline constexpr std::uint64_t kWorld = 0x776f726c64000000ULL;
}  // namespace stream

}  // namespace fedst

#endif  // FEDST_RNG_H_
