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

#ifndef FEDST_IO_H_
#define FEDST_IO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedst/fed_sim.h"
#include "fedst/types.h"

namespace fedst {

// Feature file layout (all integers little-endian):
//   0  char[4] magic "FEDF"
//   4  u32     version (1)
//   8  u32     n
//  12  u32     d
//  16  u32     flags
//  20  f32     n * d payload, row-major
//      u32     n labels, present iff flags bit 0
inline constexpr char kFeatureMagic[4] = {'F', 'E', 'D', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::uint32_t kFlagLabels = 1u << 0;
inline constexpr std::uint32_t kFlagNormalized = 1u << 1;
inline constexpr std::size_t kFeatureHeaderSize = 20;

struct FeatureFileHeader {
  std::uint32_t version = kFeatureVersion;
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  std::uint32_t flags = 0;

  bool has_labels() const { return (flags & kFlagLabels) != 0; }
  bool normalized() const { return (flags & kFlagNormalized) != 0; }
};

struct FeatureFile {
  FeatureFileHeader header;
  Matrix features;
  std::optional<ClassList> labels;
};

// Values are stored in single precision. Throws NumericError for non-finite
// entries, IoError when the file cannot be written.
void WriteFeatures(const std::string& path, const Matrix& features,
                   std::optional<std::span<const int>> labels, bool normalized);

// Parses and validates a feature file. With `normalize`, rows are
// L2-normalized after loading unless the file says they already are.
// Throws FormatError on bad magic/version/size, IoError on open failure.
FeatureFile ReadFeatures(const std::string& path, bool normalize = false);

// Only the 20-byte header.
FeatureFileHeader ReadFeatureHeader(const std::string& path);

// Class-name sidecar: {"class_names": ["plane", ...]} in class-index order.
void WriteClassNames(const std::string& path, const std::vector<std::string>& names);
std::vector<std::string> ReadClassNames(const std::string& path);

inline constexpr char kMetricsCsvHeader[] =
    "round,global_test_accuracy,mean_local_total_loss,mean_local_self_train_loss,"
    "mean_local_synth_loss,pseudo_label_accuracy,wall_time_ms";

void ExportMetrics(std::span<const RoundMetrics> metrics, const std::string& path);
// Inverse of ExportMetrics (participating_clients is not stored).
std::vector<RoundMetrics> ReadMetricsCsv(const std::string& path);

nlohmann::json ReadJson(const std::string& path);
void WriteJson(const std::string& path, const nlohmann::json& doc);

}  // namespace fedst

#endif  // FEDST_IO_H_
