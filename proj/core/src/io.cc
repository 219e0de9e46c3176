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

#include "fedst/io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

#include "fedst/errors.h"

namespace fedst {
namespace {

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<unsigned char>(v >> shift));
}

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

FeatureFileHeader ParseHeader(const unsigned char* bytes, std::size_t size,
                              const std::string& path) {
  if (size < kFeatureHeaderSize) throw FormatError(path + ": truncated header");
  if (std::memcmp(bytes, kFeatureMagic, 4) != 0) throw FormatError(path + ": bad magic");
  FeatureFileHeader h;
  h.version = GetU32(bytes + 4);
  h.n = GetU32(bytes + 8);
  h.d = GetU32(bytes + 12);
  h.flags = GetU32(bytes + 16);
  if (h.version != kFeatureVersion) {
    throw FormatError(path + ": unsupported version " + std::to_string(h.version));
  }
  if ((h.flags & ~(kFlagLabels | kFlagNormalized)) != 0) {
    throw FormatError(path + ": unknown flag bits");
  }
  return h;
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

void WriteFeatures(const std::string& path, const Matrix& features,
                   std::optional<std::span<const int>> labels, bool normalized) {
  CheckFinite(features, "WriteFeatures");
  if (features.rows() > std::numeric_limits<std::uint32_t>::max() ||
      features.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("WriteFeatures: matrix too large for the format");
  }
  if (labels && labels->size() != static_cast<std::size_t>(features.rows())) {
    throw ShapeError("WriteFeatures: label count != row count");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(kFeatureHeaderSize + static_cast<std::size_t>(features.size()) * 4 +
                (labels ? labels->size() * 4 : 0));
  bytes.insert(bytes.end(), kFeatureMagic, kFeatureMagic + 4);
  PutU32(bytes, kFeatureVersion);
  PutU32(bytes, static_cast<std::uint32_t>(features.rows()));
  PutU32(bytes, static_cast<std::uint32_t>(features.cols()));
  PutU32(bytes, (labels ? kFlagLabels : 0u) | (normalized ? kFlagNormalized : 0u));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const auto f = static_cast<float>(features(i, j));
      if (!std::isfinite(f)) throw NumericError("WriteFeatures: value overflows single precision");
      PutU32(bytes, std::bit_cast<std::uint32_t>(f));
    }
  }
  if (labels) {
    for (int label : *labels) {
      if (label < 0) throw DomainError("WriteFeatures: negative label");
      PutU32(bytes, static_cast<std::uint32_t>(label));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

FeatureFileHeader ReadFeatureHeader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  unsigned char bytes[kFeatureHeaderSize];
  in.read(reinterpret_cast<char*>(bytes), kFeatureHeaderSize);
  return ParseHeader(bytes, static_cast<std::size_t>(in.gcount()), path);
}

FeatureFile ReadFeatures(const std::string& path, bool normalize) {
  const auto bytes = ReadAll(path);
  FeatureFile file;
  file.header = ParseHeader(bytes.data(), bytes.size(), path);
  const std::uint64_t n = file.header.n;
  const std::uint64_t d = file.header.d;
  const std::uint64_t expected =
      kFeatureHeaderSize + n * d * 4 + (file.header.has_labels() ? n * 4 : 0);
  if (bytes.size() < expected) throw FormatError(path + ": truncated payload");
  if (bytes.size() > expected) throw FormatError(path + ": trailing bytes after payload");

  file.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const unsigned char* p = bytes.data() + kFeatureHeaderSize;
  for (Eigen::Index i = 0; i < file.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < file.features.cols(); ++j, p += 4) {
      const float f = std::bit_cast<float>(GetU32(p));
      if (!std::isfinite(f)) throw FormatError(path + ": non-finite feature value");
      file.features(i, j) = f;
    }
  }
  if (file.header.has_labels()) {
    ClassList labels(static_cast<std::size_t>(n));
    for (auto& label : labels) {
      const std::uint32_t v = GetU32(p);
      p += 4;
      if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw FormatError(path + ": label out of range");
      }
      label = static_cast<int>(v);
    }
    file.labels = std::move(labels);
  }
  if (normalize && !file.header.normalized()) NormalizeRows(file.features);
  return file;
}

void WriteClassNames(const std::string& path, const std::vector<std::string>& names) {
  WriteJson(path, nlohmann::json{{"class_names", names}});
}

std::vector<std::string> ReadClassNames(const std::string& path) {
  const auto doc = ReadJson(path);
  try {
    return doc.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void ExportMetrics(std::span<const RoundMetrics> metrics, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kMetricsCsvHeader << '\n';
  for (const auto& m : metrics) {
    out << m.round << ',' << FormatDouble(m.global_test_accuracy) << ','
        << FormatDouble(m.mean_local_total_loss) << ','
        << FormatDouble(m.mean_local_self_train_loss) << ','
        << FormatDouble(m.mean_local_synth_loss) << ',' << FormatDouble(m.pseudo_label_accuracy)
        << ',' << FormatDouble(m.wall_time_ms) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<RoundMetrics> ReadMetricsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader) {
    throw FormatError(path + ": unexpected metrics header");
  }
  std::vector<RoundMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) throw FormatError(path + ": expected 7 columns");
    RoundMetrics m;
    try {
      std::size_t used = 0;
      m.round = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument(cells[0]);
      double* fields[] = {&m.global_test_accuracy,       &m.mean_local_total_loss,
                          &m.mean_local_self_train_loss, &m.mean_local_synth_loss,
                          &m.pseudo_label_accuracy,      &m.wall_time_ms};
      for (std::size_t i = 0; i < 6; ++i) {
        *fields[i] = std::stod(cells[i + 1], &used);
        if (used != cells[i + 1].size()) throw std::invalid_argument(cells[i + 1]);
      }
    } catch (const std::exception&) {
      throw FormatError(path + ": malformed metrics row '" + line + "'");
    }
    out.push_back(m);
  }
  return out;
}

nlohmann::json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteJson(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace fedst
