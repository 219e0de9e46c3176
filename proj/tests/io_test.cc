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

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fedst/errors.h"
#include "support/oracles.h"

namespace fedst {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedst_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  static std::vector<char> Slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  static void Dump(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  fs::path dir_;
};

std::uint32_t U32At(const std::vector<char>& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  }
  return v;
}

TEST_F(IoTest, RoundTripIsExactForSinglePrecisionValues) {
  std::mt19937_64 rng(1);
  Matrix m = testing::RandomMatrix(rng, 13, 7);
  m = m.cast<float>().cast<double>();
  const std::vector<int> labels{0, 1, 2, 3, 4, 5, 6, 0, 1, 2, 3, 4, 5};
  WriteFeatures(Path("a.fedf"), m, std::span<const int>(labels), false);
  const FeatureFile file = ReadFeatures(Path("a.fedf"));
  EXPECT_EQ(file.features, m);
  ASSERT_TRUE(file.labels.has_value());
  EXPECT_EQ(*file.labels, labels);
  EXPECT_TRUE(file.header.has_labels());
  EXPECT_FALSE(file.header.normalized());
}

TEST_F(IoTest, HeaderLayout) {
  WriteFeatures(Path("b.fedf"), Matrix::Zero(100, 512), std::nullopt, false);
  const FeatureFileHeader h = ReadFeatureHeader(Path("b.fedf"));
  EXPECT_EQ(h.n, 100u);
  EXPECT_EQ(h.d, 512u);
  EXPECT_EQ(h.flags, 0u);
  EXPECT_EQ(h.version, 1u);

  const auto bytes = Slurp(Path("b.fedf"));
  ASSERT_EQ(bytes.size(), 20u + 100u * 512u * 4u);
  EXPECT_EQ(std::memcmp(bytes.data(), "FEDF", 4), 0);
  EXPECT_EQ(U32At(bytes, 4), 1u);
  EXPECT_EQ(U32At(bytes, 8), 100u);
  EXPECT_EQ(U32At(bytes, 12), 512u);
  EXPECT_EQ(U32At(bytes, 16), 0u);
}

TEST_F(IoTest, PayloadIsLittleEndianFloat) {
  WriteFeatures(Path("c.fedf"), Matrix{{1.0, -2.5}}, std::nullopt, true);
  const auto bytes = Slurp(Path("c.fedf"));
  ASSERT_EQ(bytes.size(), 28u);
  EXPECT_EQ(U32At(bytes, 16), 2u);
  EXPECT_EQ(U32At(bytes, 20), 0x3f800000u);
  EXPECT_EQ(U32At(bytes, 24), 0xc0200000u);
}

TEST_F(IoTest, BadMagicIsFormatError) {
  WriteFeatures(Path("d.fedf"), Matrix::Ones(2, 2), std::nullopt, false);
  auto bytes = Slurp(Path("d.fedf"));
  bytes[0] = 'X';
  Dump(Path("d.fedf"), bytes);
  EXPECT_THROW(ReadFeatures(Path("d.fedf")), FormatError);
}

TEST_F(IoTest, TruncationAndTrailingBytes) {
  WriteFeatures(Path("e.fedf"), Matrix::Ones(3, 4), std::nullopt, false);
  auto bytes = Slurp(Path("e.fedf"));
  Dump(Path("short.fedf"), std::vector<char>(bytes.begin(), bytes.end() - 3));
  EXPECT_THROW(ReadFeatures(Path("short.fedf")), FormatError);
  Dump(Path("tiny.fedf"), std::vector<char>(bytes.begin(), bytes.begin() + 10));
  EXPECT_THROW(ReadFeatures(Path("tiny.fedf")), FormatError);
  bytes.push_back(0);
  Dump(Path("long.fedf"), bytes);
  EXPECT_THROW(ReadFeatures(Path("long.fedf")), FormatError);
}

TEST_F(IoTest, VersionAndFlagsAreChecked) {
  WriteFeatures(Path("f.fedf"), Matrix::Ones(1, 1), std::nullopt, false);
  auto bytes = Slurp(Path("f.fedf"));
  bytes[4] = 2;
  Dump(Path("v2.fedf"), bytes);
  EXPECT_THROW(ReadFeatures(Path("v2.fedf")), FormatError);
  bytes[4] = 1;
  bytes[16] = 4;
  Dump(Path("flags.fedf"), bytes);
  EXPECT_THROW(ReadFeatures(Path("flags.fedf")), FormatError);
}

TEST_F(IoTest, LabelsMissingFromPayloadAreTruncation) {
  WriteFeatures(Path("g.fedf"), Matrix::Ones(2, 1), std::nullopt, false);
  auto bytes = Slurp(Path("g.fedf"));
  bytes[16] = 1;
  Dump(Path("g.fedf"), bytes);
  EXPECT_THROW(ReadFeatures(Path("g.fedf")), FormatError);
}

TEST_F(IoTest, MissingFileIsIoError) {
  EXPECT_THROW(ReadFeatures(Path("absent.fedf")), IoError);
}

TEST_F(IoTest, WriterRejectsNonFiniteValues) {
  Matrix m = Matrix::Ones(2, 2);
  m(1, 0) = std::nan("");
  EXPECT_THROW(WriteFeatures(Path("h.fedf"), m, std::nullopt, false), NumericError);
  m(1, 0) = 1e300;
  EXPECT_THROW(WriteFeatures(Path("h.fedf"), m, std::nullopt, false), NumericError);
}

TEST_F(IoTest, NormalizationOnLoad) {
  WriteFeatures(Path("raw.fedf"), Matrix{{3.0, 4.0}}, std::nullopt, false);
  const FeatureFile raw = ReadFeatures(Path("raw.fedf"), /*normalize=*/true);
  EXPECT_NEAR(raw.features(0, 0), 0.6, 1e-7);
  EXPECT_NEAR(raw.features(0, 1), 0.8, 1e-7);
  // A file flagged as normalized is trusted as-is.
  WriteFeatures(Path("flagged.fedf"), Matrix{{3.0, 4.0}}, std::nullopt, true);
  EXPECT_EQ(ReadFeatures(Path("flagged.fedf"), true).features(0, 0), 3.0);
  EXPECT_EQ(ReadFeatures(Path("raw.fedf"), false).features(0, 0), 3.0);
}

TEST_F(IoTest, ClassNamesSidecar) {
  const std::vector<std::string> names{"plane", "car", "bird"};
  WriteClassNames(Path("names.json"), names);
  EXPECT_EQ(ReadClassNames(Path("names.json")), names);
  WriteJson(Path("bad.json"), nlohmann::json{{"names", names}});
  EXPECT_THROW(ReadClassNames(Path("bad.json")), FormatError);
  std::ofstream(Path("broken.json")) << "{not json";
  EXPECT_THROW(ReadJson(Path("broken.json")), FormatError);
}

TEST_F(IoTest, EmptyRunExportsHeaderOnly) {
  ExportMetrics({}, Path("empty.csv"));
  std::ifstream in(Path("empty.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0],
            "round,global_test_accuracy,mean_local_total_loss,mean_local_self_train_loss,"
            "mean_local_synth_loss,pseudo_label_accuracy,wall_time_ms");
}

TEST_F(IoTest, MetricsRoundTripThroughText) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<RoundMetrics> metrics(11);
  for (int r = 0; r <= 10; ++r) {
    auto& m = metrics[static_cast<std::size_t>(r)];
    m.round = r;
    m.global_test_accuracy = u(rng) / 3;
    m.mean_local_total_loss = u(rng);
    m.mean_local_self_train_loss = u(rng);
    m.mean_local_synth_loss = u(rng);
    m.pseudo_label_accuracy = u(rng) / 3;
    m.wall_time_ms = u(rng) * 100;
  }
  ExportMetrics(metrics, Path("m.csv"));
  std::ifstream in(Path("m.csv"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 11 + 1);

  const auto back = ReadMetricsCsv(Path("m.csv"));
  ASSERT_EQ(back.size(), metrics.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].round, metrics[i].round);
    EXPECT_NEAR(back[i].global_test_accuracy, metrics[i].global_test_accuracy, 1e-9);
    EXPECT_NEAR(back[i].mean_local_total_loss, metrics[i].mean_local_total_loss, 1e-9);
    EXPECT_NEAR(back[i].mean_local_self_train_loss, metrics[i].mean_local_self_train_loss, 1e-9);
    EXPECT_NEAR(back[i].mean_local_synth_loss, metrics[i].mean_local_synth_loss, 1e-9);
    EXPECT_NEAR(back[i].pseudo_label_accuracy, metrics[i].pseudo_label_accuracy, 1e-9);
    EXPECT_NEAR(back[i].wall_time_ms, metrics[i].wall_time_ms, 1e-9);
  }
}

TEST_F(IoTest, TenRoundsGiveElevenLines) {
  // One line per entry plus the header. (A full 10-round run also carries the
  // round-0 row, which MetricsRoundTripThroughText covers.)
  std::vector<RoundMetrics> metrics(10);
  for (int r = 0; r < 10; ++r) metrics[static_cast<std::size_t>(r)].round = r + 1;
  ExportMetrics(metrics, Path("ten.csv"));
  std::ifstream in(Path("ten.csv"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 11);
}

TEST_F(IoTest, MalformedMetricsAreRejected) {
  std::ofstream(Path("bad.csv")) << "round,acc\n1,0.5\n";
  EXPECT_THROW(ReadMetricsCsv(Path("bad.csv")), FormatError);
  std::ofstream(Path("bad2.csv")) << kMetricsCsvHeader << "\n1,0.5,x,0,0,0,0\n";
  EXPECT_THROW(ReadMetricsCsv(Path("bad2.csv")), FormatError);
}

}  // namespace
}  // namespace fedst
