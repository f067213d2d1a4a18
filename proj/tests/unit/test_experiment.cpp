// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>

#include "tbhom/experiment.hpp"

using namespace tbhom;
using nlohmann::json;

namespace {

json wave_json() {
  return {{"kind", "wave-compare"}, {"coefficient", {{"type", "laminate"}, {"values", {1.0, 4.0}}}},
          {"eps", {0.25, 0.125}},   {"T", 2},
          {"L", 16}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Override, DottedKeysAndValueParsing) {
  json j{{"kind", "transport"}};
  apply_override(j, "T=4");
  apply_override(j, "coefficient.type=laminate");
  apply_override(j, "coefficient.values=[1,4]");
  apply_override(j, "eps=[0.5,0.25]");
  EXPECT_EQ(j["T"], 4);
  EXPECT_EQ(j["coefficient"]["type"], "laminate");
  EXPECT_EQ(j["coefficient"]["values"], json::array({1, 4}));
  EXPECT_THROW(apply_override(j, "novalue"), ConfigurationError);
  EXPECT_THROW(apply_override(j, "a..b=1"), ConfigurationError);
}

TEST(Config, StrictKeysAndKindDefaults) {
  auto c = ExperimentConfig::from_json(wave_json());
  EXPECT_EQ(c.cell_n, c.points_per_period);
  EXPECT_EQ(c.fine_scheme(), FineScheme::finite_difference);
  EXPECT_DOUBLE_EQ(c.threshold("min_order"), 0.9);
  json bad = wave_json();
  bad["bogus"] = 1;
  EXPECT_THROW(ExperimentConfig::from_json(bad), ConfigurationError);
  bad = wave_json();
  bad["thresholds"] = {{"eigendefect", 1}};
  EXPECT_THROW(ExperimentConfig::from_json(bad), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"kind", "nope"}}), ConfigurationError);
  auto s = ExperimentConfig::from_json({{"kind", "source-term"}, {"L", 16}, {"eps", {0.25}}});
  EXPECT_EQ(s.fine_scheme(), FineScheme::spectral);
}

TEST(Config, HashTracksContent) {
  auto a = ExperimentConfig::from_json(wave_json());
  auto b = ExperimentConfig::from_json(wave_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  json j = wave_json();
  j["T"] = 3;
  EXPECT_NE(ExperimentConfig::from_json(j).hash(), a.hash());
  EXPECT_EQ(fnv1a64(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Validate, ReportsErrorsAndGuardWarnings) {
  EXPECT_TRUE(validate(ExperimentConfig::from_json(wave_json())).ok());
  json j = wave_json();
  j.erase("eps");
  auto d = validate(ExperimentConfig::from_json(j));
  ASSERT_FALSE(d.ok());
  EXPECT_NE(d.errors[0].find("eps"), std::string::npos);
  j = wave_json();
  j["eps"] = {0.125, 0.25};
  EXPECT_FALSE(validate(ExperimentConfig::from_json(j)).ok());
  j = wave_json();
  j["eps"] = {0.3};
  EXPECT_FALSE(validate(ExperimentConfig::from_json(j)).ok());
  j = wave_json();
  j["T"] = 40;
  j["snapshot_interval"] = 1;
  d = validate(ExperimentConfig::from_json(j));
  EXPECT_TRUE(d.ok());
  ASSERT_FALSE(d.warnings.empty());
  EXPECT_NE(d.warnings[0].find("max admissible T"), std::string::npos);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(37);
  parallel_for(37, 4, [&](int i) { hits[std::size_t(i)]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(8, 3, [](int i) {
                 if (i == 5) throw ConfigurationError("boom");
               }),
               ConfigurationError);
}

TEST(Run, ConstantCorrectorsManifestAndDeterminism) {
  const auto dir = std::filesystem::temp_directory_path() / "tbhom_test_experiment";
  std::filesystem::remove_all(dir);
  auto c = ExperimentConfig::from_json({{"kind", "correctors"}, {"dim", 2}, {"cell_n", 16}, {"order", 3}});
  auto r1 = run_experiment(c, (dir / "a").string());
  auto r2 = run_experiment(c, (dir / "b").string(), 3);
  EXPECT_TRUE(r1.passed());
  for (const auto& f : r1.files) EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
  auto m = json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["config_hash"], c.hash());
  EXPECT_TRUE(m["passed"].get<bool>());
  // Lambda table: lambda_0 = 1 and every higher entry zero.
  std::ifstream t(dir / "a" / "lambda_table.csv");
  std::string line;
  std::getline(t, line);
  EXPECT_EQ(line, "# config_hash=" + c.hash() + " kind=correctors");
  std::getline(t, line);
  while (std::getline(t, line)) {
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    const int j = std::stoi(line.substr(line.rfind(',', line.rfind(',') - 1) + 1));
    EXPECT_NEAR(v, j == 0 ? 1.0 : 0.0, 1e-14) << line;
  }
  std::filesystem::remove_all(dir);
}

TEST(Run, InvalidConfigThrowsConfigurationError) {
  json j = wave_json();
  j["L"] = 0;
  EXPECT_THROW(run_experiment(ExperimentConfig::from_json(j), "/tmp/tbhom_unused"), ConfigurationError);
}
