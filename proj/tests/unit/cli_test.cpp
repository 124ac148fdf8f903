/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "spb/data.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "spb_cli" /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  CliRun spb(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd = std::string(SPB_CLI_PATH) + " " + args + " > " + o.string() + " 2> " +
                            e.string();
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(o), slurp(e)};
  }

  fs::path write_config(const std::string& name, const nlohmann::json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  static std::size_t lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string s;
    while (std::getline(in, s)) ++n;
    return n;
  }

  fs::path dir_;
};

TEST_F(Cli, SimulateAndSplitSeventyOne) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 71}}}});
  const auto r = spb("simulate --config " + cfg.string() + " --seed 3 --split-fraction 0.2 --out " +
                     (dir_ / "a").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(lines(dir_ / "a" / "data.csv"), 72u);
  EXPECT_EQ(lines(dir_ / "a" / "train.csv"), 58u);
  EXPECT_EQ(lines(dir_ / "a" / "validation.csv"), 15u);
  const auto truth = nlohmann::json::parse(slurp(dir_ / "a" / "truth.json"));
  EXPECT_EQ(truth["seed"], 3);
}

TEST_F(Cli, SimulateIsByteIdenticalForSameSeed) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 100}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --seed 8 --out " + (dir_ / "a").string()).status, 0);
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --seed 8 --out " + (dir_ / "b").string()).status, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "data.csv"), slurp(dir_ / "b" / "data.csv"));
}

TEST_F(Cli, ZeroVarianceSimulationIsConstant) {
  const auto cfg = write_config(
      "c.json", {{"simulation",
                  {{"n_points", 20}, {"sigma0_sq", 0.0}, {"sigma_xi_sq", 0.0}, {"sigma_eps_sq", 0.0}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const auto loaded = spb::load_csv((dir_ / "data.csv").string());
  for (double v : loaded.values()) EXPECT_EQ(v, 385.0);
}

TEST_F(Cli, FitEdwWritesThetaAndDataReference) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 30}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const auto r = spb("fit --method EDW --data " + (dir_ / "data.csv").string() + " --out " + dir_.string());
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "model_EDW.json"));
  EXPECT_EQ(j["params"], (nlohmann::json{{"theta_edw", 1.0}}));
  EXPECT_EQ(fs::path(j["training_data"]["path"].get<std::string>()).filename(), "data.csv");
}

TEST_F(Cli, FitTskRefusesLargeData) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 5000}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const auto r = spb("fit --method TSK --data " + (dir_ / "data.csv").string() + " --out " + dir_.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("FRK"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "model_TSK.json"));
}

TEST_F(Cli, FitFrkTwiceGivesIdenticalParameters) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 150}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const std::string data = (dir_ / "data.csv").string();
  ASSERT_EQ(spb("fit --method FRK --data " + data + " --out " + (dir_ / "a").string()).status, 0);
  ASSERT_EQ(spb("fit --method FRK --data " + data + " --out " + (dir_ / "b").string()).status, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "model_FRK.json"), slurp(dir_ / "b" / "model_FRK.json"));
}

TEST_F(Cli, PredictTskReproducesTrainingValues) {
  const auto cfg = write_config(
      "c.json", {{"simulation", {{"n_points", 40}}}, {"fit", {{"sigma_eps_sq", 0.0}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  const std::string data = (dir_ / "data.csv").string();
  ASSERT_EQ(spb("fit --config " + cfg.string() + " --method TSK --data " + data + " --out " + dir_.string()).status, 0);
  const auto r = spb("predict --model " + (dir_ / "model_TSK.json").string() + " --locations " +
                     data + " --out " + dir_.string());
  ASSERT_EQ(r.status, 0) << r.err;
  const auto train = spb::load_csv(data);
  std::ifstream in(dir_ / "predictions.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lon,lat,mean,variance");
  for (std::size_t i = 0; i < train.size(); ++i) {
    ASSERT_TRUE(std::getline(in, line));
    std::stringstream ss(line);
    std::string lon, lat, mean;
    std::getline(ss, lon, ',');
    std::getline(ss, lat, ',');
    std::getline(ss, mean, ',');
    EXPECT_NEAR(std::stod(mean), train.values()[i], 1e-6);
  }
}

TEST_F(Cli, PredictEmptyBatchAndRaster) {
  const auto cfg = write_config("c.json", {{"simulation", {{"n_points", 30}}}});
  ASSERT_EQ(spb("simulate --config " + cfg.string() + " --out " + dir_.string()).status, 0);
  ASSERT_EQ(spb("fit --method FRK --data " + (dir_ / "data.csv").string() + " --out " + dir_.string()).status, 0);
  std::ofstream(dir_ / "none.csv") << "lon,lat\n";
  const auto r = spb("predict --model " + (dir_ / "model_FRK.json").string() + " --locations " +
                     (dir_ / "none.csv").string() + " --raster \"-100,30,-80,50,1\" --out " + dir_.string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "predictions.csv"), "lon,lat,mean,variance\n");
  EXPECT_EQ(lines(dir_ / "raster.csv"), 21u * 21u + 1u);
}

TEST_F(Cli, CompareWritesSevenRowTable) {
  const auto cfg = write_config(
      "c.json", {{"simulation", {{"n_points", 71}}},
                 {"fit", {{"mpp", {{"chain_length", 200}, {"burn_in", 100}}}}}});
  const auto r = spb("compare --config " + cfg.string() + " --method all --seed 2 --out " + dir_.string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(lines(dir_ / "report.csv"), 8u);
  EXPECT_EQ(slurp(dir_ / "report.csv"), r.out);
  const auto j = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(j["split"]["n_train"], 57);
  EXPECT_EQ(j["split"]["n_validation"], 14);
}

TEST_F(Cli, ShowDefaultsAndBadInput) {
  const auto r = spb("show-defaults");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["split_fraction"], 0.2);
  EXPECT_NE(spb("compare --method XYZ --out " + dir_.string()).status, 0);
  EXPECT_NE(spb("predict --model " + (dir_ / "missing.json").string()).status, 0);
}

TEST_F(Cli, ThreadBudgetIsValidated) {
  const std::string cmd = "SPB_THREADS=abc " + std::string(SPB_CLI_PATH) +
                          " compare --method EDW --out " + dir_.string() + " > /dev/null 2>&1";
  EXPECT_NE(std::system(cmd.c_str()), 0);
}

}  // namespace
