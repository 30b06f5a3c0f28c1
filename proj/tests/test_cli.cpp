// Copyright 2026 The tkg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "support.hpp"

#ifndef TKG_CLI_PATH
#define TKG_CLI_PATH "tkg"
#endif

namespace tkg {
namespace {

using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// `env` is a prefix like "TKG_K=3 "; paths here contain no shell metacharacters.
CliRun run(const testing::TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = env + "'" + std::string(TKG_CLI_PATH) + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string serum(const std::string& file) {
  return (testing::data_dir() / "serum" / file).string();
}

std::string ingest_serum(const testing::TempDir& dir) {
  const std::string base = (dir / "base").string();
  const CliRun r = run(dir, "ingest --metadata " + serum("metadata.jsonl") + " --reviews " +
                             serum("reviews.jsonl") + " --out " + base);
  EXPECT_EQ(r.code, 0) << r.err;
  return base;
}

TEST(Cli, UnknownFlagIsUsageError) {
  testing::TempDir dir("cli-usage");
  const CliRun r = run(dir, "stats --graph x --no-such-flag");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, MissingSubcommand) {
  testing::TempDir dir("cli-none");
  EXPECT_EQ(run(dir, "").code, 2);
}

TEST(Cli, Version) {
  testing::TempDir dir("cli-version");
  const CliRun r = run(dir, "--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, MissingInputIsIoError) {
  testing::TempDir dir("cli-io");
  const CliRun r = run(dir, "stats --graph " + (dir / "absent").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err).at("error"), "io");
}

TEST(Cli, IngestStatsValidateHandCounts) {
  testing::TempDir dir("cli-serum");
  const std::string base = ingest_serum(dir);
  ASSERT_TRUE(std::filesystem::exists(std::filesystem::path(base) / "manifest.json"));

  // 3 items, 3 brands, 3 type nodes, 2 users; 3 produced_by + 9 belongs_to + 3 purchases
  const CliRun st = run(dir, "stats --graph " + base);
  ASSERT_EQ(st.code, 0) << st.err;
  const json s = json::parse(st.out);
  EXPECT_EQ(s.at("entity_count"), 11);
  EXPECT_EQ(s.at("item_count"), 3);
  EXPECT_EQ(s.at("user_count"), 2);
  EXPECT_EQ(s.at("entity_type_count"), 5);
  EXPECT_EQ(s.at("relation_type_count"), 6);
  EXPECT_EQ(s.at("user_entity_relation_count"), 3);

  const CliRun va = run(dir, "validate --graph " + base);
  EXPECT_EQ(va.code, 0) << va.err;
  const json v = json::parse(va.out);
  EXPECT_TRUE(v.at("ok").get<bool>());
  EXPECT_EQ(v.at("violations"), 0);
  EXPECT_TRUE(v.at("details").empty());
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(base) / "validate" / "manifest.json"));
}

TEST(Cli, ValidateFlagsInjectedEdge) {
  testing::TempDir dir("cli-bad");
  const std::string base = ingest_serum(dir);
  {
    // an Item mentioning a Brand is outside the metagraph
    std::ifstream in(std::filesystem::path(base) / "entities.tsv");
    std::string line, item, brand;
    while (std::getline(in, line)) {
      const auto f1 = line.find('\t');
      const auto f2 = line.find('\t', f1 + 1);
      const std::string id = line.substr(0, f1);
      const std::string type = line.substr(f1 + 1, f2 - f1 - 1);
      if (type == "Item" && item.empty()) item = id;
      if (type == "Brand" && brand.empty()) brand = id;
    }
    ASSERT_FALSE(item.empty());
    std::ofstream out(std::filesystem::path(base) / "triplets.tsv", std::ios::app);
    out << item << "\tproduced_by_reverse\t" << brand << "\n";
  }
  const CliRun va = run(dir, "validate --graph " + base);
  EXPECT_EQ(va.code, 5) << va.err;
}

TEST(Cli, FlagBeatsEnvBeatsConfig) {
  testing::TempDir dir("cli-prec");
  const std::string base = ingest_serum(dir);
  {
    std::ofstream cfg(dir / "tkg.toml");
    cfg << "[eval]\nk = 5\nseed = 11\n";
  }
  const std::string config = "--config " + (dir / "tkg.toml").string() + " ";
  auto k_of = [&](const std::string& env, const std::string& flags) {
    const CliRun r = run(dir, config + "eval --graph " + base + " " + flags, env);
    EXPECT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    return std::make_pair(j.at("k").get<int>(), j.at("seed").get<int>());
  };
  EXPECT_EQ(k_of("", ""), std::make_pair(5, 11));            // config
  EXPECT_EQ(k_of("TKG_K=3 ", ""), std::make_pair(3, 11));    // env over config
  EXPECT_EQ(k_of("TKG_K=3 ", "--k 2"), std::make_pair(2, 11));  // flag over env
  EXPECT_EQ(k_of("TKG_SEED=4 ", ""), std::make_pair(5, 4));
}

TEST(Cli, StageSkipsWhenManifestMatches) {
  testing::TempDir dir("cli-skip");
  const std::string args = "ingest --metadata " + serum("metadata.jsonl") + " --reviews " +
                           serum("reviews.jsonl") + " --out " + (dir / "base").string();
  ASSERT_EQ(run(dir, args).code, 0);
  const CliRun again = run(dir, args);
  ASSERT_EQ(again.code, 0);
  EXPECT_TRUE(json::parse(again.out).value("skipped", false));
  const CliRun forced = run(dir, args + " --force");
  EXPECT_FALSE(json::parse(forced.out).value("skipped", false));
}

TEST(Cli, BackendUnavailableExitCode) {
  testing::TempDir dir("cli-backend");
  const std::string base = ingest_serum(dir);
  const CliRun r = run(dir, "extract-general --graph " + base + " --out " + (dir / "gen").string() +
                             " --backend http --endpoint http://127.0.0.1:9/v1 --max-retries 0"
                             " --timeout-ms 300");
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, PipelineByStages) {
  testing::TempDir dir("cli-stages");
  const std::string base = ingest_serum(dir);
  const std::string gen = (dir / "gen").string();
  const std::string staged = (dir / "staged").string();
  const std::string fin = (dir / "final").string();
  ASSERT_EQ(run(dir, "extract-general --graph " + base + " --out " + gen).code, 0);
  ASSERT_EQ(run(dir, "extract-specific --graph " + gen + " --out " + staged).code, 0);
  const CliRun rf = run(dir, "refine --staged " + staged + " --graph " + gen + " --out " + fin +
                              " --max-subset 2");
  ASSERT_EQ(rf.code, 0) << rf.err;
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(fin) / "partition.json"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(fin) / "canonical_map.tsv"));
  const CliRun va = run(dir, "validate --graph " + fin);
  EXPECT_EQ(va.code, 0) << va.out;
  const json s = json::parse(run(dir, "stats --graph " + fin).out);
  EXPECT_EQ(s.at("general_topic_count"), 2);
  EXPECT_GT(s.at("specific_topic_count").get<int>(), 0);
  EXPECT_EQ(s.at("entity_type_count"), 7);
  EXPECT_EQ(s.at("relation_type_count"), 10);
}

}  // namespace
}  // namespace tkg
