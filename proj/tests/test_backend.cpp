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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "support.hpp"
#include "tkg/backend.hpp"

namespace tkg {
namespace {

using nlohmann::json;

// Replays canned replies in order, then repeats the last one.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(RequestKind, const json& request, bool repair) override {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    repairs.push_back(repair);
    const std::size_t i = std::min(calls++, replies_.size() - 1);
    return replies_[i];
  }
  std::string model() const override { return "scripted"; }

  std::size_t calls = 0;
  std::vector<json> requests;
  std::vector<bool> repairs;

 private:
  std::vector<std::string> replies_;
  std::mutex mu_;
};

// --- mock --------------------------------------------------------------------

TEST(Mock, GeneralTopic) {
  const std::vector<std::string> leaf{"Beauty", "Skin Care", "Serum"};
  EXPECT_EQ(MockBackend::general_topic({"Ultra Hydrating Face Serum", leaf, "", {}}),
            "Hydrating Serum");
  EXPECT_EQ(MockBackend::general_topic({"Collagen Plumping Serum", leaf, "", {}}),
            "Plumping Serum");
  EXPECT_EQ(MockBackend::general_topic({"Deep Hydrating Serum", leaf, "", {}}), "Hydrating Serum");
  // no content words: falls back to the leaf
  EXPECT_EQ(MockBackend::general_topic({"The Face", leaf, "", {}}), "Serum");
}

TEST(Mock, SpecificTopics) {
  EXPECT_EQ(MockBackend::specific_topics({"Very hydrating", SourceKind::review, 10}),
            (std::vector<std::string>{"hydrating"}));
  // frequency first, then first occurrence
  EXPECT_EQ(MockBackend::specific_topics(
                {"light scent, strong scent, light serum", SourceKind::review, 10}),
            (std::vector<std::string>{"light", "scent", "strong", "serum"}));
  EXPECT_EQ(MockBackend::specific_topics({"aaa bbb ccc ddd eee fff ggg", SourceKind::review, 3})
                .size(),
            3u);
  EXPECT_EQ(MockBackend::specific_topics({"aaa bbb ccc ddd eee fff ggg", SourceKind::review, 10})
                .size(),
            5u);
}

TEST(Mock, SynonymKey) {
  EXPECT_EQ(MockBackend::synonym_key("colour"), MockBackend::synonym_key("color"));
  EXPECT_EQ(MockBackend::synonym_key("scents"), MockBackend::synonym_key("scent"));
  EXPECT_EQ(MockBackend::synonym_key("Moisturising"), MockBackend::synonym_key("moisturizing"));
  EXPECT_NE(MockBackend::synonym_key("serum"), MockBackend::synonym_key("scent"));
}

TEST(Mock, SynonymGroupsPartition) {
  SynonymGroupRequest req{{{"colour", 3}, {"color", 5}, {"matte", 2}}};
  const SynonymGroups g = MockBackend::synonym_groups(req);
  EXPECT_EQ(g, (SynonymGroups{{"colour", "color"}, {"matte"}}));
}

TEST(Mock, CompleteRejectsBadRequest) {
  MockBackend mock;
  EXPECT_THROW(mock.complete(RequestKind::general_topic, json::object(), false), InvalidArgument);
}

// --- prompts -----------------------------------------------------------------

TEST(Prompt, RendersFields) {
  const auto t = PromptTemplates::load(std::nullopt);
  const std::string p = render_prompt(
      t, RequestKind::general_topic,
      GeneralTopicRequest{"Serum X", {"Beauty", "Serum"}, "", {"Hydrating Serum"}}.to_json());
  EXPECT_NE(p.find("Serum X"), std::string::npos);
  EXPECT_NE(p.find("Beauty > Serum"), std::string::npos);
  EXPECT_NE(p.find("(none)"), std::string::npos);
  EXPECT_NE(p.find("[\"Hydrating Serum\"]"), std::string::npos);
}

TEST(Prompt, OverrideFromDirectory) {
  testing::TempDir dir("prompts");
  {
    std::ofstream out(dir / "specific.txt");
    out << "TEXT={{text}} N={{max_words}}";
  }
  const auto t = PromptTemplates::load(dir.path());
  EXPECT_EQ(render_prompt(t, RequestKind::specific_topics,
                          SpecificTopicRequest{"abc", SourceKind::review, 4}.to_json()),
            "TEXT=abc N=4");
}

// --- extractor ---------------------------------------------------------------

TEST(Extractor, EmptyTextRejected) {
  MockBackend mock;
  TopicExtractor ex(mock);
  EXPECT_THROW(ex.extract_specific_topics("   \n ", SourceKind::review), InvalidArgument);
  EXPECT_EQ(ex.calls(), 0u);
}

TEST(Extractor, MalformedThenRepaired) {
  ScriptedBackend b({"Sure! here you go", R"(["Hydrating", "hydrating", " Serum "])"});
  TopicExtractor ex(b);
  EXPECT_EQ(ex.extract_specific_topics("x", SourceKind::review),
            (std::vector<std::string>{"hydrating", "serum"}));
  EXPECT_EQ(b.repairs, (std::vector<bool>{false, true}));
}

TEST(Extractor, MalformedTwiceFails) {
  ScriptedBackend b({"nope"});
  TopicExtractor ex(b);
  EXPECT_THROW(ex.extract_general_topic({"t", {"Leaf"}, "", {}}), MalformedResponse);
  EXPECT_EQ(b.calls, 2u);
}

TEST(Extractor, MaxWordsCap) {
  ScriptedBackend b({R"(["a1","b1","c1","d1"])"});
  ExtractorOptions opt;
  opt.max_words = 2;
  TopicExtractor ex(b, opt);
  EXPECT_EQ(ex.extract_specific_topics("x", SourceKind::description).size(), 2u);
  EXPECT_EQ(b.requests[0].at("max_words"), 2);
  EXPECT_EQ(b.requests[0].at("source_kind"), "description");
}

TEST(Extractor, SynonymRepair) {
  ScriptedBackend b({R"([["Colour","color","ghost"],["color"]])"});
  std::vector<PartitionRepair> seen;
  ExtractorOptions opt;
  opt.on_repair = [&](const PartitionRepair& r) { seen.push_back(r); };
  TopicExtractor ex(b, opt);
  const auto g = ex.group_synonyms({{{"colour", 1}, {"color", 2}, {"matte", 1}}});
  EXPECT_EQ(g, (SynonymGroups{{"colour", "color"}, {"matte"}}));
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].unknown, (std::vector<std::string>{"ghost"}));
  EXPECT_EQ(seen[0].duplicates, (std::vector<std::string>{"color"}));
  EXPECT_EQ(seen[0].missing, (std::vector<std::string>{"matte"}));
  EXPECT_EQ(ex.repairs(), 1u);
}

TEST(Extractor, SynonymRequestChecks) {
  MockBackend mock;
  TopicExtractor ex(mock);
  EXPECT_THROW(ex.group_synonyms({}), InvalidArgument);
  EXPECT_THROW(ex.group_synonyms({{{"a", 0}}}), InvalidArgument);
  EXPECT_THROW(ex.group_synonyms({{{"a", 1}, {"a", 2}}}), InvalidArgument);
}

TEST(RepairPartitionProperty, AlwaysPartition) {
  testing::Gen g(11);
  for (int round = 0; round < 300; ++round) {
    const auto labels = g.label_set(g.range(1, 12), 3);
    std::vector<std::string> pool = labels;
    pool.push_back("zz-unknown");
    SynonymGroups groups(g.range(0, 5));
    for (auto& grp : groups) {
      for (std::size_t i = 0, n = g.range(0, 4); i < n; ++i) grp.push_back(g.pick(pool));
    }
    const auto out = repair_partition(labels, groups);
    std::multiset<std::string> flat;
    for (const auto& grp : out) {
      EXPECT_FALSE(grp.empty());
      flat.insert(grp.begin(), grp.end());
    }
    EXPECT_EQ(flat, std::multiset<std::string>(labels.begin(), labels.end()));
  }
}

// --- cache -------------------------------------------------------------------

TEST(Cache, HitAvoidsInnerCall) {
  testing::TempDir dir("cache");
  auto inner = std::make_shared<ScriptedBackend>(std::vector<std::string>{R"(["a"])"});
  CachedBackend cache(inner, dir.path());
  const json req = SpecificTopicRequest{"t", SourceKind::review, 10}.to_json();
  EXPECT_EQ(cache.complete(RequestKind::specific_topics, req, false), R"(["a"])");
  EXPECT_EQ(cache.complete(RequestKind::specific_topics, req, false), R"(["a"])");
  EXPECT_EQ(inner->calls, 1u);
  EXPECT_EQ(cache.hits(), 1u);
  // clearing the directory forces a new call
  std::filesystem::remove_all(dir.path());
  std::filesystem::create_directories(dir.path());
  cache.complete(RequestKind::specific_topics, req, false);
  EXPECT_EQ(inner->calls, 2u);
}

TEST(Cache, KeyDependsOnModelKindAndRepair) {
  testing::TempDir dir("cache-key");
  auto a = std::make_shared<ScriptedBackend>(std::vector<std::string>{"1"});
  auto m = std::make_shared<MockBackend>();
  CachedBackend ca(a, dir.path());
  CachedBackend cm(m, dir.path());
  const json req = {{"x", 1}};
  EXPECT_NE(ca.cache_key(RequestKind::general_topic, req, false),
            cm.cache_key(RequestKind::general_topic, req, false));
  EXPECT_NE(ca.cache_key(RequestKind::general_topic, req, false),
            ca.cache_key(RequestKind::specific_topics, req, false));
  EXPECT_NE(ca.cache_key(RequestKind::general_topic, req, false),
            ca.cache_key(RequestKind::general_topic, req, true));
  EXPECT_EQ(ca.cache_key(RequestKind::general_topic, req, false).size(), 64u);
}

TEST(Cache, CorruptEntryRefetched) {
  testing::TempDir dir("cache-bad");
  auto inner = std::make_shared<ScriptedBackend>(std::vector<std::string>{R"("ok")"});
  CachedBackend cache(inner, dir.path());
  const json req = {{"x", 1}};
  {
    std::ofstream out(dir / cache.cache_key(RequestKind::general_topic, req, false));
    out << "{trunc";
  }
  EXPECT_EQ(cache.complete(RequestKind::general_topic, req, false), R"("ok")");
  EXPECT_EQ(inner->calls, 1u);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// --- http --------------------------------------------------------------------

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string envelope(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}
      .dump();
}

BackendConfig local_config(const LocalServer& s) {
  BackendConfig c;
  c.endpoint = s.url("/v1/chat/completions");
  c.model = "test-model";
  c.api_key_env = "TKG_TEST_BACKEND_KEY";
  c.timeout = std::chrono::milliseconds(5000);
  c.initial_backoff = std::chrono::milliseconds(1);
  c.max_retries = 2;
  return c;
}

TEST(Http, ParsesEnvelopeAndSendsKey) {
  LocalServer s;
  std::string auth;
  json body;
  s.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    body = json::parse(req.body);
    res.set_content(envelope(R"(["hydrating"])"), "application/json");
  });
  ::setenv("TKG_TEST_BACKEND_KEY", "sekret", 1);
  HttpBackend http(local_config(s));
  ::unsetenv("TKG_TEST_BACKEND_KEY");
  TopicExtractor ex(http);
  EXPECT_EQ(ex.extract_specific_topics("Very hydrating", SourceKind::review),
            (std::vector<std::string>{"hydrating"}));
  EXPECT_EQ(auth, "Bearer sekret");
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_EQ(body.at("temperature"), 0.0);
  ASSERT_EQ(body.at("messages").size(), 2u);
  EXPECT_NE(body["messages"][1]["content"].get<std::string>().find("Very hydrating"),
            std::string::npos);
}

TEST(Http, RetriesServerErrors) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 500;
      return;
    }
    res.set_content(envelope(R"("Hydrating Serum")"), "application/json");
  });
  HttpBackend http(local_config(s));
  EXPECT_EQ(http.complete(RequestKind::general_topic,
                          GeneralTopicRequest{"t", {"Leaf"}, "", {}}.to_json(), false),
            R"("Hydrating Serum")");
  EXPECT_EQ(hits.load(), 3);
}

TEST(Http, RetryBudgetExhausted) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  HttpBackend http(local_config(s));
  EXPECT_THROW(http.complete(RequestKind::general_topic,
                             GeneralTopicRequest{"t", {"Leaf"}, "", {}}.to_json(), false),
               BackendUnavailable);
  EXPECT_EQ(hits.load(), 3);
}

TEST(Http, AuthFailureNotRetried) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
  });
  HttpBackend http(local_config(s));
  EXPECT_THROW(http.complete(RequestKind::general_topic,
                             GeneralTopicRequest{"t", {"Leaf"}, "", {}}.to_json(), false),
               BackendUnavailable);
  EXPECT_EQ(hits.load(), 1);
}

TEST(Http, BadEnvelope) {
  LocalServer s;
  s.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  HttpBackend http(local_config(s));
  EXPECT_THROW(http.complete(RequestKind::general_topic,
                             GeneralTopicRequest{"t", {"Leaf"}, "", {}}.to_json(), false),
               MalformedResponse);
}

TEST(Http, Unreachable) {
  BackendConfig c;
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  c.max_retries = 0;
  c.timeout = std::chrono::milliseconds(500);
  HttpBackend http(c);
  EXPECT_THROW(http.complete(RequestKind::general_topic,
                             GeneralTopicRequest{"t", {"Leaf"}, "", {}}.to_json(), false),
               BackendUnavailable);
}

TEST(Http, ConfigChecks) {
  BackendConfig c;
  c.endpoint = "ftp://x/y";
  EXPECT_THROW(HttpBackend{c}, InvalidArgument);
  c.endpoint = "http://x/y";
  c.max_in_flight = 0;
  EXPECT_THROW(HttpBackend{c}, InvalidArgument);
}

}  // namespace
}  // namespace tkg
