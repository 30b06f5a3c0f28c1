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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tkg/errors.hpp"

namespace tkg {

// Request kinds map one-to-one onto the three prompt contracts.
enum class RequestKind { general_topic, specific_topics, synonym_groups };
std::string_view to_string(RequestKind kind);

enum class SourceKind { description, review };
std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view text);

struct GeneralTopicRequest {
  std::string item_title;
  std::vector<std::string> type_path;   // root -> leaf, non-empty
  std::string description;              // may be empty
  std::vector<std::string> current_tree;  // subtypes already under this leaf

  nlohmann::json to_json() const;
};

struct SpecificTopicRequest {
  std::string text;
  SourceKind source_kind = SourceKind::review;
  std::size_t max_words = 10;

  nlohmann::json to_json() const;
};

struct SynonymGroupRequest {
  std::vector<std::pair<std::string, std::uint64_t>> words;  // (label, frequency)

  nlohmann::json to_json() const;
};

using SynonymGroups = std::vector<std::vector<std::string>>;

/// Raw text-understanding service. `complete` returns the backend's reply,
/// which must be one JSON value: a string for general_topic, an array of
/// strings for specific_topics, an array of string arrays for synonym_groups.
/// Implementations must be callable from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// `repair` is set on the single retry after a malformed reply.
  virtual std::string complete(RequestKind kind, const nlohmann::json& request,
                               bool repair) = 0;
  virtual std::string model() const = 0;
};

/// Deterministic rule-based stand-in; a pure function of its request.
///   general topic   last two content words of the title, title-cased
///   specific topics top-k (k = min(5, max_words)) non-stopword tokens by
///                   in-text frequency, ties by first occurrence
///   synonym groups  equal after case-fold, US spelling, and stripping a
///                   final "ing" or "s"
class MockBackend : public ChatBackend {
 public:
  std::string complete(RequestKind kind, const nlohmann::json& request,
                       bool repair) override;
  std::string model() const override { return "mock"; }

  static std::string general_topic(const GeneralTopicRequest& req);
  static std::vector<std::string> specific_topics(const SpecificTopicRequest& req);
  static SynonymGroups synonym_groups(const SynonymGroupRequest& req);
  /// Key under which the mock considers two labels synonymous.
  static std::string synonym_key(std::string_view label);
};

struct PromptTemplates {
  std::string system;
  std::string general_topic;
  std::string specific_topics;
  std::string synonym_groups;
  std::string repair;

  /// Defaults, optionally overridden by system.txt, general.txt,
  /// specific.txt, synonyms.txt, repair.txt found in `dir`.
  static PromptTemplates load(const std::optional<std::filesystem::path>& dir);
};

/// Fills {{placeholders}} of the matching template from the request.
std::string render_prompt(const PromptTemplates& templates, RequestKind kind,
                          const nlohmann::json& request);

struct BackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "TOPIC_BACKEND_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::size_t max_in_flight = 8;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> prompt_dir;
  double temperature = 0.0;

  void validate() const;
};

/// OpenAI-compatible chat-completions client. Retries transport failures with
/// exponential backoff; at most `max_in_flight` requests are outstanding.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  std::string complete(RequestKind kind, const nlohmann::json& request,
                       bool repair) override;
  std::string model() const override { return config_.model; }

  /// Request body sent for one call; exposed for tests.
  nlohmann::json request_body(RequestKind kind, const nlohmann::json& request,
                              bool repair) const;

 private:
  BackendConfig config_;
  PromptTemplates templates_;
  std::string api_key_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// Response cache in front of another backend. One file per key under the
/// cache directory, named by the hex SHA-256 of (kind, canonical request,
/// model, repair flag); the body is the raw reply. Unparseable files count as
/// misses. Writes are atomic (temp file + rename).
class CachedBackend : public ChatBackend {
 public:
  CachedBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir);

  std::string complete(RequestKind kind, const nlohmann::json& request,
                       bool repair) override;
  std::string model() const override { return inner_->model(); }

  std::string cache_key(RequestKind kind, const nlohmann::json& request, bool repair) const;

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path dir_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

std::string sha256_hex(std::string_view data);

// ---------------------------------------------------------------------------

struct PartitionRepair {
  std::vector<std::string> missing;     // placed in singleton groups
  std::vector<std::string> duplicates;  // later occurrences dropped
  std::vector<std::string> unknown;     // labels not in the request, dropped
  bool empty() const { return missing.empty() && duplicates.empty() && unknown.empty(); }
};

/// Turns a backend grouping into a partition of `labels`: keeps the first
/// occurrence of duplicated labels, drops unknown labels and empty groups,
/// and appends each missing label as a singleton group (in `labels` order).
SynonymGroups repair_partition(const std::vector<std::string>& labels,
                               const SynonymGroups& groups, PartitionRepair* log = nullptr);

struct ExtractorOptions {
  std::size_t max_words = 10;
  /// Called whenever a synonym grouping had to be repaired.
  std::function<void(const PartitionRepair&)> on_repair;
};

/// Typed front end over a ChatBackend: builds requests, parses and checks the
/// replies, normalizes labels. A malformed reply is retried once with the
/// repair flag; a second malformed reply raises MalformedResponse.
class TopicExtractor {
 public:
  TopicExtractor(ChatBackend& backend, ExtractorOptions options = {});

  /// Returns the subtype label NFC/whitespace-normalized, case preserved.
  std::string extract_general_topic(const GeneralTopicRequest& req);
  /// At most max_words case-folded labels, duplicate-free. Throws
  /// InvalidArgument (empty text) when the text is empty after normalization.
  std::vector<std::string> extract_specific_topics(std::string_view text, SourceKind kind);
  /// Always a partition of the request labels (repaired if needed).
  SynonymGroups group_synonyms(const SynonymGroupRequest& req);

  std::uint64_t calls() const { return calls_; }
  std::uint64_t repairs() const { return repairs_; }
  const ExtractorOptions& options() const { return options_; }

 private:
  nlohmann::json call(RequestKind kind, const nlohmann::json& request,
                      const std::function<bool(const nlohmann::json&)>& well_formed);

  ChatBackend& backend_;
  ExtractorOptions options_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> repairs_{0};
};

}  // namespace tkg
