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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkg/backend.hpp"
#include "tkg/eval.hpp"
#include "tkg/ingest.hpp"

namespace tkg {

inline constexpr const char* kVersion = "0.1.0";

// Extra files of a graph directory besides the graph itself.
inline constexpr const char* kTypeTreeFile = "type_tree.json";
inline constexpr const char* kContextFile = "context.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCheckpointFile = "checkpoint.jsonl";

namespace fs = std::filesystem;

struct BackendSettings {
  std::string kind = "mock";  // mock | http
  BackendConfig http;
  std::size_t parallelism = 4;
  std::size_t max_words = 10;

  nlohmann::json to_json() const;
};

/// Mock or HTTP backend, behind a response cache when a cache dir is set.
std::shared_ptr<ChatBackend> make_backend(const BackendSettings& settings);

/// SHA-256 of a file, or of the sorted (name, hash) list of the regular files
/// directly inside a directory (manifest and checkpoint excluded).
std::string hash_input(const fs::path& path);

/// {"tool", "version", "command", "inputs": {path: sha256}, "config"}.
nlohmann::json make_manifest(const std::string& command, const std::vector<fs::path>& inputs,
                             const nlohmann::json& config);
/// True when `dir` holds a manifest equal to `manifest` (stage already done).
bool manifest_matches(const fs::path& dir, const nlohmann::json& manifest);

struct StageOptions {
  bool force = false;                  // rerun even if the manifest matches
  std::optional<fs::path> checkpoint;  // default: <out>/checkpoint.jsonl
};

struct IngestConfig {
  fs::path metadata;
  fs::path reviews;
  fs::path out;
  std::optional<fs::path> metagraph;  // standard metagraph; built-in default
  Variant variant = Variant::base;
  std::optional<fs::path> stopwords;
  std::optional<std::size_t> max_reviews_per_item;
};

struct ExtractGeneralConfig {
  fs::path graph;
  fs::path out;
  std::optional<fs::path> context;  // default: <graph>/context.jsonl
  BackendSettings backend;
};

struct ExtractSpecificConfig {
  fs::path graph;
  fs::path out;
  std::optional<fs::path> context;
  BackendSettings backend;
};

struct RefineConfig {
  fs::path staged;
  fs::path graph;
  fs::path out;
  std::size_t max_subset = 50;
  BackendSettings backend;
};

/// Each stage writes its outputs plus manifest.json into `out` and returns a
/// JSON summary. A stage whose manifest already matches is skipped
/// ("skipped": true) unless forced.
nlohmann::json run_ingest(const IngestConfig& config, const StageOptions& stage = {});
nlohmann::json run_extract_general(const ExtractGeneralConfig& config,
                                   const StageOptions& stage = {});
nlohmann::json run_extract_specific(const ExtractSpecificConfig& config,
                                    const StageOptions& stage = {});
nlohmann::json run_refine(const RefineConfig& config, const StageOptions& stage = {});

/// Report goes to <out>/validation.json; "ok" is false when violations exist.
nlohmann::json run_validate(const fs::path& graph, const fs::path& out);
nlohmann::json run_stats(const fs::path& graph, const fs::path& out);
nlohmann::json run_eval(const fs::path& graph, const fs::path& out, const EvalOptions& options);

struct RunAllConfig {
  fs::path metadata;
  fs::path reviews;
  fs::path work;
  std::optional<fs::path> metagraph;
  Variant variant = Variant::base;
  std::optional<fs::path> stopwords;
  std::optional<std::size_t> max_reviews_per_item;
  BackendSettings backend;
  std::size_t max_subset = 50;
  EvalOptions eval;
};

/// ingest -> work/base, extract-general -> work/general, extract-specific ->
/// work/staged, refine -> work/final, then validate, stats and eval of the
/// final graph (eval of work/base as well, for comparison).
nlohmann::json run_all(const RunAllConfig& config, const StageOptions& stage = {});

}  // namespace tkg
