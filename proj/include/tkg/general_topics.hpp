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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkg/backend.hpp"
#include "tkg/ingest.hpp"
#include "tkg/kg.hpp"

namespace tkg {

/// Subtypes accumulated for one leaf Type, in first-extraction order.
class CategoryTree {
 public:
  explicit CategoryTree(std::string leaf = {}) : leaf_(std::move(leaf)) {}

  /// Appends `label` unless an entry with the same folded form exists.
  /// Returns true when appended.
  bool add(const std::string& label);
  bool contains(std::string_view label) const;

  const std::string& leaf() const { return leaf_; }
  const std::vector<std::string>& subtypes() const { return subtypes_; }

  nlohmann::json to_json() const;

 private:
  std::string leaf_;
  std::vector<std::string> subtypes_;
  std::vector<std::string> keys_;
};

struct GeneralTopicOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::size_t workers = 1;  // leaves processed concurrently
};

struct GeneralTopicResult {
  std::vector<CategoryTree> trees;  // one per leaf, TypeTree::leaves() order
  std::size_t backend_calls = 0;
  std::size_t resumed_items = 0;
  std::size_t triplets_added = 0;
};

/// Walks every leaf of `tree`; items inside a leaf are visited in ascending
/// id order, each with one backend call carrying the leaf's current
/// CategoryTree. Adds one (Item, related_to, Subtype) triplet per
/// (item, leaf) membership. Widens the graph's metagraph with the topic
/// triplet types first.
///
/// A backend failure aborts only its leaf; progress is in the checkpoint and
/// BackendError is rethrown after the other leaves finish, leaving `kg`
/// unchanged.
GeneralTopicResult extract_subtypes(KnowledgeGraph& kg, const TypeTree& tree,
                                    const ContextStore& context, TopicExtractor& extractor,
                                    const GeneralTopicOptions& options = {});

}  // namespace tkg
