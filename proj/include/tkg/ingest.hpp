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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkg/kg.hpp"
#include "tkg/text.hpp"

namespace tkg {

struct ItemRecord {
  std::string item_id;
  std::string title;
  std::optional<std::string> brand;
  std::vector<std::vector<std::string>> category_paths;  // root -> leaf
  std::optional<double> price;
  std::optional<std::string> description;
  // also_bought / also_viewed / bought_together -> external item keys
  std::map<std::string, std::vector<std::string>> related;
};

struct ReviewRecord {
  std::string user_id;
  std::string item_id;
  std::string text;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;
};

template <class Record>
struct ParseResult {
  std::vector<Record> records;
  std::size_t malformed = 0;
};

/// One JSON object per line, Amazon metadata field names (asin, title, brand,
/// categories, price, description, related). Lines without a string "asin"
/// or that fail to parse are skipped and counted. Parsed in parallel by line,
/// returned in file order. Throws IoError if the stream is unreadable.
ParseResult<ItemRecord> parse_item_metadata(std::istream& in);

/// Amazon review field names (reviewerID, asin, reviewText, overall,
/// unixReviewTime). Empty review text is kept.
ParseResult<ReviewRecord> parse_reviews(std::istream& in);

// ---------------------------------------------------------------------------

inline constexpr std::string_view kUncategorized = "(uncategorized)";

/// Rooted forest of Type labels. A node is a leaf when some item's category
/// path ends there; its members are those items. Labels are matched by
/// case-folded normalized form.
class TypeTree {
 public:
  struct Node {
    std::string label;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    std::set<std::string> members;  // external item ids, ascending
  };

  /// Items without any category path are placed under kUncategorized.
  static TypeTree build(std::span<const ItemRecord> items);

  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<std::size_t> roots() const;
  /// Nodes with members, in depth-first order with children sorted by label.
  std::vector<std::size_t> leaves() const;
  std::vector<std::string> path(std::size_t node) const;
  /// Path joined with " > "; stable identifier for checkpoints and audit.
  std::string path_key(std::size_t node) const;

  nlohmann::json to_json() const;
  static TypeTree from_json(const nlohmann::json& doc);

 private:
  std::size_t child(std::optional<std::size_t> parent, const std::string& label);
  void reindex();

  std::vector<Node> nodes_;
  // (parent + 1, or 0 for roots; folded label) -> node
  std::map<std::pair<std::size_t, std::string>, std::size_t> index_;
};

inline TypeTree build_type_tree(std::span<const ItemRecord> items) {
  return TypeTree::build(items);
}

// ---------------------------------------------------------------------------

struct ItemContext {
  std::string title;
  std::string description;
};

struct ReviewContext {
  std::string user_id;
  std::string item_id;
  std::string text;
};

/// Description and review bodies kept outside the graph for topic extraction.
struct ContextStore {
  std::map<std::string, ItemContext> items;  // by external item id
  std::vector<ReviewContext> reviews;        // file order
};

/// JSON lines: {"kind":"item","item_id",...,"title","description"} and
/// {"kind":"review","user_id","item_id","text"}.
void write_context(const ContextStore& store, const std::filesystem::path& path);
ContextStore read_context(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

enum class Variant { base, large };

Variant parse_variant(std::string_view text);
std::string_view to_string(Variant v);

struct BaseGraphOptions {
  Variant variant = Variant::base;
  const StopwordSet* stopwords = nullptr;  // defaults to the bundled list
  std::optional<std::size_t> max_reviews_per_item;
};

struct BaseGraph {
  KnowledgeGraph graph;
  ContextStore context;
  std::size_t duplicate_items = 0;
  std::size_t skipped_reviews = 0;  // unknown item or over the per-item cap
};

/// Emits purchase (one per distinct user/item pair), produced_by, belongs_to
/// (item to every Type on each of its category paths) and also_* triplets.
/// The large variant also links review words through mention/described_as.
/// Throws NonConformingTriplet if the metagraph lacks a needed triplet type.
BaseGraph build_base_graph(std::span<const ItemRecord> items,
                           std::span<const ReviewRecord> reviews,
                           const Metagraph& metagraph, const BaseGraphOptions& options);

}  // namespace tkg
