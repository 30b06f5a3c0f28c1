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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tkg/errors.hpp"

namespace tkg {

// Type and relation names the pipeline stages rely on. Any standardized
// metagraph loaded from config must use these for the roles below.
namespace names {
inline constexpr std::string_view kUser = "User";
inline constexpr std::string_view kItem = "Item";
inline constexpr std::string_view kBrand = "Brand";
inline constexpr std::string_view kType = "Type";
inline constexpr std::string_view kRelatedItem = "RelatedItem";
inline constexpr std::string_view kDescription = "Description";
inline constexpr std::string_view kReview = "Review";
inline constexpr std::string_view kSubtype = "Subtype";
inline constexpr std::string_view kWord = "Word";

inline constexpr std::string_view kPurchase = "purchase";
inline constexpr std::string_view kProducedBy = "produced_by";
inline constexpr std::string_view kBelongsTo = "belongs_to";
inline constexpr std::string_view kAlsoBought = "also_bought";
inline constexpr std::string_view kAlsoViewed = "also_viewed";
inline constexpr std::string_view kBoughtTogether = "bought_together";
inline constexpr std::string_view kHasDescription = "has_description";
inline constexpr std::string_view kReviewed = "reviewed";
inline constexpr std::string_view kAbout = "about";
inline constexpr std::string_view kRelatedTo = "related_to";
inline constexpr std::string_view kMention = "mention";
inline constexpr std::string_view kDescribedAs = "described_as";
inline constexpr std::string_view kTagged = "tagged";
}  // namespace names

enum class EntityClass { user, item, side, context, topic };

std::string_view to_string(EntityClass cls);
EntityClass parse_entity_class(std::string_view text);

struct TripletType {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const TripletType&) const = default;
};

std::string to_string(const TripletType& t);

/// Schema over entity types: which (head type, relation, tail type) triplets
/// a graph may contain.
class Metagraph {
 public:
  /// Throws ValidationError if `name` is already declared with another class.
  void add_entity_type(std::string name, EntityClass cls);
  void add_relation_type(std::string name);
  /// All three components must already be declared.
  void add_triplet_type(TripletType type);

  bool has_entity_type(std::string_view name) const;
  std::optional<EntityClass> class_of(std::string_view name) const;
  bool has_relation_type(std::string_view name) const;
  bool contains(const TripletType& type) const;

  const std::map<std::string, EntityClass, std::less<>>& entity_types() const {
    return entity_types_;
  }
  const std::set<std::string, std::less<>>& relation_types() const {
    return relation_types_;
  }
  const std::set<TripletType>& triplet_types() const { return triplet_types_; }

  bool empty() const { return entity_types_.empty() && relation_types_.empty(); }

  bool operator==(const Metagraph&) const = default;

 private:
  std::map<std::string, EntityClass, std::less<>> entity_types_;
  std::set<std::string, std::less<>> relation_types_;
  std::set<TripletType> triplet_types_;
};

/// Entity types of class `context`.
std::set<std::string> context_entity_types(const Metagraph& m);

/// Drops every triplet type touching a context entity type, every relation
/// used by such a triplet type, and the context entity types themselves.
/// Throws ValidationError if `context_types` names a non-context type.
Metagraph build_base_metagraph(const Metagraph& standard,
                               const std::set<std::string>& context_types);

/// (Item, related_to, Subtype), (User, mention, Word),
/// (Item, described_as, Word), (Item, tagged, Word).
Metagraph build_topic_metagraph();

/// Set union. Throws ValidationError when an entity type is declared with
/// different classes in `a` and `b`.
Metagraph merge_metagraphs(const Metagraph& a, const Metagraph& b);

/// Standardized recommender metagraph used when no config is supplied.
Metagraph default_standard_metagraph();

/// `base` plus the two review-word triplet types of the word-entity variant.
Metagraph large_variant_metagraph(const Metagraph& base);

nlohmann::json metagraph_to_json(const Metagraph& m);
Metagraph metagraph_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------

struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

struct RelationId {
  std::uint16_t value = 0;
  auto operator<=>(const RelationId&) const = default;
};

struct Triplet {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triplet&) const = default;
};

struct EntityView {
  EntityId id;
  std::string_view type;
  std::string_view label;
};

enum class AddResult { inserted, duplicate };

class NonConformingTriplet : public ValidationError {
 public:
  explicit NonConformingTriplet(TripletType type);
  const TripletType& triplet_type() const { return type_; }

 private:
  TripletType type_;
};

/// Typed entity table plus a duplicate-free triplet store that only admits
/// triplets conforming to its metagraph.
///
/// Entity identity is (type, case-folded normalized label). Labels of topic
/// types are stored case-folded; other types keep the first-seen casing.
///
/// Reads are safe from any number of threads; mutation is single-writer.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(Metagraph metagraph = {});

  const Metagraph& metagraph() const { return metagraph_; }

  /// Widens the metagraph. Stored triplets stay conforming.
  void extend_metagraph(const Metagraph& extra);

  /// Idempotent. Throws ValidationError for undeclared types and
  /// InvalidArgument for labels that are empty after normalization.
  EntityId register_entity(std::string_view label, std::string_view type);
  std::optional<EntityId> find_entity(std::string_view type,
                                      std::string_view label) const;

  std::size_t entity_count() const { return entities_.size(); }
  EntityView entity(EntityId id) const;
  EntityClass entity_class(EntityId id) const;
  bool is_type(EntityId id, std::string_view type) const;

  /// Interns a relation name. The name need not be declared in the metagraph.
  RelationId relation_id(std::string_view name);
  std::optional<RelationId> find_relation(std::string_view name) const;
  std::string_view relation_name(RelationId id) const;

  Triplet make_triplet(EntityId head, std::string_view relation, EntityId tail);

  TripletType triplet_type(const Triplet& t) const;
  bool conforms(const Triplet& t) const;
  bool conforms(const Triplet& t, const Metagraph& m) const;

  /// Throws NonConformingTriplet.
  AddResult add_triplet(const Triplet& t);
  AddResult add_triplet(EntityId head, std::string_view relation, EntityId tail);

  /// Stores a triplet without the metagraph check. Only flat-file import uses
  /// this so externally produced graphs can be audited with validate_graph.
  AddResult insert_unchecked(const Triplet& t);

  bool contains(const Triplet& t) const { return triplet_set_.contains(t); }
  std::span<const Triplet> triplets() const { return triplets_; }
  std::size_t triplet_count() const { return triplets_.size(); }

  /// Positions into triplets().
  std::span<const std::size_t> edges_from(EntityId head) const;
  std::span<const std::size_t> edges_to(EntityId tail) const;
  std::span<const std::size_t> edges_with(RelationId relation) const;

  /// Entity ids of one type, ascending.
  std::vector<EntityId> entities_of_type(std::string_view type) const;

 private:
  struct EntityRecord {
    std::uint16_t type;
    std::string label;
  };
  struct TripletHash {
    std::size_t operator()(const Triplet& t) const noexcept;
  };
  struct KeyHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::uint16_t type_index(std::string_view name) const;
  void check_entity(EntityId id) const;
  AddResult store(const Triplet& t);

  Metagraph metagraph_;
  std::vector<std::string> type_names_;
  std::vector<EntityClass> type_classes_;
  std::vector<std::string> relation_names_;
  std::vector<EntityRecord> entities_;
  // One lookup table per entity type: folded label -> id.
  std::vector<std::unordered_map<std::string, EntityId, KeyHash, std::equal_to<>>>
      lookup_;
  std::vector<Triplet> triplets_;
  std::unordered_set<Triplet, TripletHash> triplet_set_;
  std::vector<std::vector<std::size_t>> by_head_;
  std::vector<std::vector<std::size_t>> by_tail_;
  std::vector<std::vector<std::size_t>> by_relation_;
};

struct Violation {
  Triplet triplet;
  TripletType type;
};

struct ViolationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Every stored triplet not conforming to the graph's metagraph, in storage
/// order. OpenMP-parallel over triplets.
ViolationReport validate_graph(const KnowledgeGraph& kg);
/// Serial reference for validate_graph.
ViolationReport validate_graph_serial(const KnowledgeGraph& kg);

struct GraphStats {
  std::uint64_t user_count = 0;
  std::uint64_t item_count = 0;
  std::uint64_t entity_count = 0;
  std::uint64_t general_topic_count = 0;
  std::uint64_t specific_topic_count = 0;
  std::uint64_t entity_type_count = 0;
  std::uint64_t relation_type_count = 0;
  std::uint64_t user_entity_relation_count = 0;
  std::uint64_t item_entity_relation_count = 0;

  bool operator==(const GraphStats&) const = default;
};

/// Type counts are the metagraph's declared counts; user/item-entity
/// relations are triplets whose head is of class user/item.
GraphStats stats(const KnowledgeGraph& kg);
nlohmann::json stats_to_json(const GraphStats& s);

}  // namespace tkg
