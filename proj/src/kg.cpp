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

#include "tkg/kg.hpp"

#include <algorithm>
#include <limits>

#include "tkg/text.hpp"

namespace tkg {

std::string_view to_string(EntityClass cls) {
  switch (cls) {
    case EntityClass::user: return "user";
    case EntityClass::item: return "item";
    case EntityClass::side: return "side";
    case EntityClass::context: return "context";
    case EntityClass::topic: return "topic";
  }
  return "side";
}

EntityClass parse_entity_class(std::string_view text) {
  if (text == "user") return EntityClass::user;
  if (text == "item") return EntityClass::item;
  if (text == "side") return EntityClass::side;
  if (text == "context") return EntityClass::context;
  if (text == "topic") return EntityClass::topic;
  throw InvalidArgument("unknown entity class '" + std::string(text) + "'");
}

std::string to_string(const TripletType& t) {
  return "(" + t.head + ", " + t.relation + ", " + t.tail + ")";
}

// --- Metagraph -------------------------------------------------------------

void Metagraph::add_entity_type(std::string name, EntityClass cls) {
  if (name.empty()) throw InvalidArgument("entity type name is empty");
  auto [it, inserted] = entity_types_.emplace(std::move(name), cls);
  if (!inserted && it->second != cls) {
    throw ValidationError("entity type '" + it->first + "' declared as both " +
                          std::string(to_string(it->second)) + " and " +
                          std::string(to_string(cls)));
  }
}

void Metagraph::add_relation_type(std::string name) {
  if (name.empty()) throw InvalidArgument("relation type name is empty");
  relation_types_.insert(std::move(name));
}

void Metagraph::add_triplet_type(TripletType type) {
  if (!has_entity_type(type.head) || !has_entity_type(type.tail) ||
      !has_relation_type(type.relation)) {
    throw ValidationError("triplet type " + to_string(type) +
                          " references undeclared types");
  }
  triplet_types_.insert(std::move(type));
}

bool Metagraph::has_entity_type(std::string_view name) const {
  return entity_types_.find(name) != entity_types_.end();
}

std::optional<EntityClass> Metagraph::class_of(std::string_view name) const {
  auto it = entity_types_.find(name);
  if (it == entity_types_.end()) return std::nullopt;
  return it->second;
}

bool Metagraph::has_relation_type(std::string_view name) const {
  return relation_types_.find(name) != relation_types_.end();
}

bool Metagraph::contains(const TripletType& type) const {
  return triplet_types_.contains(type);
}

std::set<std::string> context_entity_types(const Metagraph& m) {
  std::set<std::string> out;
  for (const auto& [name, cls] : m.entity_types()) {
    if (cls == EntityClass::context) out.insert(name);
  }
  return out;
}

Metagraph build_base_metagraph(const Metagraph& standard,
                               const std::set<std::string>& context_types) {
  for (const auto& name : context_types) {
    auto cls = standard.class_of(name);
    if (!cls) {
      throw ValidationError("context type '" + name + "' is not declared");
    }
    if (*cls != EntityClass::context) {
      throw ValidationError("'" + name + "' is declared as " +
                            std::string(to_string(*cls)) + ", not context");
    }
  }

  std::set<std::string> context_relations;
  for (const auto& t : standard.triplet_types()) {
    if (context_types.contains(t.head) || context_types.contains(t.tail)) {
      context_relations.insert(t.relation);
    }
  }

  Metagraph base;
  for (const auto& [name, cls] : standard.entity_types()) {
    if (!context_types.contains(name)) base.add_entity_type(name, cls);
  }
  for (const auto& r : standard.relation_types()) {
    if (!context_relations.contains(r)) base.add_relation_type(r);
  }
  for (const auto& t : standard.triplet_types()) {
    if (!context_relations.contains(t.relation)) base.add_triplet_type(t);
  }
  return base;
}

Metagraph build_topic_metagraph() {
  Metagraph m;
  m.add_entity_type(std::string(names::kUser), EntityClass::user);
  m.add_entity_type(std::string(names::kItem), EntityClass::item);
  m.add_entity_type(std::string(names::kSubtype), EntityClass::topic);
  m.add_entity_type(std::string(names::kWord), EntityClass::topic);
  for (auto r : {names::kRelatedTo, names::kMention, names::kDescribedAs, names::kTagged}) {
    m.add_relation_type(std::string(r));
  }
  auto add = [&](std::string_view h, std::string_view r, std::string_view t) {
    m.add_triplet_type({std::string(h), std::string(r), std::string(t)});
  };
  add(names::kItem, names::kRelatedTo, names::kSubtype);
  add(names::kUser, names::kMention, names::kWord);
  add(names::kItem, names::kDescribedAs, names::kWord);
  add(names::kItem, names::kTagged, names::kWord);
  return m;
}

Metagraph merge_metagraphs(const Metagraph& a, const Metagraph& b) {
  Metagraph out = a;
  for (const auto& [name, cls] : b.entity_types()) out.add_entity_type(name, cls);
  for (const auto& r : b.relation_types()) out.add_relation_type(r);
  for (const auto& t : b.triplet_types()) out.add_triplet_type(t);
  return out;
}

Metagraph default_standard_metagraph() {
  Metagraph m;
  m.add_entity_type(std::string(names::kUser), EntityClass::user);
  m.add_entity_type(std::string(names::kItem), EntityClass::item);
  m.add_entity_type(std::string(names::kBrand), EntityClass::side);
  m.add_entity_type(std::string(names::kType), EntityClass::side);
  m.add_entity_type(std::string(names::kRelatedItem), EntityClass::side);
  m.add_entity_type(std::string(names::kDescription), EntityClass::context);
  m.add_entity_type(std::string(names::kReview), EntityClass::context);

  const std::string_view triplets[][3] = {
      {names::kUser, names::kPurchase, names::kItem},
      {names::kItem, names::kProducedBy, names::kBrand},
      {names::kItem, names::kBelongsTo, names::kType},
      {names::kItem, names::kAlsoBought, names::kRelatedItem},
      {names::kItem, names::kAlsoViewed, names::kRelatedItem},
      {names::kItem, names::kBoughtTogether, names::kRelatedItem},
      {names::kItem, names::kHasDescription, names::kDescription},
      {names::kUser, names::kReviewed, names::kReview},
      {names::kReview, names::kAbout, names::kItem},
  };
  for (const auto& t : triplets) {
    m.add_relation_type(std::string(t[1]));
    m.add_triplet_type({std::string(t[0]), std::string(t[1]), std::string(t[2])});
  }
  return m;
}

Metagraph large_variant_metagraph(const Metagraph& base) {
  Metagraph words;
  words.add_entity_type(std::string(names::kUser), EntityClass::user);
  words.add_entity_type(std::string(names::kItem), EntityClass::item);
  words.add_entity_type(std::string(names::kWord), EntityClass::topic);
  words.add_relation_type(std::string(names::kMention));
  words.add_relation_type(std::string(names::kDescribedAs));
  words.add_triplet_type({std::string(names::kUser), std::string(names::kMention),
                          std::string(names::kWord)});
  words.add_triplet_type({std::string(names::kItem), std::string(names::kDescribedAs),
                          std::string(names::kWord)});
  return merge_metagraphs(base, words);
}

nlohmann::json metagraph_to_json(const Metagraph& m) {
  nlohmann::json doc;
  doc["entity_types"] = nlohmann::json::array();
  for (const auto& [name, cls] : m.entity_types()) {
    doc["entity_types"].push_back({{"name", name}, {"class", to_string(cls)}});
  }
  doc["relation_types"] = m.relation_types();
  doc["triplet_types"] = nlohmann::json::array();
  for (const auto& t : m.triplet_types()) {
    doc["triplet_types"].push_back(
        {{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
  }
  return doc;
}

Metagraph metagraph_from_json(const nlohmann::json& doc) {
  try {
    Metagraph m;
    for (const auto& e : doc.at("entity_types")) {
      m.add_entity_type(e.at("name").get<std::string>(),
                        parse_entity_class(e.at("class").get<std::string>()));
    }
    if (doc.contains("relation_types")) {
      for (const auto& r : doc.at("relation_types")) m.add_relation_type(r.get<std::string>());
    }
    for (const auto& t : doc.at("triplet_types")) {
      TripletType type{t.at("head").get<std::string>(), t.at("relation").get<std::string>(),
                       t.at("tail").get<std::string>()};
      // Relation types may be implied by the triplet types that use them.
      m.add_relation_type(type.relation);
      m.add_triplet_type(std::move(type));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed metagraph config: ") + e.what());
  }
}

// --- KnowledgeGraph --------------------------------------------------------

NonConformingTriplet::NonConformingTriplet(TripletType type)
    : ValidationError("non-conforming triplet " + to_string(type)),
      type_(std::move(type)) {}

std::size_t KnowledgeGraph::TripletHash::operator()(const Triplet& t) const noexcept {
  std::uint64_t h = (std::uint64_t{t.head.value} << 32) ^ t.tail.value;
  h ^= std::uint64_t{t.relation.value} * 0x9E3779B97F4A7C15ull;
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return static_cast<std::size_t>(h);
}

KnowledgeGraph::KnowledgeGraph(Metagraph metagraph) {
  extend_metagraph(metagraph);
}

void KnowledgeGraph::extend_metagraph(const Metagraph& extra) {
  metagraph_ = merge_metagraphs(metagraph_, extra);
  for (const auto& [name, cls] : metagraph_.entity_types()) {
    if (std::find(type_names_.begin(), type_names_.end(), name) == type_names_.end()) {
      type_names_.push_back(name);
      type_classes_.push_back(cls);
      lookup_.emplace_back();
    }
  }
  for (const auto& r : metagraph_.relation_types()) relation_id(r);
}

std::uint16_t KnowledgeGraph::type_index(std::string_view name) const {
  auto it = std::find(type_names_.begin(), type_names_.end(), name);
  if (it == type_names_.end()) {
    throw ValidationError("entity type '" + std::string(name) + "' is not declared");
  }
  return static_cast<std::uint16_t>(it - type_names_.begin());
}

EntityId KnowledgeGraph::register_entity(std::string_view label, std::string_view type) {
  const std::uint16_t ti = type_index(type);
  const bool topic = type_classes_[ti] == EntityClass::topic;
  std::string display = normalize_label(label, topic);
  if (display.empty()) {
    throw InvalidArgument("empty label for entity of type " + std::string(type));
  }
  std::string key = topic ? display : normalize_label(display, true);

  auto& table = lookup_[ti];
  if (auto it = table.find(key); it != table.end()) return it->second;

  if (entities_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error("entity table full");
  }
  const EntityId id{static_cast<std::uint32_t>(entities_.size())};
  entities_.push_back({ti, std::move(display)});
  table.emplace(std::move(key), id);
  by_head_.emplace_back();
  by_tail_.emplace_back();
  return id;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view type,
                                                    std::string_view label) const {
  auto it = std::find(type_names_.begin(), type_names_.end(), type);
  if (it == type_names_.end()) return std::nullopt;
  const auto ti = static_cast<std::size_t>(it - type_names_.begin());
  const std::string key = normalize_label(label, true);
  auto found = lookup_[ti].find(key);
  if (found == lookup_[ti].end()) return std::nullopt;
  return found->second;
}

void KnowledgeGraph::check_entity(EntityId id) const {
  if (id.value >= entities_.size()) {
    throw ValidationError("unregistered entity id " + std::to_string(id.value));
  }
}

EntityView KnowledgeGraph::entity(EntityId id) const {
  check_entity(id);
  const auto& e = entities_[id.value];
  return {id, type_names_[e.type], e.label};
}

EntityClass KnowledgeGraph::entity_class(EntityId id) const {
  check_entity(id);
  return type_classes_[entities_[id.value].type];
}

bool KnowledgeGraph::is_type(EntityId id, std::string_view type) const {
  check_entity(id);
  return type_names_[entities_[id.value].type] == type;
}

RelationId KnowledgeGraph::relation_id(std::string_view name) {
  if (auto id = find_relation(name)) return *id;
  if (relation_names_.size() >= std::numeric_limits<std::uint16_t>::max()) {
    throw Error("relation table full");
  }
  relation_names_.emplace_back(name);
  by_relation_.emplace_back();
  return RelationId{static_cast<std::uint16_t>(relation_names_.size() - 1)};
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = std::find(relation_names_.begin(), relation_names_.end(), name);
  if (it == relation_names_.end()) return std::nullopt;
  return RelationId{static_cast<std::uint16_t>(it - relation_names_.begin())};
}

std::string_view KnowledgeGraph::relation_name(RelationId id) const {
  if (id.value >= relation_names_.size()) {
    throw ValidationError("unknown relation id " + std::to_string(id.value));
  }
  return relation_names_[id.value];
}

Triplet KnowledgeGraph::make_triplet(EntityId head, std::string_view relation,
                                     EntityId tail) {
  check_entity(head);
  check_entity(tail);
  return {head, relation_id(relation), tail};
}

TripletType KnowledgeGraph::triplet_type(const Triplet& t) const {
  return {std::string(entity(t.head).type), std::string(relation_name(t.relation)),
          std::string(entity(t.tail).type)};
}

bool KnowledgeGraph::conforms(const Triplet& t) const { return conforms(t, metagraph_); }

bool KnowledgeGraph::conforms(const Triplet& t, const Metagraph& m) const {
  return m.contains(triplet_type(t));
}

AddResult KnowledgeGraph::add_triplet(const Triplet& t) {
  TripletType type = triplet_type(t);
  if (!metagraph_.contains(type)) throw NonConformingTriplet(std::move(type));
  return store(t);
}

AddResult KnowledgeGraph::add_triplet(EntityId head, std::string_view relation,
                                      EntityId tail) {
  return add_triplet(make_triplet(head, relation, tail));
}

AddResult KnowledgeGraph::insert_unchecked(const Triplet& t) {
  check_entity(t.head);
  check_entity(t.tail);
  relation_name(t.relation);
  return store(t);
}

AddResult KnowledgeGraph::store(const Triplet& t) {
  if (!triplet_set_.insert(t).second) return AddResult::duplicate;
  const std::size_t pos = triplets_.size();
  triplets_.push_back(t);
  by_head_[t.head.value].push_back(pos);
  by_tail_[t.tail.value].push_back(pos);
  by_relation_[t.relation.value].push_back(pos);
  return AddResult::inserted;
}

std::span<const std::size_t> KnowledgeGraph::edges_from(EntityId head) const {
  check_entity(head);
  return by_head_[head.value];
}

std::span<const std::size_t> KnowledgeGraph::edges_to(EntityId tail) const {
  check_entity(tail);
  return by_tail_[tail.value];
}

std::span<const std::size_t> KnowledgeGraph::edges_with(RelationId relation) const {
  if (relation.value >= by_relation_.size()) return {};
  return by_relation_[relation.value];
}

std::vector<EntityId> KnowledgeGraph::entities_of_type(std::string_view type) const {
  std::vector<EntityId> out;
  auto it = std::find(type_names_.begin(), type_names_.end(), type);
  if (it == type_names_.end()) return out;
  const auto ti = static_cast<std::uint16_t>(it - type_names_.begin());
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].type == ti) out.push_back(EntityId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

// --- validation and stats --------------------------------------------------

ViolationReport validate_graph(const KnowledgeGraph& kg) {
  const auto triplets = kg.triplets();
  const auto n = static_cast<std::int64_t>(triplets.size());
  std::vector<char> bad(triplets.size(), 0);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    bad[static_cast<std::size_t>(i)] = kg.conforms(triplets[static_cast<std::size_t>(i)]) ? 0 : 1;
  }

  ViolationReport report;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (bad[i]) report.violations.push_back({triplets[i], kg.triplet_type(triplets[i])});
  }
  return report;
}

ViolationReport validate_graph_serial(const KnowledgeGraph& kg) {
  ViolationReport report;
  for (const auto& t : kg.triplets()) {
    TripletType type = kg.triplet_type(t);
    if (!kg.metagraph().contains(type)) report.violations.push_back({t, std::move(type)});
  }
  return report;
}

GraphStats stats(const KnowledgeGraph& kg) {
  GraphStats s;
  s.entity_count = kg.entity_count();
  s.entity_type_count = kg.metagraph().entity_types().size();
  s.relation_type_count = kg.metagraph().relation_types().size();
  for (std::uint32_t i = 0; i < kg.entity_count(); ++i) {
    const EntityId id{i};
    switch (kg.entity_class(id)) {
      case EntityClass::user: ++s.user_count; break;
      case EntityClass::item: ++s.item_count; break;
      default: break;
    }
    const auto type = kg.entity(id).type;
    if (type == names::kSubtype) ++s.general_topic_count;
    if (type == names::kWord) ++s.specific_topic_count;
  }
  for (const auto& t : kg.triplets()) {
    const EntityClass cls = kg.entity_class(t.head);
    if (cls == EntityClass::user) ++s.user_entity_relation_count;
    if (cls == EntityClass::item) ++s.item_entity_relation_count;
  }
  return s;
}

nlohmann::json stats_to_json(const GraphStats& s) {
  return {
      {"user_count", s.user_count},
      {"item_count", s.item_count},
      {"entity_count", s.entity_count},
      {"general_topic_count", s.general_topic_count},
      {"specific_topic_count", s.specific_topic_count},
      {"entity_type_count", s.entity_type_count},
      {"relation_type_count", s.relation_type_count},
      {"user_entity_relation_count", s.user_entity_relation_count},
      {"item_entity_relation_count", s.item_entity_relation_count},
  };
}

}  // namespace tkg
