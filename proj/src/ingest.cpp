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

#include "tkg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tkg/graph_io.hpp"

namespace tkg {

using nlohmann::json;

namespace {

std::vector<std::string> read_lines(std::istream& in) {
  if (!in.good() && !in.eof()) throw IoError("input stream is not readable");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  if (in.bad()) throw IoError("read error on input stream");
  return lines;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Parses non-blank lines in parallel; each slot is filled independently so the
// output order is the file order.
template <class Record, class ParseLine>
ParseResult<Record> parse_lines(std::istream& in, ParseLine parse_line) {
  const std::vector<std::string> lines = read_lines(in);
  std::vector<std::optional<Record>> parsed(lines.size());
  std::vector<char> skip(lines.size(), 0);
  const auto n = static_cast<std::int64_t>(lines.size());

#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (blank(lines[idx])) {
      skip[idx] = 1;
      continue;
    }
    try {
      const json doc = json::parse(lines[idx], nullptr, false);
      if (doc.is_object()) parsed[idx] = parse_line(doc);
    } catch (...) {
      parsed[idx].reset();
    }
  }

  ParseResult<Record> result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (skip[i]) continue;
    if (parsed[i]) {
      result.records.push_back(std::move(*parsed[i]));
    } else {
      ++result.malformed;
    }
  }
  return result;
}

std::optional<std::string> string_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<double> number_field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number()) return std::nullopt;
  const double v = it->get<double>();
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<ItemRecord> parse_item(const json& doc) {
  auto asin = string_field(doc, "asin");
  if (!asin) return std::nullopt;
  ItemRecord item;
  item.item_id = normalize_text(*asin);
  if (item.item_id.empty()) return std::nullopt;

  item.title = normalize_text(string_field(doc, "title").value_or(""));
  if (auto brand = string_field(doc, "brand")) {
    std::string b = normalize_text(*brand);
    if (!b.empty()) item.brand = std::move(b);
  }
  if (auto it = doc.find("categories"); it != doc.end() && it->is_array()) {
    for (const auto& path : *it) {
      if (!path.is_array()) continue;
      std::vector<std::string> labels;
      for (const auto& label : path) {
        if (!label.is_string()) continue;
        std::string l = normalize_text(label.get<std::string>());
        if (!l.empty()) labels.push_back(std::move(l));
      }
      if (!labels.empty()) item.category_paths.push_back(std::move(labels));
    }
  }
  item.price = number_field(doc, "price");
  if (auto it = doc.find("description"); it != doc.end()) {
    // Newer dumps store the description as a list of paragraphs.
    if (it->is_string()) {
      item.description = it->get<std::string>();
    } else if (it->is_array()) {
      std::string joined;
      for (const auto& part : *it) {
        if (!part.is_string()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined += part.get<std::string>();
      }
      item.description = std::move(joined);
    }
  }
  if (auto it = doc.find("related"); it != doc.end() && it->is_object()) {
    for (const char* kind : {"also_bought", "also_viewed", "bought_together"}) {
      auto list = it->find(kind);
      if (list == it->end() || !list->is_array()) continue;
      auto& keys = item.related[kind];
      for (const auto& key : *list) {
        if (!key.is_string()) continue;
        std::string k = normalize_text(key.get<std::string>());
        if (!k.empty()) keys.push_back(std::move(k));
      }
    }
  }
  return item;
}

std::optional<ReviewRecord> parse_review(const json& doc) {
  auto user = string_field(doc, "reviewerID");
  auto asin = string_field(doc, "asin");
  if (!user || !asin) return std::nullopt;
  ReviewRecord r;
  r.user_id = normalize_text(*user);
  r.item_id = normalize_text(*asin);
  if (r.user_id.empty() || r.item_id.empty()) return std::nullopt;
  r.text = string_field(doc, "reviewText").value_or("");
  r.rating = number_field(doc, "overall");
  if (auto it = doc.find("unixReviewTime"); it != doc.end() && it->is_number_integer()) {
    r.timestamp = it->get<std::int64_t>();
  }
  return r;
}

}  // namespace

ParseResult<ItemRecord> parse_item_metadata(std::istream& in) {
  return parse_lines<ItemRecord>(in, parse_item);
}

ParseResult<ReviewRecord> parse_reviews(std::istream& in) {
  return parse_lines<ReviewRecord>(in, parse_review);
}

// --- TypeTree --------------------------------------------------------------

std::size_t TypeTree::child(std::optional<std::size_t> parent, const std::string& label) {
  std::pair<std::size_t, std::string> key{parent ? *parent + 1 : 0,
                                          normalize_label(label, true)};
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  nodes_.push_back({label, parent, {}, {}});
  const std::size_t idx = nodes_.size() - 1;
  if (parent) nodes_[*parent].children.push_back(idx);
  index_.emplace(std::move(key), idx);
  return idx;
}

void TypeTree::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    index_.emplace(std::pair{n.parent ? *n.parent + 1 : 0, normalize_label(n.label, true)}, i);
  }
}

TypeTree TypeTree::build(std::span<const ItemRecord> items) {
  TypeTree tree;
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.item_id).second) continue;
    bool placed = false;
    for (const auto& path : item.category_paths) {
      std::optional<std::size_t> node;
      for (const auto& label : path) {
        if (label.empty()) continue;
        node = tree.child(node, label);
      }
      if (node) {
        tree.nodes_[*node].members.insert(item.item_id);
        placed = true;
      }
    }
    if (!placed) {
      const std::size_t leaf = tree.child(std::nullopt, std::string(kUncategorized));
      tree.nodes_[leaf].members.insert(item.item_id);
    }
  }
  return tree;
}

std::vector<std::size_t> TypeTree::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].parent) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> TypeTree::leaves() const {
  auto by_label = [&](std::vector<std::size_t> ids) {
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
      return nodes_[a].label < nodes_[b].label;
    });
    return ids;
  };
  std::vector<std::size_t> out;
  std::function<void(std::size_t)> visit = [&](std::size_t n) {
    if (!nodes_[n].members.empty()) out.push_back(n);
    for (std::size_t c : by_label(nodes_[n].children)) visit(c);
  };
  for (std::size_t r : by_label(roots())) visit(r);
  return out;
}

std::vector<std::string> TypeTree::path(std::size_t node) const {
  std::vector<std::string> out;
  for (std::optional<std::size_t> n = node; n; n = nodes_.at(*n).parent) {
    out.push_back(nodes_[*n].label);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string TypeTree::path_key(std::size_t node) const {
  std::string key;
  for (const auto& label : path(node)) {
    if (!key.empty()) key += " > ";
    key += label;
  }
  return key;
}

json TypeTree::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    json node = {{"label", n.label}, {"members", n.members}};
    node["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    nodes.push_back(std::move(node));
  }
  return {{"nodes", std::move(nodes)}};
}

TypeTree TypeTree::from_json(const json& doc) {
  TypeTree tree;
  try {
    for (const auto& n : doc.at("nodes")) {
      Node node;
      node.label = n.at("label").get<std::string>();
      if (!n.at("parent").is_null()) node.parent = n.at("parent").get<std::size_t>();
      node.members = n.at("members").get<std::set<std::string>>();
      tree.nodes_.push_back(std::move(node));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed type tree: ") + e.what());
  }
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    const auto& parent = tree.nodes_[i].parent;
    if (!parent) continue;
    // Parents precede children, which also rules out cycles.
    if (*parent >= i) throw IoError("type tree node " + std::to_string(i) + " has a bad parent");
    tree.nodes_[*parent].children.push_back(i);
  }
  tree.reindex();
  return tree;
}

// --- context store ---------------------------------------------------------

void write_context(const ContextStore& store, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [id, item] : store.items) {
    out << json{{"kind", "item"},
                {"item_id", id},
                {"title", item.title},
                {"description", item.description}}
               .dump()
        << '\n';
  }
  for (const auto& r : store.reviews) {
    out << json{{"kind", "review"},
                {"user_id", r.user_id},
                {"item_id", r.item_id},
                {"text", r.text}}
               .dump()
        << '\n';
  }
  write_text_file_atomic(path, out.str());
}

ContextStore read_context(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read context store " + path.string());
  ContextStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      const json doc = json::parse(line);
      const auto kind = doc.at("kind").get<std::string>();
      if (kind == "item") {
        store.items[doc.at("item_id").get<std::string>()] = {
            doc.at("title").get<std::string>(), doc.at("description").get<std::string>()};
      } else if (kind == "review") {
        store.reviews.push_back({doc.at("user_id").get<std::string>(),
                                 doc.at("item_id").get<std::string>(),
                                 doc.at("text").get<std::string>()});
      } else {
        throw IoError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

// --- base graph ------------------------------------------------------------

Variant parse_variant(std::string_view text) {
  if (text == "base") return Variant::base;
  if (text == "large") return Variant::large;
  throw InvalidArgument("unknown variant '" + std::string(text) + "' (base|large)");
}

std::string_view to_string(Variant v) { return v == Variant::base ? "base" : "large"; }

BaseGraph build_base_graph(std::span<const ItemRecord> items,
                           std::span<const ReviewRecord> reviews,
                           const Metagraph& metagraph, const BaseGraphOptions& options) {
  BaseGraph out{KnowledgeGraph(metagraph), {}, 0, 0};
  KnowledgeGraph& kg = out.graph;
  const StopwordSet& stopwords = options.stopwords ? *options.stopwords : default_stopwords();

  for (const auto& item : items) {
    if (kg.find_entity(names::kItem, item.item_id)) {
      ++out.duplicate_items;
      continue;
    }
    const EntityId id = kg.register_entity(item.item_id, names::kItem);
    const std::string key(kg.entity(id).label);
    out.context.items[key] = {item.title, normalize_text(item.description.value_or(""))};

    if (item.brand) {
      kg.add_triplet(id, names::kProducedBy, kg.register_entity(*item.brand, names::kBrand));
    }
    for (const auto& path : item.category_paths) {
      for (const auto& label : path) {
        if (normalize_text(label).empty()) continue;
        kg.add_triplet(id, names::kBelongsTo, kg.register_entity(label, names::kType));
      }
    }
    for (const auto& [kind, keys] : item.related) {
      for (const auto& related : keys) {
        kg.add_triplet(id, kind, kg.register_entity(related, names::kRelatedItem));
      }
    }
  }

  std::unordered_map<std::uint32_t, std::size_t> per_item;
  for (const auto& review : reviews) {
    const auto item = kg.find_entity(names::kItem, review.item_id);
    if (!item) {
      ++out.skipped_reviews;
      continue;
    }
    auto& count = per_item[item->value];
    if (options.max_reviews_per_item && count >= *options.max_reviews_per_item) {
      ++out.skipped_reviews;
      continue;
    }
    ++count;

    const EntityId user = kg.register_entity(review.user_id, names::kUser);
    kg.add_triplet(user, names::kPurchase, *item);
    out.context.reviews.push_back({std::string(kg.entity(user).label),
                                   std::string(kg.entity(*item).label),
                                   normalize_text(review.text)});

    if (options.variant == Variant::large) {
      for (const auto& token : tokenize(review.text, stopwords)) {
        const EntityId word = kg.register_entity(token, names::kWord);
        kg.add_triplet(user, names::kMention, word);
        kg.add_triplet(*item, names::kDescribedAs, word);
      }
    }
  }
  return out;
}

}  // namespace tkg
