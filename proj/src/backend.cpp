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

#include "tkg/backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tkg/graph_io.hpp"
#include "tkg/text.hpp"

namespace tkg {

using nlohmann::json;

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::general_topic: return "general_topic";
    case RequestKind::specific_topics: return "specific_topics";
    case RequestKind::synonym_groups: return "synonym_groups";
  }
  return "general_topic";
}

std::string_view to_string(SourceKind kind) {
  return kind == SourceKind::description ? "description" : "review";
}

SourceKind parse_source_kind(std::string_view text) {
  if (text == "description") return SourceKind::description;
  if (text == "review") return SourceKind::review;
  throw InvalidArgument("unknown source kind '" + std::string(text) + "'");
}

json GeneralTopicRequest::to_json() const {
  return {{"item_title", item_title},
          {"type_path", type_path},
          {"description", description},
          {"current_tree", current_tree}};
}

json SpecificTopicRequest::to_json() const {
  return {{"text", text}, {"source_kind", to_string(source_kind)}, {"max_words", max_words}};
}

json SynonymGroupRequest::to_json() const {
  json list = json::array();
  for (const auto& [label, freq] : words) list.push_back({{"label", label}, {"frequency", freq}});
  return {{"words", std::move(list)}};
}

namespace {

GeneralTopicRequest general_from_json(const json& j) {
  return {j.at("item_title").get<std::string>(),
          j.at("type_path").get<std::vector<std::string>>(),
          j.value("description", std::string{}),
          j.value("current_tree", std::vector<std::string>{})};
}

SpecificTopicRequest specific_from_json(const json& j) {
  return {j.at("text").get<std::string>(),
          parse_source_kind(j.at("source_kind").get<std::string>()),
          j.value("max_words", std::size_t{10})};
}

SynonymGroupRequest synonyms_from_json(const json& j) {
  SynonymGroupRequest req;
  for (const auto& w : j.at("words")) {
    req.words.emplace_back(w.at("label").get<std::string>(),
                           w.at("frequency").get<std::uint64_t>());
  }
  return req;
}

// Generic product-area nouns the mock treats as non-content ("Face" in
// "Hydrating Face Serum").
const StopwordSet& mock_area_words() {
  static const StopwordSet words = [] {
    StopwordSet w = default_stopwords();
    for (const char* s : {"face", "facial", "skin", "body", "hair", "eye", "eyes", "lip",
                          "lips", "hand", "hands", "foot", "feet", "nail", "nails"}) {
      w.insert(s);
    }
    return w;
  }();
  return words;
}

const std::unordered_map<std::string, std::string>& uk_to_us() {
  static const std::unordered_map<std::string, std::string> table = {
      {"moisturising", "moisturizing"}, {"moisturiser", "moisturizer"},
      {"moisturisers", "moisturizers"}, {"moisturise", "moisturize"},
      {"moisturised", "moisturized"},   {"colour", "color"},
      {"colours", "colors"},            {"coloured", "colored"},
      {"colourful", "colorful"},        {"flavour", "flavor"},
      {"flavours", "flavors"},          {"odour", "odor"},
      {"odourless", "odorless"},        {"favourite", "favorite"},
      {"grey", "gray"},                 {"centre", "center"},
      {"fibre", "fiber"},               {"aluminium", "aluminum"},
      {"organise", "organize"},         {"organised", "organized"},
      {"sanitiser", "sanitizer"},       {"vapour", "vapor"},
      {"jewellery", "jewelry"},         {"cosy", "cozy"},
      {"travelling", "traveling"},      {"neutralising", "neutralizing"},
      {"revitalising", "revitalizing"}, {"energising", "energizing"},
      {"soothing", "soothing"},         {"fragranced", "fragranced"},
  };
  return table;
}

std::string strip_suffix(std::string word) {
  auto ends_with = [&](std::string_view suffix) {
    return word.size() >= suffix.size() + 3 &&
           word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("ing")) {
    word.resize(word.size() - 3);
  } else if (ends_with("s")) {
    word.pop_back();
  }
  return word;
}

}  // namespace

std::string MockBackend::general_topic(const GeneralTopicRequest& req) {
  const auto words = tokenize(req.item_title, mock_area_words());
  if (words.empty()) {
    return req.type_path.empty() ? std::string("General") : req.type_path.back();
  }
  std::string label = words.size() == 1 ? words.back()
                                        : words[words.size() - 2] + " " + words.back();
  return title_case(label);
}

std::vector<std::string> MockBackend::specific_topics(const SpecificTopicRequest& req) {
  const auto tokens = tokenize(req.text, default_stopwords());
  struct Count {
    std::size_t first;
    std::size_t n;
  };
  std::map<std::string, Count> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, inserted] = counts.try_emplace(tokens[i], Count{i, 0});
    ++it->second.n;
  }
  std::vector<std::pair<std::string, Count>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.n != b.second.n) return a.second.n > b.second.n;
    return a.second.first < b.second.first;
  });
  const std::size_t k = std::min<std::size_t>(5, req.max_words);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
  return out;
}

std::string MockBackend::synonym_key(std::string_view label) {
  std::string key;
  std::istringstream words(normalize_label(label, true));
  std::string word;
  while (words >> word) {
    if (auto it = uk_to_us().find(word); it != uk_to_us().end()) word = it->second;
    if (!key.empty()) key.push_back(' ');
    key += strip_suffix(std::move(word));
  }
  return key;
}

SynonymGroups MockBackend::synonym_groups(const SynonymGroupRequest& req) {
  SynonymGroups groups;
  std::unordered_map<std::string, std::size_t> by_key;
  for (const auto& [label, freq] : req.words) {
    const std::string key = synonym_key(label);
    auto [it, inserted] = by_key.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(label);
  }
  return groups;
}

std::string MockBackend::complete(RequestKind kind, const json& request, bool) {
  try {
    switch (kind) {
      case RequestKind::general_topic:
        return json(general_topic(general_from_json(request))).dump();
      case RequestKind::specific_topics:
        return json(specific_topics(specific_from_json(request))).dump();
      case RequestKind::synonym_groups:
        return json(synonym_groups(synonyms_from_json(request))).dump();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("mock backend: bad request: ") + e.what());
  }
  return "null";
}

// --- prompts ---------------------------------------------------------------

PromptTemplates PromptTemplates::load(const std::optional<std::filesystem::path>& dir) {
  PromptTemplates t;
  t.system =
      "You organize product knowledge for a recommender system. "
      "Answer with a single JSON value and nothing else: no prose, no code fences.";
  t.general_topic =
      "Item title: {{title}}\n"
      "Type path (root to leaf): {{type_path}}\n"
      "Description: {{description}}\n"
      "Current Category Tree for this leaf type: {{current_tree}}\n\n"
      "Name the subtype of this item one level below the leaf type, in two or three "
      "words. Reuse an entry of the Current Category Tree when it fits; otherwise "
      "propose a new one. Reply with a JSON string.";
  t.specific_topics =
      "The following {{source_kind}} text belongs to one product.\n"
      "Text: {{text}}\n\n"
      "Extract at most {{max_words}} short topics (one to three words) describing "
      "concrete attributes of the product or preferences of the writer. Reply with a "
      "JSON array of strings.";
  t.synonym_groups =
      "Candidate topics with their usage frequency:\n{{words}}\n\n"
      "Group the topics that have the same meaning. Every topic must appear in "
      "exactly one group; a topic without synonyms forms its own group. Reply with a "
      "JSON array of arrays of strings.";
  t.repair =
      "\n\nYour previous reply could not be parsed. Reply again with only the JSON "
      "value described above.";

  if (dir) {
    auto override_with = [&](const char* name, std::string& slot) {
      const auto path = *dir / name;
      if (!std::filesystem::exists(path)) return;
      std::ifstream in(path);
      if (!in) throw IoError("cannot read prompt template " + path.string());
      std::ostringstream body;
      body << in.rdbuf();
      slot = body.str();
    };
    override_with("system.txt", t.system);
    override_with("general.txt", t.general_topic);
    override_with("specific.txt", t.specific_topics);
    override_with("synonyms.txt", t.synonym_groups);
    override_with("repair.txt", t.repair);
  }
  return t;
}

namespace {

std::string substitute(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    const std::string token = "{{" + name + "}}";
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

}  // namespace

std::string render_prompt(const PromptTemplates& templates, RequestKind kind,
                          const json& request) {
  switch (kind) {
    case RequestKind::general_topic: {
      const auto req = general_from_json(request);
      return substitute(templates.general_topic,
                        {{"title", req.item_title},
                         {"type_path", join(req.type_path, " > ")},
                         {"description", req.description.empty() ? "(none)" : req.description},
                         {"current_tree", json(req.current_tree).dump()}});
    }
    case RequestKind::specific_topics: {
      const auto req = specific_from_json(request);
      return substitute(templates.specific_topics,
                        {{"text", req.text},
                         {"source_kind", std::string(to_string(req.source_kind))},
                         {"max_words", std::to_string(req.max_words)}});
    }
    case RequestKind::synonym_groups: {
      const auto req = synonyms_from_json(request);
      std::string lines;
      for (const auto& [label, freq] : req.words) {
        lines += "- " + json(label).dump() + " (" + std::to_string(freq) + ")\n";
      }
      return substitute(templates.synonym_groups, {{"words", lines}});
    }
  }
  return {};
}

void BackendConfig::validate() const {
  if (timeout.count() <= 0) throw InvalidArgument("backend timeout must be positive");
  if (max_retries < 0) throw InvalidArgument("backend retries must be >= 0");
  if (max_in_flight == 0) throw InvalidArgument("backend parallelism must be >= 1");
  if (model.empty()) throw InvalidArgument("backend model name is empty");
}

// --- cache -----------------------------------------------------------------

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

CachedBackend::CachedBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string());
}

std::string CachedBackend::cache_key(RequestKind kind, const json& request, bool repair) const {
  std::string material(to_string(kind));
  material += '\n';
  material += request.dump();
  material += '\n';
  material += inner_->model();
  if (repair) material += "\nrepair";
  return sha256_hex(material);
}

std::string CachedBackend::complete(RequestKind kind, const json& request, bool repair) {
  const auto path = dir_ / cache_key(kind, request, repair);
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream body;
      body << in.rdbuf();
      std::string cached = body.str();
      if (json::accept(cached)) {
        ++hits_;
        return cached;
      }
    }
  }
  ++misses_;
  std::string reply = inner_->complete(kind, request, repair);
  write_text_file_atomic(path, reply);
  return reply;
}

// --- typed front end -------------------------------------------------------

SynonymGroups repair_partition(const std::vector<std::string>& labels,
                               const SynonymGroups& groups, PartitionRepair* log) {
  const std::set<std::string> wanted(labels.begin(), labels.end());
  std::set<std::string> placed;
  PartitionRepair repair;
  SynonymGroups out;
  for (const auto& group : groups) {
    std::vector<std::string> kept;
    for (const auto& label : group) {
      if (!wanted.contains(label)) {
        repair.unknown.push_back(label);
      } else if (!placed.insert(label).second) {
        repair.duplicates.push_back(label);
      } else {
        kept.push_back(label);
      }
    }
    if (!kept.empty()) out.push_back(std::move(kept));
  }
  for (const auto& label : labels) {
    if (placed.insert(label).second) {
      repair.missing.push_back(label);
      out.push_back({label});
    }
  }
  if (log) *log = std::move(repair);
  return out;
}

TopicExtractor::TopicExtractor(ChatBackend& backend, ExtractorOptions options)
    : backend_(backend), options_(std::move(options)) {
  if (options_.max_words == 0) throw InvalidArgument("max_words must be >= 1");
}

json TopicExtractor::call(RequestKind kind, const json& request,
                          const std::function<bool(const json&)>& well_formed) {
  std::string last;
  for (const bool repair : {false, true}) {
    ++calls_;
    try {
      last = backend_.complete(kind, request, repair);
    } catch (const MalformedResponse&) {
      continue;
    }
    json reply = json::parse(last, nullptr, false);
    if (!reply.is_discarded() && well_formed(reply)) return reply;
  }
  throw MalformedResponse(std::string(to_string(kind)) + " reply is not the expected JSON: " +
                          last.substr(0, 200));
}

std::string TopicExtractor::extract_general_topic(const GeneralTopicRequest& req) {
  if (req.type_path.empty()) throw InvalidArgument("general topic request without type path");
  const json reply = call(RequestKind::general_topic, req.to_json(), [](const json& j) {
    return j.is_string() && !normalize_text(j.get<std::string>()).empty();
  });
  return normalize_text(reply.get<std::string>());
}

std::vector<std::string> TopicExtractor::extract_specific_topics(std::string_view text,
                                                                 SourceKind kind) {
  SpecificTopicRequest req{normalize_text(text), kind, options_.max_words};
  if (req.text.empty()) throw InvalidArgument("empty text");
  const json reply = call(RequestKind::specific_topics, req.to_json(), [](const json& j) {
    return j.is_array() &&
           std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_string(); });
  });
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : reply) {
    std::string label = normalize_label(e.get<std::string>(), true);
    if (label.empty() || !seen.insert(label).second) continue;
    out.push_back(std::move(label));
    if (out.size() == options_.max_words) break;
  }
  return out;
}

SynonymGroups TopicExtractor::group_synonyms(const SynonymGroupRequest& req) {
  if (req.words.empty()) throw InvalidArgument("synonym request without words");
  std::vector<std::string> labels;
  std::set<std::string> distinct;
  for (const auto& [label, freq] : req.words) {
    if (freq == 0) throw InvalidArgument("synonym request frequency must be positive");
    if (!distinct.insert(label).second) {
      throw InvalidArgument("duplicate label in synonym request: " + label);
    }
    labels.push_back(label);
  }
  const json reply = call(RequestKind::synonym_groups, req.to_json(), [](const json& j) {
    if (!j.is_array()) return false;
    return std::all_of(j.begin(), j.end(), [](const json& g) {
      return g.is_array() &&
             std::all_of(g.begin(), g.end(), [](const json& e) { return e.is_string(); });
    });
  });
  // Backends may echo labels with different casing or spacing.
  std::unordered_map<std::string, std::string> by_folded;
  for (const auto& label : labels) by_folded.try_emplace(normalize_label(label, true), label);
  SynonymGroups groups;
  for (const auto& g : reply) {
    auto& group = groups.emplace_back();
    for (const auto& e : g) {
      std::string raw = e.get<std::string>();
      auto it = by_folded.find(normalize_label(raw, true));
      group.push_back(it == by_folded.end() ? std::move(raw) : it->second);
    }
  }
  PartitionRepair repair;
  groups = repair_partition(labels, groups, &repair);
  if (!repair.empty()) {
    ++repairs_;
    if (options_.on_repair) options_.on_repair(repair);
  }
  return groups;
}

}  // namespace tkg
