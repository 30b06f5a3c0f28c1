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

#include "tkg/specific_topics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tkg/graph_io.hpp"
#include "tkg/progress_log.hpp"
#include "tkg/text.hpp"

namespace tkg {

void CandidateWordTable::add(const std::string& label, const CandidateSource& source) {
  auto& entry = entries_[label];
  ++entry.frequency;
  entry.sources.insert(source);
}

void CandidateWordTable::add_count(const std::string& label, std::uint64_t count) {
  entries_[label].frequency += count;
}

void CandidateWordTable::add_source(const std::string& label, const CandidateSource& source) {
  entries_[label].sources.insert(source);
}

void CandidateWordTable::merge(const CandidateWordTable& other) {
  for (const auto& [label, entry] : other.entries_) {
    auto& mine = entries_[label];
    mine.frequency += entry.frequency;
    mine.sources.insert(entry.sources.begin(), entry.sources.end());
  }
}

std::map<std::string, std::uint64_t> CandidateWordTable::frequencies() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [label, entry] : entries_) out.emplace(label, entry.frequency);
  return out;
}

std::vector<std::string> CandidateWordTable::labels() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [label, entry] : entries_) out.push_back(label);
  return out;
}

std::uint64_t CandidateWordTable::total_frequency() const {
  std::uint64_t total = 0;
  for (const auto& [label, entry] : entries_) total += entry.frequency;
  return total;
}

bool CandidateWordTable::operator==(const CandidateWordTable& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  return std::equal(entries_.begin(), entries_.end(), other.entries_.begin(),
                    [](const auto& a, const auto& b) {
                      return a.first == b.first && a.second.frequency == b.second.frequency &&
                             a.second.sources == b.second.sources;
                    });
}

bool staged_edge_legal(const KnowledgeGraph& kg, const StagedTopicEdge& edge) {
  if (edge.head.value >= kg.entity_count()) return false;
  const EntityClass cls = kg.entity_class(edge.head);
  if (edge.relation == names::kMention) return cls == EntityClass::user;
  if (edge.relation == names::kDescribedAs || edge.relation == names::kTagged) {
    return cls == EntityClass::item;
  }
  return false;
}

namespace {

struct Document {
  SourceKind kind;
  std::string item_id;
  std::string user_id;
  const std::string* text;
  std::string key;  // checkpoint identity
};

struct DocumentOutcome {
  std::vector<std::string> labels;
  bool resumed = false;
  bool called = false;
  std::exception_ptr error;
};

}  // namespace

SpecificTopicResult extract_candidate_words(const KnowledgeGraph& kg,
                                            const ContextStore& context,
                                            TopicExtractor& extractor,
                                            const SpecificTopicOptions& options) {
  ProgressLog log = options.checkpoint ? ProgressLog(*options.checkpoint) : ProgressLog();
  std::map<std::string, std::vector<std::string>> done;
  for (const auto& entry : log.entries()) {
    if (entry.contains("doc") && entry.contains("labels")) {
      done[entry["doc"].get<std::string>()] = entry["labels"].get<std::vector<std::string>>();
    }
  }

  std::map<std::string, std::vector<std::size_t>> reviews_by_item;
  for (std::size_t i = 0; i < context.reviews.size(); ++i) {
    reviews_by_item[context.reviews[i].item_id].push_back(i);
  }
  std::set<std::string> item_ids;
  for (const auto& [id, item] : context.items) item_ids.insert(id);
  for (const auto& [id, reviews] : reviews_by_item) item_ids.insert(id);

  SpecificTopicResult result;
  std::vector<Document> docs;
  for (const auto& item_id : item_ids) {
    if (auto it = context.items.find(item_id); it != context.items.end()) {
      if (!normalize_text(it->second.description).empty()) {
        docs.push_back({SourceKind::description, item_id, "", &it->second.description,
                        "d\t" + item_id});
      } else {
        ++result.empty_documents;
      }
    }
    if (auto it = reviews_by_item.find(item_id); it != reviews_by_item.end()) {
      for (std::size_t r : it->second) {
        const auto& review = context.reviews[r];
        if (normalize_text(review.text).empty()) {
          ++result.empty_documents;
          continue;
        }
        docs.push_back({SourceKind::review, item_id, review.user_id, &review.text,
                        "r\t" + std::to_string(r) + "\t" + review.user_id + "\t" + item_id});
      }
    }
  }

  std::vector<DocumentOutcome> outcomes(docs.size());
  run_parallel(docs.size(), options.workers, [&](std::size_t i) {
    const Document& doc = docs[i];
    DocumentOutcome& out = outcomes[i];
    if (auto hit = done.find(doc.key); hit != done.end()) {
      out.labels = hit->second;
      out.resumed = true;
      return;
    }
    try {
      out.labels = extractor.extract_specific_topics(*doc.text, doc.kind);
    } catch (const BackendError&) {
      out.error = std::current_exception();
      return;
    }
    out.called = true;
    log.append({{"doc", doc.key}, {"labels", out.labels}});
  });

  for (const auto& out : outcomes) {
    if (out.error) std::rethrow_exception(out.error);
  }

  auto require = [&](std::string_view type, const std::string& key) {
    auto id = kg.find_entity(type, key);
    if (!id) {
      throw ValidationError("context references unknown " + std::string(type) + " '" + key + "'");
    }
    return *id;
  };

  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Document& doc = docs[i];
    const DocumentOutcome& out = outcomes[i];
    ++result.documents;
    if (out.resumed) ++result.resumed_documents;
    if (out.called) ++result.backend_calls;

    const EntityId item = require(names::kItem, doc.item_id);
    std::optional<EntityId> user;
    if (doc.kind == SourceKind::review) user = require(names::kUser, doc.user_id);

    // Each label counts once per document.
    std::set<std::string> seen;
    for (const auto& raw : out.labels) {
      const std::string label = normalize_label(raw, true);
      if (label.empty() || !seen.insert(label).second) continue;
      ++result.extracted_labels;
      result.table.add(label, {doc.kind, doc.item_id, doc.user_id});
      if (doc.kind == SourceKind::description) {
        result.edges.push_back({item, std::string(names::kTagged), label});
      } else {
        result.edges.push_back({*user, std::string(names::kMention), label});
        result.edges.push_back({item, std::string(names::kDescribedAs), label});
      }
    }
  }
  std::sort(result.edges.begin(), result.edges.end());
  result.edges.erase(std::unique(result.edges.begin(), result.edges.end()), result.edges.end());
  return result;
}

// --- staged files ----------------------------------------------------------

void write_staged(const SpecificTopicResult& staged, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream candidates;
  std::ostringstream sources;
  for (const auto& [label, entry] : staged.table.entries()) {
    candidates << label << '\t' << entry.frequency << '\n';
    for (const auto& s : entry.sources) {
      sources << label << '\t' << to_string(s.origin) << '\t' << s.item_id << '\t' << s.user_id
              << '\n';
    }
  }
  std::ostringstream edges;
  for (const auto& e : staged.edges) {
    edges << e.head.value << '\t' << e.relation << '\t' << e.label << '\n';
  }
  write_text_file_atomic(dir / "candidates.tsv", candidates.str());
  write_text_file_atomic(dir / "candidate_sources.tsv", sources.str());
  write_text_file_atomic(dir / "staged_edges.tsv", edges.str());
}

namespace {

template <class Fn>
void for_each_record(const std::filesystem::path& path, std::size_t fields, bool required,
                     Fn&& fn) {
  std::ifstream in(path);
  if (!in) {
    if (required) throw IoError("cannot read " + path.string());
    return;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = split_tabs(line);
    if (parts.size() != fields) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(fields) + " fields");
    }
    fn(parts, line_no);
  }
}

std::uint64_t parse_u64(std::string_view text, const std::filesystem::path& path,
                        std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                  std::string(text) + "'");
  }
  return v;
}

}  // namespace

StagedTopics read_staged(const std::filesystem::path& dir) {
  StagedTopics staged;
  const auto candidates = dir / "candidates.tsv";
  for_each_record(candidates, 2, true, [&](const auto& f, std::size_t n) {
    staged.table.add_count(std::string(f[0]), parse_u64(f[1], candidates, n));
  });
  for_each_record(dir / "candidate_sources.tsv", 4, false, [&](const auto& f, std::size_t) {
    staged.table.add_source(std::string(f[0]), {parse_source_kind(f[1]), std::string(f[2]),
                                                std::string(f[3])});
  });
  const auto edges = dir / "staged_edges.tsv";
  for_each_record(edges, 3, true, [&](const auto& f, std::size_t n) {
    const auto head = parse_u64(f[0], edges, n);
    staged.edges.push_back(
        {EntityId{static_cast<std::uint32_t>(head)}, std::string(f[1]), std::string(f[2])});
  });
  return staged;
}

}  // namespace tkg
