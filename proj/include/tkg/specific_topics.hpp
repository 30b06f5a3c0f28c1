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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tkg/backend.hpp"
#include "tkg/ingest.hpp"
#include "tkg/kg.hpp"

namespace tkg {

struct CandidateSource {
  SourceKind origin = SourceKind::review;
  std::string item_id;
  std::string user_id;  // empty for descriptions

  auto operator<=>(const CandidateSource&) const = default;
};

struct CandidateEntry {
  std::uint64_t frequency = 0;
  std::set<CandidateSource> sources;
};

/// Specific-topic candidates before synonym refinement. Frequency counts the
/// (document, label) extractions that produced the label.
class CandidateWordTable {
 public:
  /// One extraction of `label` from the document `source`.
  void add(const std::string& label, const CandidateSource& source);
  void add_count(const std::string& label, std::uint64_t count);
  void add_source(const std::string& label, const CandidateSource& source);
  /// Commutative: totals do not depend on merge order.
  void merge(const CandidateWordTable& other);

  const std::map<std::string, CandidateEntry>& entries() const { return entries_; }
  std::map<std::string, std::uint64_t> frequencies() const;
  std::vector<std::string> labels() const;
  std::uint64_t total_frequency() const;
  std::size_t size() const { return entries_.size(); }

  bool operator==(const CandidateWordTable&) const;

 private:
  std::map<std::string, CandidateEntry> entries_;
};

/// Topic edge awaiting refinement; the tail is a candidate label.
struct StagedTopicEdge {
  EntityId head;
  std::string relation;  // mention | described_as | tagged
  std::string label;

  auto operator<=>(const StagedTopicEdge&) const = default;
};

/// mention needs a User head; described_as and tagged need an Item head.
bool staged_edge_legal(const KnowledgeGraph& kg, const StagedTopicEdge& edge);

struct SpecificTopicOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::size_t workers = 1;
};

struct SpecificTopicResult {
  CandidateWordTable table;
  std::vector<StagedTopicEdge> edges;  // sorted, duplicate-free
  std::size_t documents = 0;           // documents sent or resumed
  std::size_t empty_documents = 0;
  std::size_t backend_calls = 0;
  std::size_t resumed_documents = 0;
  std::uint64_t extracted_labels = 0;  // sum over documents of label counts
};

/// Documents are, per item in ascending id order, its description (if any)
/// then its reviews in store order. Descriptions yield `tagged` edges; each
/// review yields a `mention` edge from the user and a `described_as` edge
/// from the item per extracted label. Empty documents are skipped silently.
///
/// Per-document progress goes to the checkpoint; on a backend failure the
/// remaining documents still run and BackendError is rethrown at the end.
SpecificTopicResult extract_candidate_words(const KnowledgeGraph& kg,
                                            const ContextStore& context,
                                            TopicExtractor& extractor,
                                            const SpecificTopicOptions& options = {});

/// candidates.tsv (label \t frequency), staged_edges.tsv
/// (head_id \t relation \t label), candidate_sources.tsv
/// (label \t origin \t item_id \t user_id).
void write_staged(const SpecificTopicResult& staged, const std::filesystem::path& dir);

struct StagedTopics {
  CandidateWordTable table;
  std::vector<StagedTopicEdge> edges;
};

StagedTopics read_staged(const std::filesystem::path& dir);

}  // namespace tkg
