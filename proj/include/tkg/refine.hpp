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
#include <string>
#include <vector>

#include "tkg/backend.hpp"
#include "tkg/kg.hpp"
#include "tkg/specific_topics.hpp"

namespace tkg {

/// Subsets of candidate labels. Each subset is sorted; subsets appear in the
/// order of their first label (code point order).
using Partition = std::vector<std::vector<std::string>>;

/// Prefix partition with subsets of at most `max_subset` labels. Buckets are
/// keyed by the next Unicode scalar; a label equal to the current prefix
/// becomes a singleton. Duplicate input labels are collapsed.
/// Top-level buckets are processed with OpenMP.
Partition topic_partition(const std::vector<std::string>& labels, std::size_t max_subset);

/// Single-threaded reference for topic_partition.
Partition topic_partition_serial(const std::vector<std::string>& labels,
                                 std::size_t max_subset);

/// True iff `p` is a disjoint cover of `labels` with every subset in
/// [1, max_subset].
bool is_partition_of(const Partition& p, const std::vector<std::string>& labels,
                     std::size_t max_subset);

using CanonicalMap = std::map<std::string, std::string>;

/// Max-frequency member; ties go to the lexicographically smallest label.
std::string choose_canonical(const std::vector<std::string>& group,
                             const std::map<std::string, std::uint64_t>& frequency);

/// map(map(x)) == map(x) for every x in the domain.
bool is_idempotent(const CanonicalMap& map);

struct RefineOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::size_t workers = 1;
};

struct RefineResult {
  CanonicalMap map;
  std::vector<SynonymGroups> groups;  // per subset, partition order
  std::size_t backend_calls = 0;
  std::size_t resumed_subsets = 0;
};

/// Groups synonyms within each subset and maps every label to its group's
/// canonical. Singleton subsets map to themselves without a backend call.
/// Throws InvalidArgument when `partition` does not cover `frequency` exactly.
RefineResult refine_topics(const std::map<std::string, std::uint64_t>& frequency,
                           const Partition& partition, TopicExtractor& extractor,
                           const RefineOptions& options = {});

struct ApplyResult {
  std::size_t inserted = 0;
  std::size_t collapsed = 0;  // staged edges that landed on an existing triplet
  std::size_t words = 0;      // distinct canonical Word entities touched
};

/// Turns staged edges into (head, relation, Word) triplets under the canonical
/// labels. Widens the metagraph with the topic triplet types. Throws
/// UnmappedLabel for a label outside the map's domain and ValidationError for
/// an illegal head; the graph is untouched in both cases.
ApplyResult apply_canonical_map(const std::vector<StagedTopicEdge>& edges,
                                const CanonicalMap& map, KnowledgeGraph& kg);

nlohmann::json partition_to_json(const Partition& partition);
Partition partition_from_json(const nlohmann::json& j);

/// label \t canonical \t frequency, one row per label in label order.
void write_canonical_map(const CanonicalMap& map,
                         const std::map<std::string, std::uint64_t>& frequency,
                         const std::filesystem::path& path);
CanonicalMap read_canonical_map(const std::filesystem::path& path);

}  // namespace tkg
