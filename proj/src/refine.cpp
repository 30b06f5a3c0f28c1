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

#include "tkg/refine.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tkg/graph_io.hpp"
#include "tkg/progress_log.hpp"
#include "tkg/text.hpp"

namespace tkg {

namespace {

// UTF-8 byte order equals code point order, so sorting the encoded labels
// makes every bucket a contiguous range.
struct Words {
  std::vector<std::string> utf8;
  std::vector<std::u32string> cps;
};

Words prepare(const std::vector<std::string>& labels) {
  Words w;
  w.utf8 = labels;
  std::sort(w.utf8.begin(), w.utf8.end());
  w.utf8.erase(std::unique(w.utf8.begin(), w.utf8.end()), w.utf8.end());
  w.cps.reserve(w.utf8.size());
  for (const auto& s : w.utf8) w.cps.push_back(to_code_points(s));
  return w;
}

using Range = std::pair<std::size_t, std::size_t>;

// Words in [lo, hi) share their first `depth` code points.
void split(const Words& w, std::size_t lo, std::size_t hi, std::size_t depth, std::size_t t,
           std::vector<Range>& out) {
  if (lo < hi && w.cps[lo].size() == depth) {
    out.emplace_back(lo, lo + 1);  // prefix-exhausted
    ++lo;
  }
  while (lo < hi) {
    const char32_t c = w.cps[lo][depth];
    std::size_t end = lo + 1;
    while (end < hi && w.cps[end][depth] == c) ++end;
    if (end - lo <= t) {
      out.emplace_back(lo, end);
    } else {
      split(w, lo, end, depth + 1, t, out);
    }
    lo = end;
  }
}

Partition materialize(const Words& w, const std::vector<Range>& ranges) {
  Partition p;
  p.reserve(ranges.size());
  for (const auto& [lo, hi] : ranges) {
    p.emplace_back(w.utf8.begin() + static_cast<std::ptrdiff_t>(lo),
                   w.utf8.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return p;
}

}  // namespace

Partition topic_partition_serial(const std::vector<std::string>& labels,
                                 std::size_t max_subset) {
  if (max_subset == 0) throw InvalidArgument("max subset size must be positive");
  const Words w = prepare(labels);
  std::vector<Range> ranges;
  split(w, 0, w.utf8.size(), 0, max_subset, ranges);
  return materialize(w, ranges);
}

Partition topic_partition(const std::vector<std::string>& labels, std::size_t max_subset) {
  if (max_subset == 0) throw InvalidArgument("max subset size must be positive");
  const Words w = prepare(labels);
  const std::size_t n = w.utf8.size();

  // Top-level buckets by first code point.
  std::vector<Range> top;
  std::size_t lo = 0;
  if (lo < n && w.cps[lo].empty()) top.emplace_back(lo, ++lo);
  while (lo < n) {
    std::size_t end = lo + 1;
    while (end < n && w.cps[end][0] == w.cps[lo][0]) ++end;
    top.emplace_back(lo, end);
    lo = end;
  }

  std::vector<std::vector<Range>> parts(top.size());
  const auto buckets = static_cast<std::ptrdiff_t>(top.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < buckets; ++b) {
    const auto [blo, bhi] = top[static_cast<std::size_t>(b)];
    auto& out = parts[static_cast<std::size_t>(b)];
    if (w.cps[blo].empty() || bhi - blo <= max_subset) {
      out.emplace_back(blo, bhi);
    } else {
      split(w, blo, bhi, 1, max_subset, out);
    }
  }

  std::vector<Range> ranges;
  for (auto& part : parts) ranges.insert(ranges.end(), part.begin(), part.end());
  return materialize(w, ranges);
}

bool is_partition_of(const Partition& p, const std::vector<std::string>& labels,
                     std::size_t max_subset) {
  std::set<std::string> expected(labels.begin(), labels.end());
  std::set<std::string> seen;
  for (const auto& subset : p) {
    if (subset.empty() || subset.size() > max_subset) return false;
    for (const auto& label : subset) {
      if (!expected.contains(label) || !seen.insert(label).second) return false;
    }
  }
  return seen.size() == expected.size();
}

// --- canonical selection ----------------------------------------------------

std::string choose_canonical(const std::vector<std::string>& group,
                             const std::map<std::string, std::uint64_t>& frequency) {
  if (group.empty()) throw InvalidArgument("empty synonym group");
  auto freq = [&](const std::string& label) {
    auto it = frequency.find(label);
    return it == frequency.end() ? std::uint64_t{0} : it->second;
  };
  const std::string* best = &group.front();
  for (const auto& label : group) {
    const auto f = freq(label);
    const auto fb = freq(*best);
    if (f > fb || (f == fb && label < *best)) best = &label;
  }
  return *best;
}

bool is_idempotent(const CanonicalMap& map) {
  for (const auto& [label, canonical] : map) {
    auto it = map.find(canonical);
    if (it == map.end() || it->second != canonical) return false;
  }
  return true;
}

RefineResult refine_topics(const std::map<std::string, std::uint64_t>& frequency,
                           const Partition& partition, TopicExtractor& extractor,
                           const RefineOptions& options) {
  std::size_t covered = 0;
  for (const auto& subset : partition) {
    for (const auto& label : subset) {
      if (!frequency.contains(label)) {
        throw InvalidArgument("partition label '" + label + "' is not a candidate");
      }
      ++covered;
    }
  }
  if (covered != frequency.size()) {
    throw InvalidArgument("partition does not cover the candidate table exactly");
  }

  ProgressLog log = options.checkpoint ? ProgressLog(*options.checkpoint) : ProgressLog();
  std::map<std::vector<std::string>, SynonymGroups> done;
  for (const auto& entry : log.entries()) {
    if (entry.contains("subset") && entry.contains("groups")) {
      done[entry["subset"].get<std::vector<std::string>>()] =
          entry["groups"].get<SynonymGroups>();
    }
  }

  RefineResult result;
  result.groups.resize(partition.size());
  std::vector<char> called(partition.size(), 0);
  std::vector<char> resumed(partition.size(), 0);
  std::vector<std::exception_ptr> errors(partition.size());

  run_parallel(partition.size(), options.workers, [&](std::size_t i) {
    const auto& subset = partition[i];
    if (subset.size() == 1) {
      result.groups[i] = {subset};
      return;
    }
    if (auto hit = done.find(subset); hit != done.end()) {
      // Replayed groups go through the same repair as live ones.
      result.groups[i] = repair_partition(subset, hit->second);
      resumed[i] = 1;
      return;
    }
    SynonymGroupRequest req;
    for (const auto& label : subset) req.words.emplace_back(label, frequency.at(label));
    try {
      result.groups[i] = extractor.group_synonyms(req);
    } catch (const BackendError&) {
      errors[i] = std::current_exception();
      return;
    }
    called[i] = 1;
    log.append({{"subset", subset}, {"groups", result.groups[i]}});
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < partition.size(); ++i) {
    result.backend_calls += called[i];
    result.resumed_subsets += resumed[i];
    for (const auto& group : result.groups[i]) {
      const std::string canonical = choose_canonical(group, frequency);
      for (const auto& label : group) result.map[label] = canonical;
    }
  }
  return result;
}

ApplyResult apply_canonical_map(const std::vector<StagedTopicEdge>& edges,
                                const CanonicalMap& map, KnowledgeGraph& kg) {
  for (const auto& e : edges) {
    if (!map.contains(e.label)) throw UnmappedLabel("unmapped topic label '" + e.label + "'");
    if (!staged_edge_legal(kg, e)) {
      throw ValidationError("illegal staged edge head " + std::to_string(e.head.value) + " for " +
                            e.relation);
    }
  }
  kg.extend_metagraph(build_topic_metagraph());
  ApplyResult result;
  std::set<EntityId> words;
  for (const auto& e : edges) {
    const EntityId word = kg.register_entity(map.at(e.label), names::kWord);
    words.insert(word);
    if (kg.add_triplet(e.head, e.relation, word) == AddResult::inserted) {
      ++result.inserted;
    } else {
      ++result.collapsed;
    }
  }
  result.words = words.size();
  return result;
}

nlohmann::json partition_to_json(const Partition& partition) {
  return nlohmann::json{{"subsets", partition}};
}

Partition partition_from_json(const nlohmann::json& j) {
  return j.at("subsets").get<Partition>();
}

void write_canonical_map(const CanonicalMap& map,
                         const std::map<std::string, std::uint64_t>& frequency,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [label, canonical] : map) {
    auto it = frequency.find(label);
    out << label << '\t' << canonical << '\t' << (it == frequency.end() ? 0 : it->second)
        << '\n';
  }
  write_text_file_atomic(path, out.str());
}

CanonicalMap read_canonical_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CanonicalMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 3) throw IoError(path.string() + ": expected 3 fields");
    map.emplace(std::string(f[0]), std::string(f[1]));
  }
  return map;
}

}  // namespace tkg
