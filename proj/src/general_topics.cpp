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

#include "tkg/general_topics.hpp"

#include <algorithm>
#include <atomic>
#include <map>

#include "tkg/progress_log.hpp"
#include "tkg/text.hpp"

namespace tkg {

bool CategoryTree::add(const std::string& label) {
  std::string key = normalize_label(label, true);
  if (std::find(keys_.begin(), keys_.end(), key) != keys_.end()) return false;
  keys_.push_back(std::move(key));
  subtypes_.push_back(normalize_text(label));
  return true;
}

bool CategoryTree::contains(std::string_view label) const {
  const std::string key = normalize_label(label, true);
  return std::find(keys_.begin(), keys_.end(), key) != keys_.end();
}

nlohmann::json CategoryTree::to_json() const {
  return {{"leaf", leaf_}, {"subtypes", subtypes_}};
}

namespace {

struct LeafOutcome {
  CategoryTree tree;
  std::vector<std::pair<std::string, std::string>> assignments;  // item -> subtype
  std::exception_ptr error;
};

}  // namespace

GeneralTopicResult extract_subtypes(KnowledgeGraph& kg, const TypeTree& tree,
                                    const ContextStore& context, TopicExtractor& extractor,
                                    const GeneralTopicOptions& options) {
  ProgressLog log = options.checkpoint ? ProgressLog(*options.checkpoint) : ProgressLog();

  // leaf key -> item -> label, from earlier interrupted runs
  std::map<std::string, std::map<std::string, std::string>> done;
  for (const auto& entry : log.entries()) {
    if (!entry.contains("leaf") || !entry.contains("item") || !entry.contains("label")) continue;
    done[entry["leaf"].get<std::string>()][entry["item"].get<std::string>()] =
        entry["label"].get<std::string>();
  }

  const std::vector<std::size_t> leaves = tree.leaves();
  std::vector<LeafOutcome> outcomes(leaves.size());
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> resumed{0};

  run_parallel(leaves.size(), options.workers, [&](std::size_t i) {
    const std::size_t node = leaves[i];
    const std::string key = tree.path_key(node);
    const std::vector<std::string> path = tree.path(node);
    LeafOutcome& out = outcomes[i];
    out.tree = CategoryTree(key);
    const auto prior = done.find(key);

    // Strictly sequential: each request carries the tree built so far.
    for (const std::string& item : tree.nodes()[node].members) {
      std::string label;
      if (prior != done.end()) {
        if (auto hit = prior->second.find(item); hit != prior->second.end()) {
          label = hit->second;
          ++resumed;
        }
      }
      if (label.empty()) {
        GeneralTopicRequest req;
        if (auto ctx = context.items.find(item); ctx != context.items.end()) {
          req.item_title = ctx->second.title;
          req.description = ctx->second.description;
        }
        req.type_path = path;
        req.current_tree = out.tree.subtypes();
        try {
          label = extractor.extract_general_topic(req);
        } catch (const BackendError&) {
          out.error = std::current_exception();
          return;
        }
        ++calls;
        log.append({{"leaf", key}, {"item", item}, {"label", label}});
      }
      out.tree.add(label);
      out.assignments.emplace_back(item, std::move(label));
    }
  });

  for (const auto& out : outcomes) {
    if (out.error) std::rethrow_exception(out.error);
  }

  kg.extend_metagraph(build_topic_metagraph());
  GeneralTopicResult result;
  result.backend_calls = calls;
  result.resumed_items = resumed;
  for (auto& out : outcomes) {
    for (const auto& [item, label] : out.assignments) {
      const auto item_id = kg.find_entity(names::kItem, item);
      if (!item_id) {
        throw ValidationError("type tree item '" + item + "' is not an Item entity");
      }
      const EntityId subtype = kg.register_entity(label, names::kSubtype);
      if (kg.add_triplet(*item_id, names::kRelatedTo, subtype) == AddResult::inserted) {
        ++result.triplets_added;
      }
    }
    result.trees.push_back(std::move(out.tree));
  }
  return result;
}

}  // namespace tkg
