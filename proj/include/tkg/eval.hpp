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
#include <map>
#include <vector>

#include "json.hpp"
#include "tkg/kg.hpp"

namespace tkg {

struct Interaction {
  EntityId user;
  EntityId item;
  auto operator<=>(const Interaction&) const = default;
};

/// (User, purchase, Item) triplets, sorted.
std::vector<Interaction> purchases(const KnowledgeGraph& kg);

struct InteractionSplit {
  std::vector<Interaction> train;  // sorted
  std::vector<Interaction> test;   // sorted
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

/// Per-user shuffle-and-cut. Users are visited in label order and each
/// user's items are shuffled from label order with one mt19937_64 stream, so
/// graphs sharing user/item labels get the same split. A user with n >= 2
/// interactions keeps clamp(floor(ratio * n), 1, n - 1) in train; users with
/// fewer go entirely to train. Throws InvalidArgument unless 0 < ratio < 1.
InteractionSplit split_interactions(const KnowledgeGraph& kg,
                                    const std::vector<Interaction>& interactions, double ratio,
                                    std::uint64_t seed);

/// Path-counting baseline over the undirected train graph (the KG without
/// the test purchases; RelatedItem nodes merged into the Item with the same
/// key). score(i) sums, over simple paths u-e-i and u-e1-e2-i, the product of
/// 1/deg over the intermediate nodes. Degrees count parallel edges.
class PathRecommender {
 public:
  PathRecommender(const KnowledgeGraph& kg, const InteractionSplit& split);

  /// Top-k items by score, ties by ascending id, train items excluded. Items
  /// with zero score are left out unless `backfill`, which pads the list by
  /// train popularity (ties by id). Throws InvalidArgument for a non-User id.
  std::vector<EntityId> recommend(EntityId user, std::size_t k, bool backfill = false) const;

  /// Non-zero scores, for tests.
  std::map<EntityId, double> scores(EntityId user) const;

  std::size_t node_count() const { return offsets_.size() - 1; }

 private:
  void score_into(std::uint32_t user, std::vector<double>& score,
                  std::vector<std::uint32_t>& touched) const;

  const KnowledgeGraph& kg_;
  std::vector<std::uint32_t> alias_;
  std::vector<std::size_t> offsets_;  // CSR
  std::vector<std::uint32_t> adj_;
  std::vector<char> is_item_;
  std::vector<char> is_user_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> train_items_;  // sorted
  std::vector<std::uint32_t> popular_;
};

struct RankedList {
  EntityId user;
  std::vector<EntityId> ranked;
  std::vector<EntityId> relevant;
};

/// One RankedList per user with a non-empty test set, ascending user id.
/// OpenMP over users.
std::vector<RankedList> recommend_all(const PathRecommender& rec, const InteractionSplit& split,
                                      std::size_t k, bool backfill);
std::vector<RankedList> recommend_all_serial(const PathRecommender& rec,
                                             const InteractionSplit& split, std::size_t k,
                                             bool backfill);

struct UserMetrics {
  double ndcg = 0;
  double recall = 0;
  double precision = 0;
  double hit = 0;
  std::size_t hits = 0;
};

/// Binary relevance over the first k entries of `ranked`; rank r contributes
/// 1/log2(r + 1). Throws InvalidArgument for k = 0 or empty `relevant`.
UserMetrics user_metrics(const std::vector<EntityId>& ranked,
                         const std::vector<EntityId>& relevant, std::size_t k);

struct RankingMetrics {
  double ndcg = 0;
  double recall = 0;
  double precision = 0;
  double hit_ratio = 0;
  std::size_t users_evaluated = 0;
};

/// Means over lists with a non-empty relevant set. Per-user terms are
/// computed in parallel and summed in list order, so the result matches
/// evaluate_ranking_serial bit for bit.
RankingMetrics evaluate_ranking(const std::vector<RankedList>& lists, std::size_t k);
RankingMetrics evaluate_ranking_serial(const std::vector<RankedList>& lists, std::size_t k);

struct EvalOptions {
  std::size_t k = 10;
  double ratio = 0.8;
  std::uint64_t seed = 7;
  bool backfill = false;
};

struct EvalReport {
  RankingMetrics metrics;
  std::size_t train_interactions = 0;
  std::size_t test_interactions = 0;
  EvalOptions options;
};

EvalReport evaluate_graph(const KnowledgeGraph& kg, const EvalOptions& options);
nlohmann::json eval_report_to_json(const EvalReport& report);

}  // namespace tkg
