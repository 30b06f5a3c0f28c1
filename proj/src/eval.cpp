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

#include "tkg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

namespace tkg {

std::vector<Interaction> purchases(const KnowledgeGraph& kg) {
  std::vector<Interaction> out;
  const auto rel = kg.find_relation(names::kPurchase);
  if (!rel) return out;
  const auto all = kg.triplets();
  for (std::size_t idx : kg.edges_with(*rel)) {
    const Triplet& t = all[idx];
    if (kg.is_type(t.head, names::kUser) && kg.is_type(t.tail, names::kItem)) {
      out.push_back({t.head, t.tail});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

InteractionSplit split_interactions(const KnowledgeGraph& kg,
                                    const std::vector<Interaction>& interactions, double ratio,
                                    std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must be in (0, 1)");
  auto by_label = [&](EntityId a, EntityId b) {
    return kg.entity(a).label < kg.entity(b).label;
  };
  std::map<EntityId, std::vector<EntityId>> per_user;
  for (const auto& x : interactions) per_user[x.user].push_back(x.item);
  std::vector<EntityId> users;
  for (const auto& [u, items] : per_user) users.push_back(u);
  std::sort(users.begin(), users.end(), by_label);

  InteractionSplit split;
  split.seed = seed;
  split.ratio = ratio;
  std::mt19937_64 rng(seed);
  for (EntityId u : users) {
    auto items = per_user[u];
    std::sort(items.begin(), items.end(), by_label);
    items.erase(std::unique(items.begin(), items.end()), items.end());
    const std::size_t n = items.size();
    if (n < 2) {
      for (EntityId i : items) split.train.push_back({u, i});
      continue;
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(items[i], items[static_cast<std::size_t>(rng() % (i + 1))]);
    }
    const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
    const std::size_t n_train = std::clamp<std::size_t>(cut, 1, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      (i < n_train ? split.train : split.test).push_back({u, items[i]});
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// --- recommender ------------------------------------------------------------

PathRecommender::PathRecommender(const KnowledgeGraph& kg, const InteractionSplit& split)
    : kg_(kg) {
  const std::size_t n = kg.entity_count();
  alias_.resize(n);
  is_item_.assign(n, 0);
  is_user_.assign(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    alias_[i] = i;
    const EntityView e = kg.entity(EntityId{i});
    if (e.type == names::kItem) is_item_[i] = 1;
    if (e.type == names::kUser) is_user_[i] = 1;
    if (e.type == names::kRelatedItem) {
      if (auto item = kg.find_entity(names::kItem, e.label)) alias_[i] = item->value;
    }
  }

  const std::set<Interaction> test(split.test.begin(), split.test.end());
  const auto purchase = kg.find_relation(names::kPurchase);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(kg.triplet_count());
  for (const Triplet& t : kg.triplets()) {
    if (purchase && t.relation == *purchase && test.contains({t.head, t.tail})) continue;
    const std::uint32_t a = alias_[t.head.value];
    const std::uint32_t b = alias_[t.tail.value];
    if (a == b) continue;
    edges.emplace_back(a, b);
  }
  offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : edges) {
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  adj_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    adj_[fill[a]++] = b;
    adj_[fill[b]++] = a;
  }

  std::vector<std::uint64_t> popularity(n, 0);
  for (const auto& x : split.train) {
    train_items_[x.user.value].push_back(x.item.value);
    ++popularity[x.item.value];
  }
  for (auto& [u, items] : train_items_) std::sort(items.begin(), items.end());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (is_item_[i]) popular_.push_back(i);
  }
  std::stable_sort(popular_.begin(), popular_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return popularity[a] > popularity[b];
  });
}

void PathRecommender::score_into(std::uint32_t user, std::vector<double>& score,
                                 std::vector<std::uint32_t>& touched) const {
  auto bump = [&](std::uint32_t item, double w) {
    if (score[item] == 0.0) touched.push_back(item);
    score[item] += w;
  };
  for (std::size_t p = offsets_[user]; p < offsets_[user + 1]; ++p) {
    const std::uint32_t e1 = adj_[p];
    const double w1 = 1.0 / static_cast<double>(offsets_[e1 + 1] - offsets_[e1]);
    for (std::size_t q = offsets_[e1]; q < offsets_[e1 + 1]; ++q) {
      const std::uint32_t e2 = adj_[q];
      if (e2 == user) continue;
      if (is_item_[e2]) bump(e2, w1);
      const double w2 = w1 / static_cast<double>(offsets_[e2 + 1] - offsets_[e2]);
      for (std::size_t r = offsets_[e2]; r < offsets_[e2 + 1]; ++r) {
        const std::uint32_t i = adj_[r];
        if (i == e1 || i == user || !is_item_[i]) continue;
        bump(i, w2);
      }
    }
  }
}

std::map<EntityId, double> PathRecommender::scores(EntityId user) const {
  if (user.value >= is_user_.size() || !is_user_[user.value]) {
    throw InvalidArgument("unknown user id " + std::to_string(user.value));
  }
  std::vector<double> score(is_item_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  score_into(user.value, score, touched);
  std::map<EntityId, double> out;
  for (std::uint32_t i : touched) out[EntityId{i}] = score[i];
  return out;
}

namespace {

struct Scratch {
  std::vector<double> score;
  std::vector<std::uint32_t> touched;
};

}  // namespace

std::vector<EntityId> PathRecommender::recommend(EntityId user, std::size_t k,
                                                 bool backfill) const {
  if (user.value >= is_user_.size() || !is_user_[user.value]) {
    throw InvalidArgument("unknown user id " + std::to_string(user.value));
  }
  thread_local Scratch scratch;
  scratch.score.assign(is_item_.size(), 0.0);
  scratch.touched.clear();
  score_into(user.value, scratch.score, scratch.touched);

  static const std::vector<std::uint32_t> kNone;
  auto it = train_items_.find(user.value);
  const auto& train = it == train_items_.end() ? kNone : it->second;
  auto in_train = [&](std::uint32_t i) {
    return std::binary_search(train.begin(), train.end(), i);
  };

  std::vector<std::uint32_t> cand;
  for (std::uint32_t i : scratch.touched) {
    if (scratch.score[i] > 0.0 && !in_train(i)) cand.push_back(i);
  }
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scratch.score[a] != scratch.score[b]) return scratch.score[a] > scratch.score[b];
    return a < b;
  };
  const std::size_t take = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                    better);
  cand.resize(take);

  std::vector<EntityId> out;
  out.reserve(k);
  for (std::uint32_t i : cand) out.push_back(EntityId{i});
  if (backfill && out.size() < k) {
    std::unordered_set<std::uint32_t> chosen(cand.begin(), cand.end());
    for (std::uint32_t i : popular_) {
      if (out.size() >= k) break;
      if (chosen.contains(i) || in_train(i)) continue;
      out.push_back(EntityId{i});
    }
  }
  return out;
}

namespace {

std::vector<RankedList> test_lists(const InteractionSplit& split) {
  std::vector<RankedList> lists;
  for (const auto& x : split.test) {
    if (lists.empty() || lists.back().user != x.user) lists.push_back({x.user, {}, {}});
    lists.back().relevant.push_back(x.item);
  }
  return lists;
}

}  // namespace

std::vector<RankedList> recommend_all(const PathRecommender& rec, const InteractionSplit& split,
                                      std::size_t k, bool backfill) {
  auto lists = test_lists(split);
  const auto n = static_cast<std::ptrdiff_t>(lists.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      auto& l = lists[static_cast<std::size_t>(i)];
      l.ranked = rec.recommend(l.user, k, backfill);
    } catch (...) {
#pragma omp critical(tkg_recommend_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return lists;
}

std::vector<RankedList> recommend_all_serial(const PathRecommender& rec,
                                             const InteractionSplit& split, std::size_t k,
                                             bool backfill) {
  auto lists = test_lists(split);
  for (auto& l : lists) l.ranked = rec.recommend(l.user, k, backfill);
  return lists;
}

// --- metrics ----------------------------------------------------------------

UserMetrics user_metrics(const std::vector<EntityId>& ranked,
                         const std::vector<EntityId>& relevant, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  const std::set<EntityId> rel(relevant.begin(), relevant.end());
  if (rel.empty()) throw InvalidArgument("empty relevant set");
  std::set<EntityId> seen;
  UserMetrics m;
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t r = 1; r <= depth; ++r) {
    const EntityId item = ranked[r - 1];
    if (rel.contains(item) && seen.insert(item).second) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
      ++m.hits;
    }
  }
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(k, rel.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  m.ndcg = dcg / idcg;
  m.recall = static_cast<double>(m.hits) / static_cast<double>(rel.size());
  m.precision = static_cast<double>(m.hits) / static_cast<double>(k);
  m.hit = m.hits > 0 ? 1.0 : 0.0;
  return m;
}

namespace {

RankingMetrics aggregate(const std::vector<UserMetrics>& per_user) {
  RankingMetrics out;
  for (const auto& m : per_user) {
    out.ndcg += m.ndcg;
    out.recall += m.recall;
    out.precision += m.precision;
    out.hit_ratio += m.hit;
  }
  out.users_evaluated = per_user.size();
  if (!per_user.empty()) {
    const auto n = static_cast<double>(per_user.size());
    out.ndcg /= n;
    out.recall /= n;
    out.precision /= n;
    out.hit_ratio /= n;
  }
  return out;
}

std::vector<const RankedList*> evaluable(const std::vector<RankedList>& lists, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  std::vector<const RankedList*> out;
  for (const auto& l : lists) {
    if (!l.relevant.empty()) out.push_back(&l);
  }
  return out;
}

}  // namespace

RankingMetrics evaluate_ranking(const std::vector<RankedList>& lists, std::size_t k) {
  const auto users = evaluable(lists, k);
  std::vector<UserMetrics> per_user(users.size());
  const auto n = static_cast<std::ptrdiff_t>(users.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto* l = users[static_cast<std::size_t>(i)];
    per_user[static_cast<std::size_t>(i)] = user_metrics(l->ranked, l->relevant, k);
  }
  return aggregate(per_user);
}

RankingMetrics evaluate_ranking_serial(const std::vector<RankedList>& lists, std::size_t k) {
  const auto users = evaluable(lists, k);
  std::vector<UserMetrics> per_user;
  per_user.reserve(users.size());
  for (const auto* l : users) per_user.push_back(user_metrics(l->ranked, l->relevant, k));
  return aggregate(per_user);
}

EvalReport evaluate_graph(const KnowledgeGraph& kg, const EvalOptions& options) {
  if (options.k == 0) throw InvalidArgument("k must be positive");
  EvalReport report;
  report.options = options;
  const auto split = split_interactions(kg, purchases(kg), options.ratio, options.seed);
  report.train_interactions = split.train.size();
  report.test_interactions = split.test.size();
  const PathRecommender rec(kg, split);
  report.metrics = evaluate_ranking(recommend_all(rec, split, options.k, options.backfill),
                                    options.k);
  return report;
}

nlohmann::json eval_report_to_json(const EvalReport& r) {
  return {
      {"ndcg", r.metrics.ndcg},
      {"recall", r.metrics.recall},
      {"precision", r.metrics.precision},
      {"hit_ratio", r.metrics.hit_ratio},
      {"users_evaluated", r.metrics.users_evaluated},
      {"k", r.options.k},
      {"ratio", r.options.ratio},
      {"seed", r.options.seed},
      {"backfill", r.options.backfill},
      {"train_interactions", r.train_interactions},
      {"test_interactions", r.test_interactions},
      {"split_protocol", "per-user random split (stand-in protocol)"},
      {"recommender", "path-count baseline, length <= 3, weight 1/deg"},
  };
}

}  // namespace tkg
