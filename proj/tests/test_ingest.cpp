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

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tkg/graph_io.hpp"
#include "tkg/ingest.hpp"
#include "tkg/text.hpp"

namespace tkg {
namespace {

Metagraph base_metagraph() {
  const Metagraph standard = default_standard_metagraph();
  return build_base_metagraph(standard, context_entity_types(standard));
}

// --- text --------------------------------------------------------------------

TEST(Text, NormalizeCollapsesWhitespace) {
  EXPECT_EQ(normalize_text("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(normalize_text(" x y "), "x y");
  EXPECT_EQ(normalize_text(""), "");
}

TEST(Text, NormalizeIsNfc) {
  // e + combining acute -> precomposed
  EXPECT_EQ(normalize_text("é"), "é");
}

TEST(Text, FoldCase) {
  EXPECT_EQ(fold_case("HyDrAtInG"), "hydrating");
  EXPECT_EQ(fold_case("STRASSE"), "strasse");
  EXPECT_EQ(fold_case("Straße"), "strasse");
}

TEST(Text, CodePoints) {
  EXPECT_EQ(code_point_length("日本😀a"), 4u);
  EXPECT_EQ(from_code_points(to_code_points("naïve 😀")), "naïve 😀");
}

TEST(Text, TitleCase) { EXPECT_EQ(title_case("hydrating serum"), "Hydrating Serum"); }

TEST(Text, Tokenize) {
  StopwordSet stop{"very"};
  EXPECT_EQ(tokenize("very hydrating serum", stop),
            (std::vector<std::string>{"hydrating", "serum"}));
  EXPECT_EQ(tokenize("Non-greasy, SO good; go go", {}),
            (std::vector<std::string>{"non", "greasy", "good"}));
  EXPECT_TRUE(default_stopwords().contains("very"));
}

TEST(Text, LoadStopwords) {
  testing::TempDir dir("stop");
  {
    std::ofstream out(dir / "s.txt");
    out << "# comment\nVery\n\n  serum \n";
  }
  const StopwordSet s = load_stopwords(dir / "s.txt");
  EXPECT_EQ(s, (StopwordSet{"very", "serum"}));
  EXPECT_THROW(load_stopwords(dir / "missing.txt"), IoError);
}

// --- parsing -----------------------------------------------------------------

TEST(Parse, ItemLine) {
  std::istringstream in(
      R"({"asin":"B1","title":"Serum","categories":[["Beauty","Skin Care","Face"]],"brand":"X","related":{"also_bought":["B2"]}})"
      "\n");
  const auto r = parse_item_metadata(in);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.malformed, 0u);
  const ItemRecord& item = r.records[0];
  EXPECT_EQ(item.item_id, "B1");
  ASSERT_EQ(item.category_paths.size(), 1u);
  EXPECT_EQ(item.category_paths[0].size(), 3u);
  EXPECT_EQ(item.brand, "X");
  EXPECT_EQ(item.related.at("also_bought"), (std::vector<std::string>{"B2"}));
}

TEST(Parse, EmptyStream) {
  std::istringstream in("");
  EXPECT_TRUE(parse_item_metadata(in).records.empty());
  std::istringstream in2("");
  EXPECT_TRUE(parse_reviews(in2).records.empty());
}

TEST(Parse, MalformedCounted) {
  std::istringstream in("{\"title\":\"no asin\"}\n{oops\n\n{\"asin\":\"B2\",\"title\":\"t\"}\n");
  const auto r = parse_item_metadata(in);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.malformed, 2u);
}

TEST(Parse, Reviews) {
  std::istringstream in(
      R"({"reviewerID":"U1","asin":"B1","reviewText":"Very hydrating","overall":5})" "\n"
      R"({"reviewerID":"U1","asin":"B1","reviewText":"","overall":1})" "\n"
      R"({"reviewerID":"U1","asin":"B1","reviewText":"again"})" "\n");
  const auto r = parse_reviews(in);
  ASSERT_EQ(r.records.size(), 3u);  // duplicates and empty text kept
  EXPECT_EQ(r.records[0].text, "Very hydrating");
  EXPECT_EQ(r.records[0].rating, 5.0);
  EXPECT_EQ(r.records[1].text, "");
}

// --- type tree ---------------------------------------------------------------

ItemRecord item(std::string id, std::vector<std::vector<std::string>> paths) {
  ItemRecord r;
  r.item_id = std::move(id);
  r.title = "t";
  r.category_paths = std::move(paths);
  return r;
}

TEST(TypeTree, TwoLeavesUnderOneRoot) {
  std::vector<ItemRecord> items{item("A", {{"Beauty", "Skin Care"}}),
                                item("B", {{"Beauty", "Hair Care"}})};
  const TypeTree t = build_type_tree(items);
  EXPECT_EQ(t.roots().size(), 1u);
  EXPECT_EQ(t.leaves().size(), 2u);
}

TEST(TypeTree, SharedLeaf) {
  std::vector<ItemRecord> items{item("A", {{"Beauty", "Skin Care", "Face"}}),
                                item("B", {{"beauty", "skin care", "face"}})};
  const TypeTree t = build_type_tree(items);
  ASSERT_EQ(t.leaves().size(), 1u);
  EXPECT_EQ(t.nodes()[t.leaves()[0]].members, (std::set<std::string>{"A", "B"}));
  EXPECT_EQ(t.path_key(t.leaves()[0]), "Beauty > Skin Care > Face");
}

TEST(TypeTree, UncategorizedLeaf) {
  std::vector<ItemRecord> items{item("A", {})};
  const TypeTree t = build_type_tree(items);
  ASSERT_EQ(t.leaves().size(), 1u);
  EXPECT_EQ(t.nodes()[t.leaves()[0]].label, kUncategorized);
}

TEST(TypeTreeProperty, MembershipPerPath) {
  testing::Gen g(3);
  const std::vector<std::string> labels{"A", "B", "C"};
  for (int round = 0; round < 50; ++round) {
    std::vector<ItemRecord> items;
    for (int i = 0; i < 30; ++i) {
      std::set<std::vector<std::string>> paths;
      const std::size_t k = g.range(1, 3);
      while (paths.size() < k) {
        std::vector<std::string> p;
        for (std::size_t d = 0, n = g.range(1, 3); d < n; ++d) p.push_back(g.pick(labels));
        paths.insert(p);
      }
      items.push_back(item("I" + std::to_string(i), {paths.begin(), paths.end()}));
    }
    const TypeTree t = build_type_tree(items);
    std::map<std::string, std::size_t> leaf_count;
    for (std::size_t leaf : t.leaves()) {
      for (const auto& m : t.nodes()[leaf].members) ++leaf_count[m];
    }
    for (const auto& it : items) EXPECT_EQ(leaf_count[it.item_id], it.category_paths.size());
    // JSON round trip preserves leaves and membership.
    const TypeTree back = TypeTree::from_json(t.to_json());
    ASSERT_EQ(back.leaves().size(), t.leaves().size());
    for (std::size_t i = 0; i < t.leaves().size(); ++i) {
      EXPECT_EQ(back.path_key(back.leaves()[i]), t.path_key(t.leaves()[i]));
      EXPECT_EQ(back.nodes()[back.leaves()[i]].members, t.nodes()[t.leaves()[i]].members);
    }
  }
}

// --- base graph --------------------------------------------------------------

TEST(BaseGraph, OneItemOneReview) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty", "Skin Care", "Face"}})};
  items[0].brand = "X";
  items[0].related["also_bought"] = {"B2"};
  items[0].description = "Light serum";
  std::vector<ReviewRecord> reviews{{"U1", "B1", "Very hydrating", 5.0, std::nullopt}};
  const BaseGraph g = build_base_graph(items, reviews, base_metagraph(), {});
  // 1 purchase + 1 produced_by + 3 belongs_to + 1 also_bought
  EXPECT_EQ(g.graph.triplet_count(), 6u);
  EXPECT_TRUE(validate_graph(g.graph).ok());
  EXPECT_EQ(g.context.items.at("B1").description, "Light serum");
  ASSERT_EQ(g.context.reviews.size(), 1u);
  EXPECT_EQ(g.context.reviews[0].text, "Very hydrating");
  EXPECT_FALSE(g.graph.metagraph().has_entity_type("Review"));
}

TEST(BaseGraph, NoReviewsNoPurchases) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty"}})};
  const BaseGraph g = build_base_graph(items, {}, base_metagraph(), {});
  EXPECT_FALSE(g.graph.find_relation("purchase") &&
               !g.graph.edges_with(*g.graph.find_relation("purchase")).empty());
}

TEST(BaseGraph, LargeVariantWords) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty"}})};
  std::vector<ReviewRecord> reviews{{"U1", "B1", "very hydrating serum", std::nullopt, std::nullopt}};
  const StopwordSet stop{"very"};
  BaseGraphOptions opt;
  opt.variant = Variant::large;
  opt.stopwords = &stop;
  const BaseGraph g =
      build_base_graph(items, reviews, large_variant_metagraph(base_metagraph()), opt);
  std::set<std::string> words;
  for (EntityId id : g.graph.entities_of_type("Word")) {
    words.insert(std::string(g.graph.entity(id).label));
  }
  EXPECT_EQ(words, (std::set<std::string>{"hydrating", "serum"}));
  EXPECT_TRUE(validate_graph(g.graph).ok());
}

TEST(BaseGraph, LargeVariantNeedsMetagraph) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty"}})};
  std::vector<ReviewRecord> reviews{{"U1", "B1", "hydrating", std::nullopt, std::nullopt}};
  BaseGraphOptions opt;
  opt.variant = Variant::large;
  EXPECT_THROW(build_base_graph(items, reviews, base_metagraph(), opt), ValidationError);
}

TEST(BaseGraph, RelatedItemAliasAndUnknownReviews) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty"}}), item("B2", {{"Beauty"}})};
  items[0].related["also_viewed"] = {"B2", "Z9"};
  std::vector<ReviewRecord> reviews{{"U1", "B1", "ok", std::nullopt, std::nullopt},
                                    {"U1", "NOPE", "ok", std::nullopt, std::nullopt}};
  const BaseGraph g = build_base_graph(items, reviews, base_metagraph(), {});
  EXPECT_EQ(g.skipped_reviews, 1u);
  EXPECT_EQ(g.graph.entities_of_type("RelatedItem").size(), 2u);
}

TEST(BaseGraph, MaxReviewsPerItem) {
  std::vector<ItemRecord> items{item("B1", {{"Beauty"}})};
  std::vector<ReviewRecord> reviews;
  for (int u = 0; u < 5; ++u) reviews.push_back({"U" + std::to_string(u), "B1", "x", {}, {}});
  BaseGraphOptions opt;
  opt.max_reviews_per_item = 2;
  const BaseGraph g = build_base_graph(items, reviews, base_metagraph(), opt);
  EXPECT_EQ(g.graph.edges_with(*g.graph.find_relation("purchase")).size(), 2u);
  EXPECT_EQ(g.context.reviews.size(), 2u);
  EXPECT_EQ(g.skipped_reviews, 3u);
}

TEST(BaseGraphProperty, PurchasesEqualDistinctPairs) {
  testing::Gen g(9);
  for (int round = 0; round < 30; ++round) {
    std::vector<ItemRecord> items;
    for (int i = 0; i < 10; ++i) items.push_back(item("I" + std::to_string(i), {{"T"}}));
    std::vector<ReviewRecord> reviews;
    std::set<std::pair<std::string, std::string>> pairs;
    for (int r = 0; r < 60; ++r) {
      ReviewRecord rec{"U" + std::to_string(g.below(8)), "I" + std::to_string(g.below(10)),
                       "text", {}, {}};
      pairs.emplace(rec.user_id, rec.item_id);
      reviews.push_back(rec);
    }
    const BaseGraph bg = build_base_graph(items, reviews, base_metagraph(), {});
    EXPECT_EQ(bg.graph.edges_with(*bg.graph.find_relation("purchase")).size(), pairs.size());
    EXPECT_TRUE(validate_graph(bg.graph).ok());
  }
}

TEST(BaseGraph, DeterministicExport) {
  auto build = [](const std::filesystem::path& dir) {
    std::ifstream meta(testing::data_dir() / "fixture" / "metadata.jsonl");
    std::ifstream rev(testing::data_dir() / "fixture" / "reviews.jsonl");
    const auto items = parse_item_metadata(meta);
    const auto reviews = parse_reviews(rev);
    const BaseGraph g = build_base_graph(items.records, reviews.records, base_metagraph(), {});
    export_graph(g.graph, dir);
    std::ifstream t(dir / "triplets.tsv");
    std::ifstream e(dir / "entities.tsv");
    return std::string(std::istreambuf_iterator<char>(t), {}) +
           std::string(std::istreambuf_iterator<char>(e), {});
  };
  testing::TempDir a("det-a"), b("det-b");
  EXPECT_EQ(build(a.path()), build(b.path()));
}

TEST(Context, RoundTrip) {
  testing::TempDir dir("ctx");
  ContextStore s;
  s.items["B1"] = {"Title", "Desc with\ttab"};
  s.reviews.push_back({"U1", "B1", "nice"});
  write_context(s, dir / "c.jsonl");
  const ContextStore back = read_context(dir / "c.jsonl");
  EXPECT_EQ(back.items.at("B1").description, "Desc with\ttab");
  ASSERT_EQ(back.reviews.size(), 1u);
  EXPECT_EQ(back.reviews[0].text, "nice");
}

}  // namespace
}  // namespace tkg
