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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tkg/eval.hpp"
#include "tkg/ingest.hpp"
#include "tkg/refine.hpp"

namespace {

using namespace tkg;

std::vector<std::string> labels(std::size_t n) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> letter('a', 'f');
  std::uniform_int_distribution<int> len(3, 10);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), 'a');
    for (auto& ch : s) ch = static_cast<char>(letter(rng));
    out.push_back(std::move(s));
  }
  return out;
}

struct Fixture {
  BaseGraph base;
  InteractionSplit split;
  std::unique_ptr<PathRecommender> rec;
  std::vector<RankedList> lists;
};

const Fixture& fixture() {
  static const Fixture* f = [] {
    const std::filesystem::path dir = std::filesystem::path(TKG_SOURCE_DIR) / "data" / "fixture";
    std::ifstream meta(dir / "metadata.jsonl");
    std::ifstream rev(dir / "reviews.jsonl");
    const Metagraph standard = default_standard_metagraph();
    auto* out = new Fixture{
        build_base_graph(parse_item_metadata(meta).records, parse_reviews(rev).records,
                         build_base_metagraph(standard, context_entity_types(standard)), {}),
        {}, nullptr, {}};
    out->split = split_interactions(out->base.graph, purchases(out->base.graph), 0.8, 7);
    out->rec = std::make_unique<PathRecommender>(out->base.graph, out->split);
    out->lists = recommend_all_serial(*out->rec, out->split, 10, true);
    return out;
  }();
  return *f;
}

template <auto Fn>
void BM_Partition(benchmark::State& state) {
  const auto l = labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(l, 50));
}
BENCHMARK(BM_Partition<topic_partition_serial>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_Partition<topic_partition>)->Arg(1000)->Arg(20000);

template <auto Fn>
void BM_Recommend(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(*f.rec, f.split, 10, true));
}
BENCHMARK(BM_Recommend<recommend_all_serial>);
BENCHMARK(BM_Recommend<recommend_all>);

template <auto Fn>
void BM_Metrics(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(f.lists, 10));
}
BENCHMARK(BM_Metrics<evaluate_ranking_serial>);
BENCHMARK(BM_Metrics<evaluate_ranking>);

template <auto Fn>
void BM_Validate(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(f.base.graph));
}
BENCHMARK(BM_Validate<validate_graph_serial>);
BENCHMARK(BM_Validate<validate_graph>);

}  // namespace

BENCHMARK_MAIN();
