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

#include "tkg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tkg/general_topics.hpp"
#include "tkg/graph_io.hpp"
#include "tkg/refine.hpp"
#include "tkg/specific_topics.hpp"

namespace tkg {

using json = nlohmann::json;

namespace {

constexpr const char* kPendingFile = "pending.json";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void copy_into(const fs::path& from, const fs::path& to) {
  write_text_file_atomic(to, read_file(from));
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("missing input file " + path.string());
}

void require_dir(const fs::path& path) {
  if (!fs::is_directory(path)) throw IoError("missing input directory " + path.string());
}

std::string opt_path(const std::optional<fs::path>& p) { return p ? p->string() : ""; }

// Starts a backend stage: returns the checkpoint path, discarding a default
// checkpoint left by a run with a different manifest.
fs::path begin_stage(const fs::path& out, const json& manifest, const StageOptions& stage) {
  fs::create_directories(out);
  if (stage.checkpoint) return *stage.checkpoint;
  const fs::path checkpoint = out / kCheckpointFile;
  const fs::path pending = out / kPendingFile;
  bool same = false;
  if (fs::exists(pending)) {
    auto prior = json::parse(read_file(pending), nullptr, false);
    same = !prior.is_discarded() && prior == manifest;
  }
  if (!same) fs::remove(checkpoint);
  write_json_file(pending, manifest);
  return checkpoint;
}

void finish_stage(const fs::path& out, const json& manifest) {
  write_json_file(out / kManifestFile, manifest);
  fs::remove(out / kPendingFile);
}

json skipped(const std::string& stage) { return {{"stage", stage}, {"skipped", true}}; }

}  // namespace

json BackendSettings::to_json() const {
  json j = {{"kind", kind}, {"max_words", max_words}};
  if (kind == "http") {
    j["model"] = http.model;
    j["endpoint"] = http.endpoint;
    j["temperature"] = http.temperature;
    j["prompt_dir"] = opt_path(http.prompt_dir);
  } else {
    j["model"] = "mock";
  }
  return j;
}

std::shared_ptr<ChatBackend> make_backend(const BackendSettings& settings) {
  std::shared_ptr<ChatBackend> inner;
  if (settings.kind == "mock") {
    inner = std::make_shared<MockBackend>();
  } else if (settings.kind == "http") {
    inner = std::make_shared<HttpBackend>(settings.http);
  } else {
    throw InvalidArgument("unknown backend '" + settings.kind + "' (expected mock or http)");
  }
  if (settings.max_words == 0) throw InvalidArgument("max words must be positive");
  if (settings.http.cache_dir) {
    return std::make_shared<CachedBackend>(inner, *settings.http.cache_dir);
  }
  return inner;
}

std::string hash_input(const fs::path& path) {
  if (fs::is_regular_file(path)) return sha256_hex(read_file(path));
  if (!fs::is_directory(path)) throw IoError("missing input " + path.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == kManifestFile || name == kCheckpointFile || name == kPendingFile) continue;
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::string listing;
  for (const auto& name : names) {
    listing += name + '\t' + sha256_hex(read_file(path / name)) + '\n';
  }
  return sha256_hex(listing);
}

json make_manifest(const std::string& command, const std::vector<fs::path>& inputs,
                   const json& config) {
  json hashes = json::object();
  for (const auto& p : inputs) hashes[p.string()] = hash_input(p);
  return {{"tool", "tkg"},
          {"version", kVersion},
          {"command", command},
          {"inputs", hashes},
          {"config", config}};
}

bool manifest_matches(const fs::path& dir, const json& manifest) {
  const fs::path path = dir / kManifestFile;
  if (!fs::is_regular_file(path)) return false;
  auto prior = json::parse(read_file(path), nullptr, false);
  return !prior.is_discarded() && prior == manifest;
}

// --- ingest -----------------------------------------------------------------

json run_ingest(const IngestConfig& c, const StageOptions& stage) {
  require_file(c.metadata);
  require_file(c.reviews);
  std::vector<fs::path> inputs{c.metadata, c.reviews};
  if (c.metagraph) inputs.push_back(*c.metagraph);
  if (c.stopwords) inputs.push_back(*c.stopwords);
  json config = {{"variant", to_string(c.variant)},
                 {"metagraph", opt_path(c.metagraph)},
                 {"stopwords", opt_path(c.stopwords)},
                 {"max_reviews_per_item", c.max_reviews_per_item
                                              ? json(*c.max_reviews_per_item)
                                              : json(nullptr)}};
  const json manifest = make_manifest("ingest", inputs, config);
  if (!stage.force && manifest_matches(c.out, manifest)) return skipped("ingest");

  const Metagraph standard = c.metagraph ? load_metagraph(*c.metagraph)
                                         : default_standard_metagraph();
  Metagraph base = build_base_metagraph(standard, context_entity_types(standard));
  if (c.variant == Variant::large) base = large_variant_metagraph(base);

  std::ifstream meta_in(c.metadata);
  std::ifstream review_in(c.reviews);
  const auto items = parse_item_metadata(meta_in);
  const auto reviews = parse_reviews(review_in);
  std::optional<StopwordSet> stopwords;
  if (c.stopwords) stopwords = load_stopwords(*c.stopwords);

  BaseGraphOptions options;
  options.variant = c.variant;
  options.stopwords = stopwords ? &*stopwords : nullptr;
  options.max_reviews_per_item = c.max_reviews_per_item;
  BaseGraph built = build_base_graph(items.records, reviews.records, base, options);
  const TypeTree tree = TypeTree::build(items.records);

  fs::create_directories(c.out);
  export_graph(built.graph, c.out);
  write_json_file(c.out / kTypeTreeFile, tree.to_json());
  write_context(built.context, c.out / kContextFile);
  finish_stage(c.out, manifest);

  return {{"stage", "ingest"},
          {"items", items.records.size()},
          {"reviews", reviews.records.size()},
          {"malformed_items", items.malformed},
          {"malformed_reviews", reviews.malformed},
          {"duplicate_items", built.duplicate_items},
          {"skipped_reviews", built.skipped_reviews},
          {"entities", built.graph.entity_count()},
          {"triplets", built.graph.triplet_count()},
          {"type_leaves", tree.leaves().size()}};
}

// --- topics -----------------------------------------------------------------

json run_extract_general(const ExtractGeneralConfig& c, const StageOptions& stage) {
  require_dir(c.graph);
  const fs::path context_path = c.context.value_or(c.graph / kContextFile);
  require_file(context_path);
  const json config = {{"backend", c.backend.to_json()}};
  const json manifest = make_manifest("extract-general", {c.graph, context_path}, config);
  if (!stage.force && manifest_matches(c.out, manifest)) return skipped("extract-general");
  const fs::path checkpoint = begin_stage(c.out, manifest, stage);

  KnowledgeGraph kg = import_graph(c.graph);
  const TypeTree tree = TypeTree::from_json(read_json_file(c.graph / kTypeTreeFile));
  const ContextStore context = read_context(context_path);

  auto backend = make_backend(c.backend);
  TopicExtractor extractor(*backend, {c.backend.max_words, {}});
  GeneralTopicOptions options{checkpoint, c.backend.parallelism};
  const GeneralTopicResult result = extract_subtypes(kg, tree, context, extractor, options);

  export_graph(kg, c.out);
  copy_into(c.graph / kTypeTreeFile, c.out / kTypeTreeFile);
  copy_into(context_path, c.out / kContextFile);
  json trees = json::array();
  std::size_t subtypes = 0;
  for (const auto& t : result.trees) {
    trees.push_back(t.to_json());
    subtypes += t.subtypes().size();
  }
  write_json_file(c.out / "category_trees.json", trees);
  finish_stage(c.out, manifest);

  return {{"stage", "extract-general"},
          {"leaves", result.trees.size()},
          {"subtypes", subtypes},
          {"subtype_entities", kg.entities_of_type(names::kSubtype).size()},
          {"triplets_added", result.triplets_added},
          {"backend_calls", result.backend_calls},
          {"resumed_items", result.resumed_items}};
}

json run_extract_specific(const ExtractSpecificConfig& c, const StageOptions& stage) {
  require_dir(c.graph);
  const fs::path context_path = c.context.value_or(c.graph / kContextFile);
  require_file(context_path);
  const json config = {{"backend", c.backend.to_json()}};
  const json manifest = make_manifest("extract-specific", {c.graph, context_path}, config);
  if (!stage.force && manifest_matches(c.out, manifest)) return skipped("extract-specific");
  const fs::path checkpoint = begin_stage(c.out, manifest, stage);

  const KnowledgeGraph kg = import_graph(c.graph);
  const ContextStore context = read_context(context_path);
  auto backend = make_backend(c.backend);
  TopicExtractor extractor(*backend, {c.backend.max_words, {}});
  SpecificTopicOptions options{checkpoint, c.backend.parallelism};
  const SpecificTopicResult result = extract_candidate_words(kg, context, extractor, options);

  write_staged(result, c.out);
  finish_stage(c.out, manifest);

  return {{"stage", "extract-specific"},
          {"documents", result.documents},
          {"empty_documents", result.empty_documents},
          {"candidates", result.table.size()},
          {"candidate_frequency_total", result.table.total_frequency()},
          {"staged_edges", result.edges.size()},
          {"backend_calls", result.backend_calls},
          {"resumed_documents", result.resumed_documents}};
}

json run_refine(const RefineConfig& c, const StageOptions& stage) {
  require_dir(c.staged);
  require_dir(c.graph);
  if (c.max_subset == 0) throw InvalidArgument("--max-subset must be >= 1");
  const json config = {{"backend", c.backend.to_json()}, {"max_subset", c.max_subset}};
  const json manifest = make_manifest("refine", {c.staged, c.graph}, config);
  if (!stage.force && manifest_matches(c.out, manifest)) return skipped("refine");
  const fs::path checkpoint = begin_stage(c.out, manifest, stage);

  KnowledgeGraph kg = import_graph(c.graph);
  const StagedTopics staged = read_staged(c.staged);
  const auto frequency = staged.table.frequencies();
  const Partition partition = topic_partition(staged.table.labels(), c.max_subset);

  auto backend = make_backend(c.backend);
  TopicExtractor extractor(*backend, {c.backend.max_words, {}});
  RefineOptions options{checkpoint, c.backend.parallelism};
  const RefineResult refined = refine_topics(frequency, partition, extractor, options);
  if (!is_idempotent(refined.map)) throw ValidationError("canonical map is not idempotent");
  const std::size_t words_before = kg.entities_of_type(names::kWord).size();
  const ApplyResult applied = apply_canonical_map(staged.edges, refined.map, kg);
  const ViolationReport report = validate_graph(kg);
  if (!report.ok()) {
    throw ValidationError("refined graph has " + std::to_string(report.violations.size()) +
                          " non-conforming triplets");
  }

  export_graph(kg, c.out);
  write_json_file(c.out / "partition.json", partition_to_json(partition));
  write_canonical_map(refined.map, frequency, c.out / "canonical_map.tsv");
  finish_stage(c.out, manifest);

  std::set<std::string> canonicals;
  for (const auto& [label, canonical] : refined.map) canonicals.insert(canonical);
  return {{"stage", "refine"},
          {"candidates", frequency.size()},
          {"subsets", partition.size()},
          {"canonical_labels", canonicals.size()},
          {"word_entities_before", words_before},
          {"word_entities", kg.entities_of_type(names::kWord).size()},
          {"triplets_inserted", applied.inserted},
          {"triplets_collapsed", applied.collapsed},
          {"backend_calls", refined.backend_calls},
          {"resumed_subsets", refined.resumed_subsets}};
}

// --- reports ----------------------------------------------------------------

json run_validate(const fs::path& graph, const fs::path& out) {
  require_dir(graph);
  const KnowledgeGraph kg = import_graph(graph);
  const ViolationReport report = validate_graph(kg);
  json details = json::array();
  for (const auto& v : report.violations) {
    if (details.size() >= 100) break;
    details.push_back({{"head", kg.entity(v.triplet.head).label},
                       {"relation", v.type.relation},
                       {"tail", kg.entity(v.triplet.tail).label},
                       {"head_type", v.type.head},
                       {"tail_type", v.type.tail}});
  }
  json result = {{"stage", "validate"},
                 {"ok", report.ok()},
                 {"triplets", kg.triplet_count()},
                 {"violations", report.violations.size()},
                 {"details", details}};
  fs::create_directories(out);
  write_json_file(out / "validation.json", result);
  write_json_file(out / kManifestFile, make_manifest("validate", {graph}, json::object()));
  return result;
}

json run_stats(const fs::path& graph, const fs::path& out) {
  require_dir(graph);
  const KnowledgeGraph kg = import_graph(graph);
  const json result = stats_to_json(stats(kg));
  fs::create_directories(out);
  write_json_file(out / "stats.json", result);
  write_json_file(out / kManifestFile, make_manifest("stats", {graph}, json::object()));
  return result;
}

json run_eval(const fs::path& graph, const fs::path& out, const EvalOptions& options) {
  require_dir(graph);
  const KnowledgeGraph kg = import_graph(graph);
  const json result = eval_report_to_json(evaluate_graph(kg, options));
  const json config = {{"k", options.k},
                       {"ratio", options.ratio},
                       {"seed", options.seed},
                       {"backfill", options.backfill}};
  fs::create_directories(out);
  write_json_file(out / "eval.json", result);
  write_json_file(out / kManifestFile, make_manifest("eval", {graph}, config));
  return result;
}

// --- run-all ----------------------------------------------------------------

json run_all(const RunAllConfig& c, const StageOptions& stage) {
  const fs::path base = c.work / "base";
  const fs::path general = c.work / "general";
  const fs::path staged = c.work / "staged";
  const fs::path final_dir = c.work / "final";
  const fs::path reports = c.work / "reports";
  StageOptions per_stage{stage.force, std::nullopt};

  json summary = json::object();
  summary["ingest"] = run_ingest({c.metadata, c.reviews, base, c.metagraph, c.variant,
                                  c.stopwords, c.max_reviews_per_item},
                                 per_stage);
  summary["extract_general"] =
      run_extract_general({base, general, std::nullopt, c.backend}, per_stage);
  summary["extract_specific"] =
      run_extract_specific({general, staged, std::nullopt, c.backend}, per_stage);
  summary["refine"] =
      run_refine({staged, general, final_dir, c.max_subset, c.backend}, per_stage);
  summary["validate"] = run_validate(final_dir, reports / "validate");
  if (!summary["validate"]["ok"].get<bool>()) {
    throw ValidationError("final graph failed validation");
  }
  summary["stats"] = {{"base", run_stats(base, reports / "stats-base")},
                      {"final", run_stats(final_dir, reports / "stats")}};
  summary["eval"] = {{"base", run_eval(base, reports / "eval-base", c.eval)},
                     {"final", run_eval(final_dir, reports / "eval", c.eval)}};

  write_json_file(c.work / "stats.json", summary["stats"]);
  write_json_file(c.work / "eval.json", summary["eval"]);
  json config = {{"variant", to_string(c.variant)},
                 {"metagraph", opt_path(c.metagraph)},
                 {"stopwords", opt_path(c.stopwords)},
                 {"backend", c.backend.to_json()},
                 {"max_subset", c.max_subset},
                 {"k", c.eval.k},
                 {"ratio", c.eval.ratio},
                 {"seed", c.eval.seed},
                 {"backfill", c.eval.backfill}};
  write_json_file(c.work / kManifestFile,
                  make_manifest("run-all", {c.metadata, c.reviews}, config));
  return summary;
}

}  // namespace tkg
