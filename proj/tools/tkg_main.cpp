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

// tkg: topic-aware knowledge graph pipeline.
//
// Settings are layered flags > environment (TKG_<OPTION>) > --config file >
// defaults. Exit codes: 2 usage, 3 I/O, 4 backend, 5 validation.

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tkg/errors.hpp"
#include "tkg/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitBackend = 4;
constexpr int kExitValidation = 5;

struct BackendFlags {
  std::string kind = "mock";
  std::string model = "gpt-4o-mini";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "TOPIC_BACKEND_API_KEY";
  std::string cache_dir;
  std::string prompt_dir;
  std::size_t parallelism = 4;
  std::size_t max_words = 10;
  int max_retries = 3;
  int timeout_ms = 60000;
  std::size_t max_in_flight = 8;

  tkg::BackendSettings settings() const {
    tkg::BackendSettings s;
    s.kind = kind;
    s.parallelism = parallelism;
    s.max_words = max_words;
    s.http.model = model;
    s.http.endpoint = endpoint;
    s.http.api_key_env = api_key_env;
    s.http.max_retries = max_retries;
    s.http.timeout = std::chrono::milliseconds(timeout_ms);
    s.http.max_in_flight = max_in_flight;
    if (!cache_dir.empty()) s.http.cache_dir = cache_dir;
    if (!prompt_dir.empty()) s.http.prompt_dir = prompt_dir;
    return s;
  }
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
  cmd->add_option("--backend", f.kind, "Topic backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--model", f.model, "Model name for the http backend")->capture_default_str();
  cmd->add_option("--endpoint", f.endpoint, "Chat-completions URL")->capture_default_str();
  cmd->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  cmd->add_option("--cache-dir", f.cache_dir, "Response cache directory");
  cmd->add_option("--prompt-dir", f.prompt_dir, "Directory with prompt template overrides");
  cmd->add_option("--parallelism", f.parallelism, "Concurrent backend workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-words", f.max_words, "Specific topics per document")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-retries", f.max_retries, "HTTP retries")->capture_default_str();
  cmd->add_option("--timeout-ms", f.timeout_ms, "HTTP timeout")->capture_default_str();
  cmd->add_option("--max-in-flight", f.max_in_flight, "Outstanding HTTP requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

struct StageFlags {
  bool force = false;
  std::string checkpoint;

  tkg::StageOptions options() const {
    tkg::StageOptions s;
    s.force = force;
    if (!checkpoint.empty()) s.checkpoint = checkpoint;
    return s;
  }
};

void add_stage_flags(CLI::App* cmd, StageFlags& f, bool with_checkpoint) {
  cmd->add_flag("--force", f.force, "Rerun even if the output manifest matches");
  if (with_checkpoint) {
    cmd->add_option("--checkpoint", f.checkpoint, "Progress file (default <out>/checkpoint.jsonl)");
  }
}

struct IngestFlags {
  std::string metadata, reviews, out, metagraph, stopwords, variant = "base";
  std::size_t max_reviews_per_item = 0;
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& f, bool with_out) {
  cmd->add_option("--metadata", f.metadata, "Item metadata JSONL")->required();
  cmd->add_option("--reviews", f.reviews, "Review JSONL")->required();
  if (with_out) cmd->add_option("--out", f.out, "Output graph directory")->required();
  cmd->add_option("--metagraph", f.metagraph, "Standardized metagraph JSON");
  cmd->add_option("--variant", f.variant, "Graph variant")
      ->check(CLI::IsMember({"base", "large"}))
      ->capture_default_str();
  cmd->add_option("--stopwords", f.stopwords, "Stopword list, one per line");
  cmd->add_option("--max-reviews-per-item", f.max_reviews_per_item, "0 keeps all reviews");
}

tkg::IngestConfig ingest_config(const IngestFlags& f) {
  tkg::IngestConfig c;
  c.metadata = f.metadata;
  c.reviews = f.reviews;
  c.out = f.out;
  if (!f.metagraph.empty()) c.metagraph = f.metagraph;
  if (!f.stopwords.empty()) c.stopwords = f.stopwords;
  c.variant = tkg::parse_variant(f.variant);
  if (f.max_reviews_per_item > 0) c.max_reviews_per_item = f.max_reviews_per_item;
  return c;
}

struct EvalFlags {
  std::size_t k = 10;
  double ratio = 0.8;
  std::uint64_t seed = 7;
  bool backfill = false;

  tkg::EvalOptions options() const { return {k, ratio, seed, backfill}; }
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--k", f.k, "Cut-off")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--ratio", f.ratio, "Train fraction per user")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Split seed")->capture_default_str();
  cmd->add_flag("--backfill", f.backfill, "Pad short lists by popularity");
}

std::string env_name(const std::string& long_name) {
  std::string out = "TKG_";
  for (char c : long_name) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

bool truthy(const std::string& v) {
  return v == "1" || v == "true" || v == "TRUE" || v == "yes" || v == "on";
}

// Environment values are spliced in right after the subcommand name, so
// anything on the real command line (parsed later, last value wins) beats
// them, and they in turn beat the config file, which CLI11 only consults
// for options that are still unset.
std::vector<std::string> with_environment(CLI::App& app, std::vector<std::string> args) {
  std::size_t pos = 0;
  CLI::App* sub = nullptr;
  for (; pos < args.size(); ++pos) {
    if (args[pos].rfind("-", 0) == 0) continue;
    sub = app.get_subcommand_no_throw(args[pos]);
    if (sub) break;
  }
  if (!sub) return args;
  std::vector<std::string> injected;
  for (const CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help") continue;
    const char* value = std::getenv(env_name(names.front()).c_str());
    if (!value) continue;
    if (opt->get_type_size() == 0) {
      if (truthy(value)) injected.push_back("--" + names.front());
    } else {
      injected.push_back("--" + names.front() + "=" + value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, injected.begin(),
              injected.end());
  return args;
}

int fail(int code, std::string_view kind, std::string_view message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tkg: topic-aware knowledge graph construction and evaluation", "tkg"};
  app.set_version_flag("--version", tkg::kVersion);
  app.set_config("--config", "", "TOML config file; [subcommand] sections hold its options");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.failure_message(CLI::FailureMessage::help);

  int exit_code = 0;

  // ingest
  IngestFlags ingest;
  StageFlags ingest_stage;
  auto* cmd_ingest = app.add_subcommand("ingest", "Build the base graph from raw JSONL");
  add_ingest_flags(cmd_ingest, ingest, true);
  add_stage_flags(cmd_ingest, ingest_stage, false);

  // extract-general
  std::string eg_graph, eg_out, eg_context;
  BackendFlags eg_backend;
  StageFlags eg_stage;
  auto* cmd_eg = app.add_subcommand("extract-general", "Add Subtype topics per Type leaf");
  cmd_eg->add_option("--in,--graph", eg_graph, "Base graph directory")->required();
  cmd_eg->add_option("--out", eg_out, "Output graph directory")->required();
  cmd_eg->add_option("--context", eg_context, "Context store (default <graph>/context.jsonl)");
  add_backend_flags(cmd_eg, eg_backend);
  add_stage_flags(cmd_eg, eg_stage, true);

  // extract-specific
  std::string es_graph, es_out, es_context;
  BackendFlags es_backend;
  StageFlags es_stage;
  auto* cmd_es = app.add_subcommand("extract-specific", "Stage candidate Word topics");
  cmd_es->add_option("--in,--graph", es_graph, "Graph directory")->required();
  cmd_es->add_option("--out", es_out, "Staged directory")->required();
  cmd_es->add_option("--context", es_context, "Context store (default <graph>/context.jsonl)");
  add_backend_flags(cmd_es, es_backend);
  add_stage_flags(cmd_es, es_stage, true);

  // refine
  std::string rf_staged, rf_graph, rf_out;
  std::size_t rf_max_subset = 50;
  BackendFlags rf_backend;
  StageFlags rf_stage;
  auto* cmd_rf = app.add_subcommand("refine", "Merge synonymous candidates into Word entities");
  cmd_rf->add_option("--staged", rf_staged, "Staged directory")->required();
  cmd_rf->add_option("--graph", rf_graph, "Graph the staged edges refer to")->required();
  cmd_rf->add_option("--out", rf_out, "Output graph directory")->required();
  cmd_rf->add_option("--max-subset", rf_max_subset, "Largest prefix subset")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_backend_flags(cmd_rf, rf_backend);
  add_stage_flags(cmd_rf, rf_stage, true);

  // validate / stats / eval
  std::string va_graph, va_out, st_graph, st_out, ev_graph, ev_out;
  auto* cmd_va = app.add_subcommand("validate", "Report triplets outside the metagraph");
  cmd_va->add_option("--graph", va_graph, "Graph directory")->required();
  cmd_va->add_option("--out", va_out, "Report directory (default <graph>/validate)");
  auto* cmd_st = app.add_subcommand("stats", "Entity and relation counts");
  cmd_st->add_option("--graph", st_graph, "Graph directory")->required();
  cmd_st->add_option("--out", st_out, "Report directory (default <graph>/stats)");
  EvalFlags ev;
  auto* cmd_ev = app.add_subcommand("eval", "Top-k metrics of the path baseline");
  cmd_ev->add_option("--graph", ev_graph, "Graph directory")->required();
  cmd_ev->add_option("--out", ev_out, "Report directory (default <graph>/eval)");
  add_eval_flags(cmd_ev, ev);

  // run-all
  IngestFlags ra_ingest;
  BackendFlags ra_backend;
  EvalFlags ra_eval;
  StageFlags ra_stage;
  std::string ra_work;
  std::size_t ra_max_subset = 50;
  auto* cmd_ra = app.add_subcommand("run-all", "Every stage into one work directory");
  add_ingest_flags(cmd_ra, ra_ingest, false);
  cmd_ra->add_option("--work", ra_work, "Work directory")->required();
  cmd_ra->add_option("--max-subset", ra_max_subset, "Largest prefix subset")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_backend_flags(cmd_ra, ra_backend);
  add_eval_flags(cmd_ra, ra_eval);
  add_stage_flags(cmd_ra, ra_stage, false);

  std::vector<std::string> args(argv + 1, argv + argc);
  args = with_environment(app, std::move(args));
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto stage_parallelism = [](const BackendFlags& b) {
    omp_set_num_threads(static_cast<int>(b.parallelism));
  };
  auto or_default = [](const std::string& v, const fs::path& fallback) {
    return v.empty() ? fallback : fs::path(v);
  };

  try {
    if (cmd_ingest->parsed()) {
      emit(tkg::run_ingest(ingest_config(ingest), ingest_stage.options()));
    } else if (cmd_eg->parsed()) {
      stage_parallelism(eg_backend);
      tkg::ExtractGeneralConfig c{eg_graph, eg_out, std::nullopt, eg_backend.settings()};
      if (!eg_context.empty()) c.context = eg_context;
      emit(tkg::run_extract_general(c, eg_stage.options()));
    } else if (cmd_es->parsed()) {
      stage_parallelism(es_backend);
      tkg::ExtractSpecificConfig c{es_graph, es_out, std::nullopt, es_backend.settings()};
      if (!es_context.empty()) c.context = es_context;
      emit(tkg::run_extract_specific(c, es_stage.options()));
    } else if (cmd_rf->parsed()) {
      stage_parallelism(rf_backend);
      emit(tkg::run_refine({rf_staged, rf_graph, rf_out, rf_max_subset, rf_backend.settings()},
                           rf_stage.options()));
    } else if (cmd_va->parsed()) {
      const json report = tkg::run_validate(va_graph, or_default(va_out, fs::path(va_graph) / "validate"));
      emit(report);
      if (!report["ok"].get<bool>()) exit_code = kExitValidation;
    } else if (cmd_st->parsed()) {
      emit(tkg::run_stats(st_graph, or_default(st_out, fs::path(st_graph) / "stats")));
    } else if (cmd_ev->parsed()) {
      emit(tkg::run_eval(ev_graph, or_default(ev_out, fs::path(ev_graph) / "eval"), ev.options()));
    } else if (cmd_ra->parsed()) {
      stage_parallelism(ra_backend);
      tkg::RunAllConfig c;
      const tkg::IngestConfig ic = ingest_config(ra_ingest);
      c.metadata = ic.metadata;
      c.reviews = ic.reviews;
      c.work = ra_work;
      c.metagraph = ic.metagraph;
      c.variant = ic.variant;
      c.stopwords = ic.stopwords;
      c.max_reviews_per_item = ic.max_reviews_per_item;
      c.backend = ra_backend.settings();
      c.max_subset = ra_max_subset;
      c.eval = ra_eval.options();
      emit(tkg::run_all(c, ra_stage.options()));
    }
  } catch (const tkg::InvalidArgument& e) {
    return fail(kExitUsage, "invalid_argument", e.what());
  } catch (const tkg::IoError& e) {
    return fail(kExitIo, "io", e.what());
  } catch (const tkg::BackendUnavailable& e) {
    return fail(kExitBackend, "backend_unavailable", e.what());
  } catch (const tkg::BackendError& e) {
    return fail(kExitBackend, "backend", e.what());
  } catch (const tkg::ValidationError& e) {
    return fail(kExitValidation, "validation", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(kExitIo, "io", std::string("malformed JSON input: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kExitIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
  return exit_code;
}
