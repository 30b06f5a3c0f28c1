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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tkg/kg.hpp"

namespace tkg {

// A graph directory holds:
//   metagraph.json  the graph's metagraph
//   entities.tsv    id \t type \t label        (id order)
//   triplets.tsv    head_id \t relation \t tail_id (sorted by head, relation, tail)
// No header rows. UTF-8. Labels never contain tabs or newlines because
// normalization collapses whitespace.
inline constexpr const char* kMetagraphFile = "metagraph.json";
inline constexpr const char* kEntitiesFile = "entities.tsv";
inline constexpr const char* kTripletsFile = "triplets.tsv";

void export_graph(const KnowledgeGraph& kg, const std::filesystem::path& dir);

/// Entities must use declared types. Triplets are loaded without the
/// metagraph check so validate_graph can report on foreign files. Ids in the
/// file are remapped if they are not dense and in order.
KnowledgeGraph import_graph(const std::filesystem::path& dir);

void write_entities_tsv(const KnowledgeGraph& kg, std::ostream& out);
void write_triplets_tsv(const KnowledgeGraph& kg, std::ostream& out);

Metagraph load_metagraph(const std::filesystem::path& path);
void save_metagraph(const Metagraph& m, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& body);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Splits one line on '\t'.
std::vector<std::string_view> split_tabs(std::string_view line);

}  // namespace tkg
