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

#include "tkg/graph_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace tkg {

namespace fs = std::filesystem;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

namespace {

std::uint32_t parse_id(std::string_view text, const fs::path& file, std::size_t line_no) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError(file.string() + ":" + std::to_string(line_no) + ": bad id '" +
                  std::string(text) + "'");
  }
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_entities_tsv(const KnowledgeGraph& kg, std::ostream& out) {
  for (std::uint32_t i = 0; i < kg.entity_count(); ++i) {
    const auto e = kg.entity(EntityId{i});
    out << i << '\t' << e.type << '\t' << e.label << '\n';
  }
}

void write_triplets_tsv(const KnowledgeGraph& kg, std::ostream& out) {
  std::vector<Triplet> sorted(kg.triplets().begin(), kg.triplets().end());
  std::sort(sorted.begin(), sorted.end(), [&](const Triplet& a, const Triplet& b) {
    if (a.head != b.head) return a.head < b.head;
    const auto ra = kg.relation_name(a.relation);
    const auto rb = kg.relation_name(b.relation);
    if (ra != rb) return ra < rb;
    return a.tail < b.tail;
  });
  for (const auto& t : sorted) {
    out << t.head.value << '\t' << kg.relation_name(t.relation) << '\t' << t.tail.value
        << '\n';
  }
}

void export_graph(const KnowledgeGraph& kg, const fs::path& dir) {
  fs::create_directories(dir);
  save_metagraph(kg.metagraph(), dir / kMetagraphFile);
  std::ostringstream entities;
  write_entities_tsv(kg, entities);
  write_text_file_atomic(dir / kEntitiesFile, entities.str());
  std::ostringstream triplets;
  write_triplets_tsv(kg, triplets);
  write_text_file_atomic(dir / kTripletsFile, triplets.str());
}

KnowledgeGraph import_graph(const fs::path& dir) {
  KnowledgeGraph kg(load_metagraph(dir / kMetagraphFile));

  const fs::path entities_path = dir / kEntitiesFile;
  std::ifstream entities(entities_path);
  if (!entities) throw IoError("cannot read " + entities_path.string());

  std::unordered_map<std::uint32_t, EntityId> remap;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(entities, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw IoError(entities_path.string() + ":" + std::to_string(line_no) +
                    ": expected 3 tab-separated fields");
    }
    const std::uint32_t file_id = parse_id(fields[0], entities_path, line_no);
    const EntityId id = kg.register_entity(fields[2], fields[1]);
    if (!remap.emplace(file_id, id).second) {
      throw IoError(entities_path.string() + ":" + std::to_string(line_no) +
                    ": duplicate id " + std::to_string(file_id));
    }
  }

  const fs::path triplets_path = dir / kTripletsFile;
  std::ifstream triplets(triplets_path);
  if (!triplets) throw IoError("cannot read " + triplets_path.string());
  line_no = 0;
  while (std::getline(triplets, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[1].empty()) {
      throw IoError(triplets_path.string() + ":" + std::to_string(line_no) +
                    ": expected head \\t relation \\t tail");
    }
    auto lookup = [&](std::string_view text) {
      auto it = remap.find(parse_id(text, triplets_path, line_no));
      if (it == remap.end()) {
        throw IoError(triplets_path.string() + ":" + std::to_string(line_no) +
                      ": unknown entity id " + std::string(text));
      }
      return it->second;
    };
    const EntityId head = lookup(fields[0]);
    const EntityId tail = lookup(fields[2]);
    kg.insert_unchecked({head, kg.relation_id(fields[1]), tail});
  }
  return kg;
}

Metagraph load_metagraph(const fs::path& path) {
  return metagraph_from_json(read_json_file(path));
}

void save_metagraph(const Metagraph& m, const fs::path& path) {
  write_json_file(path, metagraph_to_json(m));
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text_file_atomic(const fs::path& path, const std::string& body) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << body;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& doc) {
  write_text_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace tkg
