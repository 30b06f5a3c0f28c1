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

// Shared test helpers: random generators and brute-force oracles. The
// oracles restate definitions directly and do not call library code they
// are meant to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tkg/kg.hpp"

namespace tkg::testing {

// --- generators --------------------------------------------------------------

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(rng_() % static_cast<std::uint64_t>(n));
  }
  std::size_t range(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool coin(double p = 0.5) { return std::uniform_real_distribution<>(0, 1)(rng_) < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
  std::mt19937_64& engine() { return rng_; }

  /// Random label over a small alphabet so prefixes collide often. Mixes
  /// ASCII letters, digits, hyphen, space and a few multi-byte scalars.
  std::string label(std::size_t max_len = 8) {
    static const std::vector<std::string> alphabet = {
        "a", "b", "c", "e", "s", "t", "0", "1", "-", " ", "é", "ü", "ß", "日", "本", "😀"};
    const std::size_t len = range(1, max_len);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
      // Keep spaces interior so labels stay normalized.
      std::string c = pick(alphabet);
      if (c == " " && (i == 0 || i + 1 == len || out.back() == ' ')) c = "a";
      out += c;
    }
    return out;
  }

  std::vector<std::string> label_set(std::size_t n, std::size_t max_len = 8) {
    std::set<std::string> s;
    std::size_t guard = 0;
    while (s.size() < n && guard++ < n * 50) s.insert(label(max_len));
    return {s.begin(), s.end()};
  }

 private:
  std::mt19937_64 rng_;
};

// --- metagraph oracle --------------------------------------------------------

struct PlainMetagraph {
  std::set<std::pair<std::string, std::string>> entity_types;  // (name, class)
  std::set<std::string> relations;
  std::set<std::tuple<std::string, std::string, std::string>> triplets;

  bool operator==(const PlainMetagraph&) const = default;
};

inline PlainMetagraph plain(const Metagraph& m) {
  PlainMetagraph p;
  for (const auto& [name, cls] : m.entity_types()) {
    p.entity_types.emplace(name, std::string(to_string(cls)));
  }
  for (const auto& r : m.relation_types()) p.relations.insert(r);
  for (const auto& t : m.triplet_types()) p.triplets.emplace(t.head, t.relation, t.tail);
  return p;
}

inline PlainMetagraph plain_union(const PlainMetagraph& a, const PlainMetagraph& b) {
  PlainMetagraph u = a;
  u.entity_types.insert(b.entity_types.begin(), b.entity_types.end());
  u.relations.insert(b.relations.begin(), b.relations.end());
  u.triplets.insert(b.triplets.begin(), b.triplets.end());
  return u;
}

/// Random metagraph over a fixed type universe; a type's class is a function
/// of its name, so any two generated metagraphs are mergeable.
inline Metagraph random_metagraph(Gen& g) {
  static const std::vector<std::pair<std::string, EntityClass>> types = {
      {"User", EntityClass::user},       {"Item", EntityClass::item},
      {"Brand", EntityClass::side},      {"Type", EntityClass::side},
      {"Review", EntityClass::context},  {"Description", EntityClass::context},
      {"Word", EntityClass::topic},      {"Subtype", EntityClass::topic},
      {"Price", EntityClass::side}};
  static const std::vector<std::string> relations = {"purchase", "produced_by", "mention",
                                                     "tagged",   "about",       "rel_x"};
  Metagraph m;
  std::vector<std::string> declared;
  for (const auto& [name, cls] : types) {
    if (g.coin(0.6)) {
      m.add_entity_type(name, cls);
      declared.push_back(name);
    }
  }
  std::vector<std::string> rels;
  for (const auto& r : relations) {
    if (g.coin(0.5)) {
      m.add_relation_type(r);
      rels.push_back(r);
    }
  }
  if (!declared.empty() && !rels.empty()) {
    const std::size_t n = g.range(0, 6);
    for (std::size_t i = 0; i < n; ++i) {
      m.add_triplet_type({g.pick(declared), g.pick(rels), g.pick(declared)});
    }
  }
  return m;
}

// --- partition oracle --------------------------------------------------------

/// For each word w: the smallest L in 1..len(w) at which the words sharing
/// w's first L scalars number at most T gives w's subset. No such L means w
/// is a singleton (it was exhausted as a prefix). Returns the set of subsets.
inline std::set<std::set<std::string>> partition_oracle(const std::vector<std::string>& labels,
                                                        std::size_t t) {
  std::set<std::string> unique(labels.begin(), labels.end());
  std::vector<std::string> words(unique.begin(), unique.end());
  std::vector<std::u32string> cps;
  for (const auto& w : words) {
    std::u32string s;
    // Minimal UTF-8 decoder; inputs are valid.
    for (std::size_t i = 0; i < w.size();) {
      const auto c = static_cast<unsigned char>(w[i]);
      char32_t cp;
      std::size_t n;
      if (c < 0x80) {
        cp = c;
        n = 1;
      } else if (c < 0xE0) {
        cp = c & 0x1F;
        n = 2;
      } else if (c < 0xF0) {
        cp = c & 0x0F;
        n = 3;
      } else {
        cp = c & 0x07;
        n = 4;
      }
      for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(w[i + k]) & 0x3F);
      s.push_back(cp);
      i += n;
    }
    cps.push_back(std::move(s));
  }
  // Sorted code point strings so a prefix's extensions are a contiguous run.
  std::vector<std::size_t> order(words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cps[a] < cps[b]; });
  std::vector<std::u32string> sorted;
  for (auto i : order) sorted.push_back(cps[i]);

  // Strings extending `prefix` sort in [prefix, prefix with its last scalar + 1).
  auto run = [&](const std::u32string& prefix) {
    std::u32string next = prefix;
    ++next.back();
    return std::make_pair(std::lower_bound(sorted.begin(), sorted.end(), prefix),
                          std::lower_bound(sorted.begin(), sorted.end(), next));
  };

  std::set<std::set<std::string>> out;
  std::map<std::u32string, std::string> back;
  for (std::size_t i = 0; i < words.size(); ++i) back[cps[i]] = words[i];
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = cps[i];
    bool placed = false;
    for (std::size_t len = 1; len <= w.size(); ++len) {
      auto [lo, hi] = run(w.substr(0, len));
      if (static_cast<std::size_t>(hi - lo) <= t) {
        std::set<std::string> subset;
        for (auto it = lo; it != hi; ++it) subset.insert(back[*it]);
        out.insert(subset);
        placed = true;
        break;
      }
    }
    if (!placed) out.insert({words[i]});
  }
  return out;
}

// --- metrics oracle ----------------------------------------------------------

struct OracleMetrics {
  double ndcg, recall, precision, hit;
};

/// Gains per position; ideal DCG from the best possible arrangement of the
/// whole catalog (relevant items first), truncated at k.
inline OracleMetrics metrics_oracle(const std::vector<int>& ranked, const std::set<int>& relevant,
                                    std::size_t k, std::size_t catalog) {
  std::vector<double> gain;
  for (std::size_t r = 0; r < k && r < ranked.size(); ++r) {
    gain.push_back(relevant.count(ranked[r]) ? 1.0 : 0.0);
  }
  double dcg = 0;
  for (std::size_t r = 0; r < gain.size(); ++r) dcg += gain[r] / std::log2(r + 2.0);
  std::vector<double> ideal;
  for (std::size_t i = 0; i < catalog; ++i) ideal.push_back(relevant.count(static_cast<int>(i)) ? 1.0 : 0.0);
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0;
  for (std::size_t r = 0; r < k && r < ideal.size(); ++r) idcg += ideal[r] / std::log2(r + 2.0);
  double hits = 0;
  for (double x : gain) hits += x;
  return {dcg / idcg, hits / static_cast<double>(relevant.size()), hits / static_cast<double>(k),
          hits > 0 ? 1.0 : 0.0};
}

// --- filesystem --------------------------------------------------------------

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("tkg-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

#ifndef TKG_SOURCE_DIR
#define TKG_SOURCE_DIR "."
#endif

inline std::filesystem::path source_dir() { return TKG_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

}  // namespace tkg::testing
