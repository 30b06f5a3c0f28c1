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
#include <string_view>
#include <unordered_set>
#include <vector>

namespace tkg {

using StopwordSet = std::unordered_set<std::string>;

/// NFC, trim, and collapse every run of Unicode whitespace to one space.
/// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string normalize_text(std::string_view text);

/// Full Unicode case folding of UTF-8 text.
std::string fold_case(std::string_view text);

/// normalize_text, then fold_case when `fold` is set.
std::string normalize_label(std::string_view text, bool fold);

std::u32string to_code_points(std::string_view utf8);
std::string from_code_points(std::u32string_view code_points);

/// Number of Unicode scalar values in `utf8`.
std::size_t code_point_length(std::string_view utf8);

/// Upper-cases the first code point of every space-separated word.
std::string title_case(std::string_view text);

/// Splits on non-alphanumeric code points, case-folds, drops tokens shorter
/// than `min_length` code points and tokens in `stopwords`. Order of first
/// occurrence is kept; duplicates are kept too.
std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords,
                                  std::size_t min_length = 3);

/// Bundled English stopword list.
const StopwordSet& default_stopwords();

/// One stopword per line; blank lines and lines starting with '#' ignored.
StopwordSet load_stopwords(const std::filesystem::path& path);

}  // namespace tkg
