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

#include "tkg/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>

#include "tkg/errors.hpp"

namespace tkg {

namespace {

icu::UnicodeString to_unicode(std::string_view text) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string to_utf8(const icu::UnicodeString& text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (error) {
    U8_APPEND_UNSAFE(buf, len, 0xFFFD);
  }
  out.append(buf, static_cast<std::size_t>(len));
}

// Calls fn(code_point) for every scalar value; ill-formed bytes become U+FFFD.
template <class Fn>
void for_each_code_point(std::string_view text, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    fn(c < 0 ? UChar32{0xFFFD} : c);
  }
}

}  // namespace

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(std::string("ICU NFC normalizer unavailable: ") +
                u_errorName(status));
  }
  const icu::UnicodeString normalized = nfc->normalize(to_unicode(text), status);
  if (U_FAILURE(status)) {
    throw InvalidArgument(std::string("NFC normalization failed: ") +
                          u_errorName(status));
  }

  std::string out;
  bool pending_space = false;
  for_each_code_point(to_utf8(normalized), [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      return;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, c);
  });
  return out;
}

std::string fold_case(std::string_view text) {
  icu::UnicodeString s = to_unicode(text);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  return to_utf8(s);
}

std::string normalize_label(std::string_view text, bool fold) {
  std::string out = normalize_text(text);
  if (fold) {
    // Folding can change NFC-ness (e.g. U+0130), so renormalize.
    out = normalize_text(fold_case(out));
  }
  return out;
}

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for_each_code_point(utf8, [&](UChar32 c) { out.push_back(static_cast<char32_t>(c)); });
  return out;
}

std::string from_code_points(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t c : code_points) {
    append_utf8(out, static_cast<UChar32>(c));
  }
  return out;
}

std::size_t code_point_length(std::string_view utf8) {
  std::size_t n = 0;
  for_each_code_point(utf8, [&](UChar32) { ++n; });
  return n;
}

std::string title_case(std::string_view text) {
  std::string out;
  bool word_start = true;
  for_each_code_point(text, [&](UChar32 c) {
    if (c == U' ') {
      word_start = true;
      out.push_back(' ');
      return;
    }
    append_utf8(out, word_start ? u_totitle(c) : c);
    word_start = false;
  });
  return out;
}

std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords,
                                  std::size_t min_length) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t current_len = 0;
  auto flush = [&] {
    if (current_len >= min_length) {
      std::string folded = fold_case(current);
      if (!stopwords.contains(folded)) {
        tokens.push_back(std::move(folded));
      }
    }
    current.clear();
    current_len = 0;
  };
  for_each_code_point(normalize_text(text), [&](UChar32 c) {
    if (u_isalnum(c)) {
      append_utf8(current, c);
      ++current_len;
    } else {
      flush();
    }
  });
  flush();
  return tokens;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "a",       "about",   "above",   "after",   "again",   "against", "all",
      "also",    "am",      "an",      "and",     "any",     "are",     "aren",
      "as",      "at",      "be",      "because", "been",    "before",  "being",
      "below",   "between", "both",    "but",     "by",      "can",     "cannot",
      "could",   "couldn",  "did",     "didn",    "do",      "does",    "doesn",
      "doing",   "don",     "down",    "during",  "each",    "even",    "ever",
      "every",   "few",     "for",     "from",    "further", "get",     "gets",
      "got",     "had",     "hadn",    "has",     "hasn",    "have",    "haven",
      "having",  "he",      "her",     "here",    "hers",    "herself", "him",
      "himself", "his",     "how",     "however", "i",       "if",      "in",
      "into",    "is",      "isn",     "it",      "its",     "itself",  "just",
      "let",     "like",    "ll",      "me",      "might",   "more",    "most",
      "much",    "must",    "mustn",   "my",      "myself",  "no",      "nor",
      "not",     "now",     "of",      "off",     "on",      "once",    "one",
      "only",    "or",      "other",   "our",     "ours",    "ourselves",
      "out",     "over",    "own",     "really",  "same",    "shall",   "she",
      "should",  "shouldn", "since",   "so",      "some",    "still",   "such",
      "than",    "that",    "the",     "their",   "theirs",  "them",    "themselves",
      "then",    "there",   "these",   "they",    "this",    "those",   "though",
      "through", "to",      "too",     "under",   "until",   "up",      "upon",
      "us",      "use",     "used",    "using",   "ve",      "very",    "was",
      "wasn",    "we",      "well",    "were",    "weren",   "what",    "when",
      "where",   "which",   "while",   "who",     "whom",    "why",     "will",
      "with",    "won",     "would",   "wouldn",  "yet",     "you",     "your",
      "yours",   "yourself", "yourselves"};
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read stopword file " + path.string());
  }
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    std::string word = normalize_label(line, true);
    if (word.empty() || word.front() == '#') continue;
    words.insert(std::move(word));
  }
  return words;
}

}  // namespace tkg
