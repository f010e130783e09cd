// Copyright 2026 The fever-pipeline Authors.
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

// Edit-distance title lookup and the claim entity extractor feeding it.

#ifndef FEVER_FUZZY_HPP_
#define FEVER_FUZZY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fever/corpus.hpp"

namespace fever {

// Unit-cost Levenshtein distance over Unicode scalar values.
int EditDistance(std::string_view a, std::string_view b);
int EditDistance(std::u32string_view a, std::u32string_view b);

// Same as EditDistance when the result is <= bound; otherwise some value
// greater than bound.
int BoundedEditDistance(std::u32string_view a, std::u32string_view b, int bound);

// Lowercase, bracket tokens decoded, underscores shown as spaces.
std::string TitleMatchKey(std::string_view title);

inline constexpr int kDefaultMaxEditDistance = 2;

// Terms of at most 4 code points get a budget of 1; longer terms get
// max_distance.
int DistanceBudget(std::string_view term, int max_distance);

struct FuzzyHit {
  std::string page_id;
  std::string key;
  int distance = 0;
};

// Title keys bucketed by code point length. A lookup only visits buckets
// whose length differs from the term's by at most the distance bound, and
// runs a cut-off DP on each candidate.
class TitleDictionary {
 public:
  TitleDictionary() = default;
  static TitleDictionary Build(const Corpus& corpus);
  static TitleDictionary FromPageIds(const std::vector<std::string>& page_ids);

  // Every entry within max_distance of TitleMatchKey(term), ascending by
  // distance, then key, then page id.
  std::vector<FuzzyHit> Lookup(std::string_view term, int max_distance) const;

  std::size_t size() const { return entries_.size(); }

  struct Entry {
    std::string key;
    std::u32string key_chars;
    std::string page_id;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;  // sorted by (key, page_id)
  std::map<std::size_t, std::vector<std::size_t>> by_length_;
};

// Capitalized-span heuristic standing in for an NER model:
//   * maximal runs of tokens with an uppercase initial, which may contain
//     the lowercase function words of/the/a/an/in between capitalized
//     tokens;
//   * if the first token is capitalized and not a function word, the
//     leading span up to the first verb-like token (auxiliaries, copulas,
//     lowercase words ending in -ed).
// Spans made only of function words are dropped. Terms are de-duplicated
// case-insensitively, first occurrence kept.
std::vector<std::string> ExtractQueryTerms(std::string_view claim_text);

// Per-claim term overrides from {"id": ..., "terms": [...]} lines.
using QueryTermOverrides = std::map<std::int64_t, std::vector<std::string>>;
QueryTermOverrides LoadQueryTermsFile(const std::filesystem::path& path);

}  // namespace fever

#endif  // FEVER_FUZZY_HPP_
