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

#include "fever/fuzzy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numeric>
#include <tuple>
#include <unordered_set>

#include "fever/text.hpp"

namespace fever {

int EditDistance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diagonal = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

int EditDistance(std::string_view a, std::string_view b) {
  return EditDistance(text::DecodeUtf8(a), text::DecodeUtf8(b));
}

int BoundedEditDistance(std::u32string_view a, std::u32string_view b, int bound) {
  const auto len_gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (len_gap > static_cast<std::size_t>(bound)) return bound + 1;
  std::vector<int> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diagonal = row[0];
    row[0] = static_cast<int>(i);
    int row_min = row[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
      row_min = std::min(row_min, row[j]);
    }
    // Row minima never decrease, so the final distance is at least this.
    if (row_min > bound) return bound + 1;
  }
  return row[b.size()];
}

std::string TitleMatchKey(std::string_view title) {
  return text::ToLower(DisplayTitle(title));
}

int DistanceBudget(std::string_view term, int max_distance) {
  const auto length = text::DecodeUtf8(term).size();
  return length <= 4 ? std::min(1, max_distance) : max_distance;
}

TitleDictionary TitleDictionary::FromPageIds(const std::vector<std::string>& page_ids) {
  TitleDictionary dict;
  dict.entries_.reserve(page_ids.size());
  for (const auto& id : page_ids) {
    Entry e;
    e.key = TitleMatchKey(id);
    e.key_chars = text::DecodeUtf8(e.key);
    e.page_id = id;
    dict.entries_.push_back(std::move(e));
  }
  std::sort(dict.entries_.begin(), dict.entries_.end(),
            [](const Entry& x, const Entry& y) {
              return std::tie(x.key, x.page_id) < std::tie(y.key, y.page_id);
            });
  for (std::size_t i = 0; i < dict.entries_.size(); ++i) {
    dict.by_length_[dict.entries_[i].key_chars.size()].push_back(i);
  }
  return dict;
}

TitleDictionary TitleDictionary::Build(const Corpus& corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) ids.push_back(doc.page_id);
  return FromPageIds(ids);
}

std::vector<FuzzyHit> TitleDictionary::Lookup(std::string_view term,
                                              int max_distance) const {
  if (max_distance < 0) return {};
  const std::u32string query = text::DecodeUtf8(TitleMatchKey(term));
  const std::size_t lo =
      query.size() > static_cast<std::size_t>(max_distance) ? query.size() - max_distance : 0;
  const std::size_t hi = query.size() + max_distance;
  std::vector<FuzzyHit> hits;
  for (auto it = by_length_.lower_bound(lo); it != by_length_.end() && it->first <= hi;
       ++it) {
    for (std::size_t idx : it->second) {
      const Entry& e = entries_[idx];
      const int d = BoundedEditDistance(query, e.key_chars, max_distance);
      if (d <= max_distance) hits.push_back({e.page_id, e.key, d});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const FuzzyHit& x, const FuzzyHit& y) {
    return std::tie(x.distance, x.key, x.page_id) < std::tie(y.distance, y.key, y.page_id);
  });
  return hits;
}

namespace {

constexpr std::array<std::string_view, 5> kFunctionWords = {"of", "the", "a", "an",
                                                            "in"};
constexpr std::array<std::string_view, 22> kVerbLike = {
    "is",   "was",   "are",   "were", "be",    "been",   "being", "has",
    "had",  "have",  "does",  "did",  "do",    "can",    "could", "will",
    "would", "may",  "might", "should", "shall", "must"};
constexpr std::size_t kMaxLeadingSpan = 8;

struct ClaimToken {
  std::string word;
  bool boundary_before = false;
  bool boundary_after = false;
};

bool IsFunctionWord(std::string_view w) {
  const std::string lower = text::ToLower(w);
  return std::find(kFunctionWords.begin(), kFunctionWords.end(), lower) !=
         kFunctionWords.end();
}

bool IsVerbLike(std::string_view w) {
  if (text::IsUppercaseInitial(w)) return false;
  if (std::find(kVerbLike.begin(), kVerbLike.end(), w) != kVerbLike.end()) return true;
  return w.size() > 3 && w.substr(w.size() - 2) == "ed";
}

bool IsOpeningPunct(char c) { return c == '(' || c == '[' || c == '"' || c == '\''; }
bool IsClosingPunct(char c) {
  return c == ')' || c == ']' || c == '"' || c == '\'' || c == '.' || c == ',' ||
         c == ';' || c == ':' || c == '!' || c == '?';
}

std::vector<ClaimToken> SplitClaim(std::string_view claim) {
  std::vector<ClaimToken> tokens;
  std::size_t i = 0;
  while (i < claim.size()) {
    while (i < claim.size() && std::isspace(static_cast<unsigned char>(claim[i]))) ++i;
    std::size_t j = i;
    while (j < claim.size() && !std::isspace(static_cast<unsigned char>(claim[j]))) ++j;
    std::string_view raw = claim.substr(i, j - i);
    i = j;
    if (raw.empty()) continue;
    ClaimToken t;
    while (!raw.empty() && IsOpeningPunct(raw.front())) {
      t.boundary_before = true;
      raw.remove_prefix(1);
    }
    while (!raw.empty() && IsClosingPunct(raw.back())) {
      t.boundary_after = true;
      raw.remove_suffix(1);
    }
    for (std::string_view suffix : {"'s", "’s"}) {
      if (raw.size() > suffix.size() && raw.ends_with(suffix)) {
        raw.remove_suffix(suffix.size());
        t.boundary_after = true;
        break;
      }
    }
    if (raw.empty()) {
      if (!tokens.empty()) tokens.back().boundary_after = true;
      continue;
    }
    t.word = std::string(raw);
    tokens.push_back(std::move(t));
  }
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    if (tokens[k].boundary_before) tokens[k - 1].boundary_after = true;
  }
  return tokens;
}

std::string JoinWords(const std::vector<ClaimToken>& tokens, std::size_t begin,
                      std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out.push_back(' ');
    out += tokens[k].word;
  }
  return out;
}

bool AllFunctionWords(const std::vector<ClaimToken>& tokens, std::size_t begin,
                      std::size_t end) {
  for (std::size_t k = begin; k < end; ++k) {
    if (!IsFunctionWord(tokens[k].word)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> ExtractQueryTerms(std::string_view claim_text) {
  const auto tokens = SplitClaim(claim_text);
  std::vector<std::pair<std::size_t, std::string>> spans;

  if (!tokens.empty() && text::IsUppercaseInitial(tokens[0].word) &&
      !IsFunctionWord(tokens[0].word)) {
    std::size_t end = 0;
    bool found_verb = false;
    while (end < tokens.size() && end < kMaxLeadingSpan) {
      if (IsVerbLike(tokens[end].word)) {
        found_verb = true;
        break;
      }
      if (tokens[end].boundary_after) {
        ++end;
        found_verb = true;
        break;
      }
      ++end;
    }
    if (found_verb && end > 0) spans.emplace_back(0, JoinWords(tokens, 0, end));
  }

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!text::IsUppercaseInitial(tokens[i].word)) {
      ++i;
      continue;
    }
    std::size_t last = i;  // last capitalized token in the span
    std::size_t k = i;
    while (!tokens[k].boundary_after && k + 1 < tokens.size()) {
      std::size_t next = k + 1;
      while (next < tokens.size() && !text::IsUppercaseInitial(tokens[next].word) &&
             IsFunctionWord(tokens[next].word) && !tokens[next].boundary_after &&
             !tokens[next].boundary_before) {
        ++next;
      }
      if (next < tokens.size() && text::IsUppercaseInitial(tokens[next].word) &&
          !tokens[next].boundary_before) {
        last = next;
        k = next;
      } else {
        break;
      }
    }
    if (!AllFunctionWords(tokens, i, last + 1)) {
      spans.emplace_back(i, JoinWords(tokens, i, last + 1));
    }
    i = last + 1;
  }

  std::stable_sort(spans.begin(), spans.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::string> terms;
  std::unordered_set<std::string> seen;
  for (auto& [start, term] : spans) {
    if (term.empty()) continue;
    if (seen.insert(text::ToLower(term)).second) terms.push_back(std::move(term));
  }
  return terms;
}

QueryTermOverrides LoadQueryTermsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open term file: " + path.string());
  QueryTermOverrides overrides;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j["id"].is_number_integer() || !j.contains("terms") || !j["terms"].is_array()) {
      throw DataError("term file line " + std::to_string(line_no) +
                      ": expected {\"id\": int, \"terms\": [...]}");
    }
    std::vector<std::string> terms;
    std::unordered_set<std::string> seen;
    for (const auto& t : j["terms"]) {
      if (!t.is_string()) continue;
      auto term = t.get<std::string>();
      if (term.empty()) continue;
      if (seen.insert(text::ToLower(term)).second) terms.push_back(std::move(term));
    }
    overrides[j["id"].get<std::int64_t>()] = std::move(terms);
  }
  return overrides;
}

}  // namespace fever
