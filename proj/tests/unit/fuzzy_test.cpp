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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <tuple>

#include "fever/corpus.hpp"
#include "fever/text.hpp"
#include "oracles.hpp"

namespace fever {
namespace {

using Terms = std::vector<std::string>;

std::u32string RandomWord(std::mt19937_64& rng, int max_len) {
  static const std::u32string kAlphabet = U"abcdeü ";
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> ch(0, kAlphabet.size() - 1);
  std::u32string s;
  for (int n = len(rng); n > 0; --n) s.push_back(kAlphabet[ch(rng)]);
  return s;
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(EditDistance("abc", "abc"), 0);
  EXPECT_EQ(EditDistance("kitten", "sitting"), 3);
  EXPECT_EQ(EditDistance("", "abc"), 3);
  EXPECT_EQ(EditDistance("abc", ""), 3);
  // Scalar values, not bytes.
  EXPECT_EQ(EditDistance("zürich", "zurich"), 1);
}

TEST(EditDistance, AgreesWithFullTable) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = RandomWord(rng, 9);
    const auto b = RandomWord(rng, 9);
    const int want = oracle::Levenshtein(a, b);
    EXPECT_EQ(EditDistance(a, b), want);
    for (int bound = 0; bound <= 3; ++bound) {
      const int bounded = BoundedEditDistance(a, b, bound);
      if (want <= bound) {
        EXPECT_EQ(bounded, want);
      } else {
        EXPECT_GT(bounded, bound);
      }
    }
  }
}

TEST(EditDistance, MetricAxioms) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto a = RandomWord(rng, 8);
    const auto b = RandomWord(rng, 8);
    const auto c = RandomWord(rng, 8);
    EXPECT_EQ(EditDistance(a, a), 0);
    EXPECT_EQ(EditDistance(a, b), EditDistance(b, a));
    EXPECT_EQ(EditDistance(a, b) == 0, a == b);
    EXPECT_LE(EditDistance(a, c), EditDistance(a, b) + EditDistance(b, c));
  }
}

TEST(TitleMatchKey, Normalizes) {
  EXPECT_EQ(TitleMatchKey("Barack_Obama"), "barack obama");
  EXPECT_EQ(TitleMatchKey("Foo_-LRB-film-RRB-"), "foo (film)");
  EXPECT_EQ(TitleMatchKey("Barack Obama"), "barack obama");
}

TEST(DistanceBudget, ShortTermsGetOne) {
  EXPECT_EQ(DistanceBudget("Bonn", 2), 1);
  EXPECT_EQ(DistanceBudget("Zürz", 2), 1);
  EXPECT_EQ(DistanceBudget("Paris", 2), 2);
  EXPECT_EQ(DistanceBudget("Bonn", 0), 0);
}

TEST(Lookup, Examples) {
  const auto dict = TitleDictionary::FromPageIds({"Barack_Obama", "Hawaii", "Bonn"});
  auto hits = dict.Lookup("Hawaii", 0);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].page_id, "Hawaii");
  EXPECT_EQ(hits[0].distance, 0);

  hits = dict.Lookup("Barak Obama", 2);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].page_id, "Barack_Obama");
  EXPECT_EQ(hits[0].distance, 1);

  EXPECT_TRUE(dict.Lookup("Barak Obama", 0).empty());
  EXPECT_TRUE(dict.Lookup("Hawaii", -1).empty());
}

TEST(Lookup, OrderedByDistanceThenKey) {
  const auto dict = TitleDictionary::FromPageIds({"Bonz", "Bonn", "Bon", "Bonne", "Born"});
  const auto hits = dict.Lookup("bonn", 1);
  std::vector<std::tuple<int, std::string>> got;
  for (const auto& h : hits) got.emplace_back(h.distance, h.key);
  EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].page_id, "Bonn");
  EXPECT_EQ(hits.size(), 5u);
}

TEST(Lookup, EqualsExhaustiveScan) {
  std::mt19937_64 rng(23);
  std::vector<std::string> ids;
  for (int i = 0; i < 600; ++i) {
    std::u32string w = RandomWord(rng, 7);
    for (auto& c : w) {
      if (c == U' ') c = U'_';
    }
    if (!w.empty()) ids.push_back(text::EncodeUtf8(w));
  }
  const auto dict = TitleDictionary::FromPageIds(ids);
  for (int q = 0; q < 60; ++q) {
    const std::string term = text::EncodeUtf8(RandomWord(rng, 7));
    const auto key = oracle::DecodeUtf8(TitleMatchKey(term));
    for (int d = 0; d <= 2; ++d) {
      std::vector<std::tuple<int, std::string, std::string>> want;
      for (const auto& id : ids) {
        const std::string k = TitleMatchKey(id);
        const int dist = oracle::Levenshtein(key, oracle::DecodeUtf8(k));
        if (dist <= d) want.emplace_back(dist, k, id);
      }
      std::sort(want.begin(), want.end());
      std::vector<std::tuple<int, std::string, std::string>> got;
      for (const auto& h : dict.Lookup(term, d)) got.emplace_back(h.distance, h.key, h.page_id);
      EXPECT_EQ(got, want) << "term '" << term << "' d=" << d;
    }
  }
}

TEST(QueryTerms, Examples) {
  EXPECT_EQ(ExtractQueryTerms("Barack Obama was born in Hawaii."),
            (Terms{"Barack Obama", "Hawaii"}));
  EXPECT_EQ(ExtractQueryTerms("the cat sat."), Terms{});
  EXPECT_EQ(ExtractQueryTerms("Statue of Liberty is in New York."),
            (Terms{"Statue of Liberty", "New York"}));
}

TEST(QueryTerms, DedupAndPurity) {
  const std::string claim = "Tesla met Tesla in New York and new york.";
  const auto terms = ExtractQueryTerms(claim);
  EXPECT_EQ(terms, ExtractQueryTerms(claim));
  std::vector<std::string> lowered;
  for (const auto& t : terms) {
    EXPECT_FALSE(t.empty());
    lowered.push_back(text::ToLower(t));
  }
  std::sort(lowered.begin(), lowered.end());
  EXPECT_EQ(std::adjacent_find(lowered.begin(), lowered.end()), lowered.end());
}

TEST(QueryTerms, PunctuationEndsSpan) {
  EXPECT_EQ(ExtractQueryTerms("Tetris, by Alexey Pajitnov, was released."),
            (Terms{"Tetris", "Alexey Pajitnov"}));
}

TEST(QueryTerms, OverrideFile) {
  const auto path = std::filesystem::temp_directory_path() / "fever_terms_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id": 4, "terms": ["Zurich", "zurich", "", "Switzerland"]})" << "\n\n"
        << R"({"id": 9, "terms": []})" << "\n";
  }
  const auto overrides = LoadQueryTermsFile(path);
  ASSERT_EQ(overrides.size(), 2u);
  EXPECT_EQ(overrides.at(4), (Terms{"Zurich", "Switzerland"}));
  EXPECT_TRUE(overrides.at(9).empty());
  {
    std::ofstream out(path);
    out << R"({"id": "x"})" << "\n";
  }
  EXPECT_THROW(LoadQueryTermsFile(path), DataError);
  std::filesystem::remove(path);
}

TEST(TitleDictionary, BuildFromCorpus) {
  const Corpus corpus = Corpus::IngestFile(FEVER_FIXTURE_DIR "/wiki-pages.jsonl");
  const auto dict = TitleDictionary::Build(corpus);
  EXPECT_EQ(dict.size(), corpus.size());
  for (const auto& e : dict.entries()) EXPECT_TRUE(corpus.Contains(e.page_id));
  const auto hits = dict.Lookup("Himalaya", 2);
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].page_id, "Himalayas");
}

}  // namespace
}  // namespace fever
