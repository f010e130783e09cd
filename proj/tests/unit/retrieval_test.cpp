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

#include "fever/retrieval.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fever/corpus.hpp"

namespace fever {
namespace {

Corpus SmallCorpus() {
  std::istringstream dump(
      R"({"id": "Alpha", "lines": "0\tAlpha is a river.\tBeta\tBeta\n1\tIt floods.\tGamma\tGamma\tNowhere\tNowhere"})" "\n"
      R"({"id": "Beta", "lines": "0\tBeta is a stone river.\tGamma\tGamma"})" "\n"
      R"({"id": "Gamma", "lines": "0\tGamma is far away."})" "\n");
  return Corpus::Ingest(dump);
}

struct Indices {
  TfIdfIndex title;
  TfIdfIndex body;
  TitleDictionary titles;
};

Indices Build(const Corpus& corpus) {
  return {TfIdfIndex::Build(FieldTexts(corpus, IndexField::kTitle), DefaultTitleTfIdfConfig()),
          TfIdfIndex::Build(FieldTexts(corpus, IndexField::kBody), DefaultBodyTfIdfConfig()),
          TitleDictionary::Build(corpus)};
}

EvidenceCandidate Initial(std::string page, int line, double relevance) {
  EvidenceCandidate c;
  c.ref = {std::move(page), line};
  c.relevance = relevance;
  c.own_score = relevance;
  return c;
}

TEST(Retrieve, NoDuplicatesAndBoundedSize) {
  const Corpus corpus = SmallCorpus();
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "Alpha is a river near Beta.", std::nullopt, {}};
  const auto set = RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 10});
  std::set<std::string> pages;
  for (const auto& c : set.candidates) {
    EXPECT_TRUE(pages.insert(c.page_id).second) << c.page_id;
    EXPECT_EQ(c.sources.front(), c.source);
  }
  EXPECT_LE(set.candidates.size(), corpus.size());
  EXPECT_EQ(set.claim_id, 1);
}

TEST(Retrieve, SourceOrderIsFuzzyTitleBody) {
  const Corpus corpus = SmallCorpus();
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "Alpha floods a stone river.", std::nullopt, {}};
  const auto set = RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 4});
  auto rank = [](CandidateSource s) {
    return s == CandidateSource::kFuzzy ? 0 : s == CandidateSource::kTitleTfIdf ? 1 : 2;
  };
  for (std::size_t i = 1; i < set.candidates.size(); ++i) {
    EXPECT_LE(rank(set.candidates[i - 1].source), rank(set.candidates[i].source));
  }
  ASSERT_FALSE(set.candidates.empty());
  EXPECT_EQ(set.candidates[0].page_id, "Alpha");
  EXPECT_EQ(set.candidates[0].source, CandidateSource::kFuzzy);
  EXPECT_DOUBLE_EQ(set.candidates[0].score, 1.0);
}

TEST(Retrieve, SamePageFromBothIndicesKeepsTitleSource) {
  const Corpus corpus = SmallCorpus();
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "gamma far away", std::nullopt, {}};
  const auto set =
      RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 2, .use_fuzzy = false});
  ASSERT_EQ(set.candidates.size(), 1u);
  EXPECT_EQ(set.candidates[0].page_id, "Gamma");
  EXPECT_EQ(set.candidates[0].source, CandidateSource::kTitleTfIdf);
  EXPECT_EQ(set.candidates[0].sources,
            (std::vector<CandidateSource>{CandidateSource::kTitleTfIdf,
                                          CandidateSource::kBodyTfIdf}));
}

TEST(Retrieve, FuzzyFindsWhatTfIdfMisses) {
  const Corpus corpus = Corpus::IngestFile(FEVER_FIXTURE_DIR "/wiki-pages.jsonl");
  const Indices ix = Build(corpus);
  const ClaimRecord claim{3, "Himalaya is located between India and Tibet.", std::nullopt, {}};
  const auto without = RetrieveDocuments(claim, ix.title, ix.body, ix.titles,
                                         {.k = 4, .use_fuzzy = false});
  EXPECT_FALSE(without.Contains("Himalayas"));
  const auto with = RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 4});
  ASSERT_TRUE(with.Contains("Himalayas"));
  EXPECT_EQ(with.candidates[0].source, CandidateSource::kFuzzy);
  // Fuzzy only ever adds pages.
  for (const auto& id : without.PageIds()) EXPECT_TRUE(with.Contains(id));
}

TEST(Retrieve, EveryFuzzyHitSurvives) {
  const Corpus corpus = Corpus::IngestFile(FEVER_FIXTURE_DIR "/wiki-pages.jsonl");
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "Zurich and Bonn and Beethoven and Tetris.", std::nullopt, {}};
  const auto set = RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 2});
  for (const auto& term : ExtractQueryTerms(claim.text)) {
    for (const auto& hit : ix.titles.Lookup(term, DistanceBudget(term, 2))) {
      EXPECT_TRUE(set.Contains(hit.page_id)) << hit.page_id;
    }
  }
}

TEST(Retrieve, TermsOverrideReplacesHeuristic) {
  const Corpus corpus = SmallCorpus();
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "nothing capitalized here", std::nullopt, {}};
  const std::vector<std::string> terms = {"gama"};
  const auto set = RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 2}, &terms);
  ASSERT_TRUE(set.Contains("Gamma"));
  EXPECT_DOUBLE_EQ(set.candidates[0].score, FuzzyScore(1, 2));
}

TEST(Retrieve, OddKIsRejected) {
  const Corpus corpus = SmallCorpus();
  const Indices ix = Build(corpus);
  const ClaimRecord claim{1, "Alpha", std::nullopt, {}};
  EXPECT_THROW(RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 3}), DataError);
  EXPECT_THROW(RetrieveDocuments(claim, ix.title, ix.body, ix.titles, {.k = 0}), DataError);
}

TEST(Retrieve, ConcatenatedMode) {
  const Corpus corpus = SmallCorpus();
  const auto index = TfIdfIndex::Build(FieldTexts(corpus, IndexField::kConcatenated),
                                       DefaultConcatenatedTfIdfConfig());
  const auto titles = TitleDictionary::Build(corpus);
  const ClaimRecord claim{1, "stone river", std::nullopt, {}};
  const auto set = RetrieveDocumentsConcatenated(claim, index, titles, {.k = 2});
  ASSERT_FALSE(set.candidates.empty());
  EXPECT_EQ(set.candidates[0].page_id, "Beta");
  for (const auto& c : set.candidates) {
    EXPECT_EQ(c.source, CandidateSource::kConcatenatedTfIdf);
  }
}

TEST(FuzzyScore, DistanceZeroIsOne) {
  EXPECT_DOUBLE_EQ(FuzzyScore(0, 2), 1.0);
  EXPECT_GT(FuzzyScore(1, 2), FuzzyScore(2, 2));
  EXPECT_GT(FuzzyScore(2, 2), 0.0);
}

TEST(SourceNames, RoundTrip) {
  for (auto s : {CandidateSource::kFuzzy, CandidateSource::kTitleTfIdf,
                 CandidateSource::kBodyTfIdf, CandidateSource::kConcatenatedTfIdf,
                 CandidateSource::kReretrieved}) {
    EXPECT_EQ(ParseCandidateSource(CandidateSourceName(s)), s);
  }
  EXPECT_FALSE(ParseCandidateSource("nope").has_value());
}

TEST(Reretrieve, FollowsHyperlinks) {
  const Corpus corpus = SmallCorpus();
  const std::vector<EvidenceCandidate> initial = {Initial("Alpha", 0, 0.8)};
  const auto docs = ReretrieveDocuments(initial, corpus, {"Alpha"});
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].page_id, "Beta");
  EXPECT_EQ(docs[0].parent, (SentenceRef{"Alpha", 0}));
  EXPECT_DOUBLE_EQ(docs[0].parent_relevance, 0.8);
}

TEST(Reretrieve, NoLinksNoDocs) {
  const Corpus corpus = SmallCorpus();
  const std::vector<EvidenceCandidate> initial = {Initial("Gamma", 0, 0.9)};
  EXPECT_TRUE(ReretrieveDocuments(initial, corpus, {}).empty());
}

TEST(Reretrieve, SharedTargetKeepsBestParent) {
  const Corpus corpus = SmallCorpus();
  const std::vector<EvidenceCandidate> initial = {Initial("Alpha", 1, 0.3),
                                                  Initial("Beta", 0, 0.6)};
  const auto docs = ReretrieveDocuments(initial, corpus, {"Alpha", "Beta"});
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].page_id, "Gamma");
  EXPECT_EQ(docs[0].parent, (SentenceRef{"Beta", 0}));
  EXPECT_DOUBLE_EQ(docs[0].parent_relevance, 0.6);
}

TEST(Reretrieve, ExcludesKnownPagesAndDanglingLinks) {
  const Corpus corpus = SmallCorpus();
  const std::vector<EvidenceCandidate> initial = {Initial("Alpha", 1, 0.5)};
  // "Nowhere" is not in the corpus; Gamma is already a candidate.
  EXPECT_TRUE(ReretrieveDocuments(initial, corpus, {"Alpha", "Gamma"}).empty());
  const auto docs = ReretrieveDocuments(initial, corpus, {"Alpha"});
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].page_id, "Gamma");
}

}  // namespace
}  // namespace fever
