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

// Sentence-segmented wiki dump store.
//
// Input is the wiki-pages JSONL layout: one object per line with string
// fields "id" and "lines". The lines field holds one sentence per newline;
// each sentence line is tab separated as
//
//   <index> \t <text> [\t <anchor> \t <target>]...
//
// An unpaired trailing anchor is ignored. Sentence indices are dense after
// parsing: gaps in the source are filled with empty-text entries so that
// line numbers in gold annotations stay aligned.

#ifndef FEVER_CORPUS_HPP_
#define FEVER_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fever/types.hpp"

namespace fever {

struct SentenceEntry {
  int line_index = 0;
  std::string text;
  std::vector<std::string> hyperlinks;  // normalized page ids, unique

  friend bool operator==(const SentenceEntry&, const SentenceEntry&) = default;
};

struct DocumentRecord {
  std::string page_id;
  std::string title_display;
  std::vector<SentenceEntry> sentences;

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;

  // Sentence texts joined with single spaces.
  std::string BodyText() const;
};

// Decodes -LRB-, -RRB- and -COLON- and maps spaces to underscores.
// Idempotent.
std::string NormalizeTitle(std::string_view raw);

// Display form of a page id: normalized, underscores shown as spaces.
std::string DisplayTitle(std::string_view page_id);

struct IngestReport {
  std::uint64_t records_in = 0;
  std::uint64_t records_stored = 0;
  std::uint64_t records_skipped = 0;
  std::uint64_t records_overwritten = 0;
  std::vector<std::string> errors;  // first few skip reasons, for the report
};

// Parses one record's lines field. Throws DataError if a non-empty line
// lacks a valid index or an index repeats.
std::vector<SentenceEntry> ParseLinesField(std::string_view lines);

class Corpus {
 public:
  Corpus() = default;

  // Never aborts on a bad record: it is skipped and counted instead.
  static Corpus Ingest(std::istream& source, IngestReport* report = nullptr);
  static Corpus IngestFile(const std::filesystem::path& path,
                           IngestReport* report = nullptr);

  const DocumentRecord* Find(std::string_view page_id) const;
  // nullptr for unknown pages and out-of-range lines.
  const SentenceEntry* GetSentence(const SentenceRef& ref) const;
  bool Contains(std::string_view page_id) const {
    return Find(page_id) != nullptr;
  }

  // Documents in first-ingested order.
  const std::vector<DocumentRecord>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }

  void Save(const std::filesystem::path& path) const;
  static Corpus Load(const std::filesystem::path& path);
  std::string Serialize() const;
  static Corpus Deserialize(std::string bytes);

 private:
  void Add(DocumentRecord doc, IngestReport* report);

  std::vector<DocumentRecord> documents_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Claims JSONL: {"id", "claim", "label"?, "evidence"?}. Evidence is nested
// [[annotation_id, evidence_id, page, line], ...] per group; members with a
// null page are dropped, as are groups left empty. NEI claims carry no
// evidence.
std::vector<ClaimRecord> LoadClaims(std::istream& in);
std::vector<ClaimRecord> LoadClaimsFile(const std::filesystem::path& path);

}  // namespace fever

#endif  // FEVER_CORPUS_HPP_
