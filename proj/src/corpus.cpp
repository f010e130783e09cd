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

#include "fever/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "fever/binary_io.hpp"

namespace fever {

namespace {

constexpr char kCorpusMagic[8] = {'F', 'V', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kCorpusVersion = 1;
constexpr std::size_t kMaxErrorsKept = 20;
// Bounds the gap-filling allocation for a corrupt index field.
constexpr int kMaxLineIndex = 1 << 20;

struct BracketToken {
  std::string_view token;
  char replacement;
};
constexpr BracketToken kBracketTokens[] = {
    {"-LRB-", '('}, {"-RRB-", ')'}, {"-COLON-", ':'}};

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string NormalizeTitle(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    bool replaced = false;
    if (raw[i] == '-') {
      for (const auto& [token, replacement] : kBracketTokens) {
        if (raw.substr(i, token.size()) == token) {
          out.push_back(replacement);
          i += token.size();
          replaced = true;
          break;
        }
      }
    }
    if (replaced) continue;
    out.push_back(raw[i] == ' ' ? '_' : raw[i]);
    ++i;
  }
  return out;
}

std::string DisplayTitle(std::string_view page_id) {
  std::string out = NormalizeTitle(page_id);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string DocumentRecord::BodyText() const {
  std::string body;
  for (const auto& s : sentences) {
    if (s.text.empty()) continue;
    if (!body.empty()) body.push_back(' ');
    body += s.text;
  }
  return body;
}

std::vector<SentenceEntry> ParseLinesField(std::string_view lines) {
  std::vector<SentenceEntry> sentences;
  std::vector<bool> seen;
  for (std::string_view line : Split(lines, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = Split(line, '\t');
    int index = -1;
    const auto idx = fields[0];
    const auto [ptr, ec] =
        std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (ec != std::errc() || ptr != idx.data() + idx.size() || index < 0 ||
        index > kMaxLineIndex) {
      throw DataError("bad sentence index field '" + std::string(idx) + "'");
    }
    if (static_cast<std::size_t>(index) >= sentences.size()) {
      const auto old = sentences.size();
      sentences.resize(index + 1);
      seen.resize(index + 1, false);
      for (auto i = old; i < sentences.size(); ++i) {
        sentences[i].line_index = static_cast<int>(i);
      }
    }
    if (seen[index]) {
      throw DataError("duplicate sentence index " + std::to_string(index));
    }
    seen[index] = true;
    SentenceEntry& entry = sentences[index];
    if (fields.size() > 1) entry.text = std::string(fields[1]);
    std::unordered_set<std::string> unique;
    for (std::size_t f = 2; f + 1 < fields.size(); f += 2) {
      std::string target = NormalizeTitle(fields[f + 1]);
      if (target.empty()) continue;
      if (unique.insert(target).second) {
        entry.hyperlinks.push_back(std::move(target));
      }
    }
  }
  return sentences;
}

void Corpus::Add(DocumentRecord doc, IngestReport* report) {
  auto [it, inserted] = by_id_.try_emplace(doc.page_id, documents_.size());
  if (inserted) {
    documents_.push_back(std::move(doc));
  } else {
    documents_[it->second] = std::move(doc);
    if (report) ++report->records_overwritten;
  }
}

Corpus Corpus::Ingest(std::istream& source, IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = IngestReport{};
  Corpus corpus;
  std::string line;
  std::uint64_t line_no = 0;
  auto skip = [&](const std::string& why) {
    ++rep.records_skipped;
    if (rep.errors.size() < kMaxErrorsKept) {
      rep.errors.push_back("line " + std::to_string(line_no) + ": " + why);
    }
  };
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++rep.records_in;
    nlohmann::json record =
        nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      skip("not a JSON object");
      continue;
    }
    const auto id = record.find("id");
    const auto lines = record.find("lines");
    if (id == record.end() || !id->is_string() || lines == record.end() ||
        !lines->is_string()) {
      skip("missing string field id/lines");
      continue;
    }
    DocumentRecord doc;
    doc.page_id = NormalizeTitle(id->get<std::string>());
    if (doc.page_id.empty()) {
      skip("empty id");
      continue;
    }
    doc.title_display = DisplayTitle(doc.page_id);
    try {
      doc.sentences = ParseLinesField(lines->get_ref<const std::string&>());
    } catch (const DataError& e) {
      skip(e.what());
      continue;
    }
    corpus.Add(std::move(doc), &rep);
  }
  rep.records_stored = corpus.size();
  return corpus;
}

Corpus Corpus::IngestFile(const std::filesystem::path& path,
                          IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path.string());
  return Ingest(in, report);
}

const DocumentRecord* Corpus::Find(std::string_view page_id) const {
  const auto it = by_id_.find(std::string(page_id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

const SentenceEntry* Corpus::GetSentence(const SentenceRef& ref) const {
  const DocumentRecord* doc = Find(ref.page_id);
  if (doc == nullptr || ref.line_index < 0 ||
      static_cast<std::size_t>(ref.line_index) >= doc->sentences.size()) {
    return nullptr;
  }
  return &doc->sentences[ref.line_index];
}

std::string Corpus::Serialize() const {
  binary::Writer w;
  w.PutBytes(std::string_view(kCorpusMagic, sizeof(kCorpusMagic)));
  w.Put<std::uint32_t>(kCorpusVersion);
  w.Put<std::uint64_t>(documents_.size());
  const std::size_t table_at = w.size();
  for (std::size_t i = 0; i < documents_.size(); ++i) w.Put<std::uint64_t>(0);
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    w.PatchU64(table_at + i * sizeof(std::uint64_t), w.size());
    const auto& doc = documents_[i];
    w.PutString(doc.page_id);
    w.PutString(doc.title_display);
    w.Put<std::uint64_t>(doc.sentences.size());
    for (const auto& s : doc.sentences) {
      w.Put<std::int32_t>(s.line_index);
      w.PutString(s.text);
      w.Put<std::uint64_t>(s.hyperlinks.size());
      for (const auto& h : s.hyperlinks) w.PutString(h);
    }
  }
  return w.bytes();
}

Corpus Corpus::Deserialize(std::string bytes) {
  binary::Reader r(std::move(bytes));
  if (r.GetBytes(sizeof(kCorpusMagic)) !=
      std::string_view(kCorpusMagic, sizeof(kCorpusMagic))) {
    throw DataError("not a corpus store file");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kCorpusVersion) {
    throw DataError("unsupported corpus store version " +
                    std::to_string(version));
  }
  const auto count = r.Get<std::uint64_t>();
  std::vector<std::uint64_t> offsets(count);
  for (auto& o : offsets) o = r.Get<std::uint64_t>();
  Corpus corpus;
  corpus.documents_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    r.Seek(offsets[i]);
    DocumentRecord doc;
    doc.page_id = r.GetString();
    doc.title_display = r.GetString();
    const auto n = r.Get<std::uint64_t>();
    doc.sentences.resize(n);
    for (auto& s : doc.sentences) {
      s.line_index = r.Get<std::int32_t>();
      s.text = r.GetString();
      s.hyperlinks.resize(r.Get<std::uint64_t>());
      for (auto& h : s.hyperlinks) h = r.GetString();
    }
    corpus.by_id_.emplace(doc.page_id, corpus.documents_.size());
    corpus.documents_.push_back(std::move(doc));
  }
  return corpus;
}

void Corpus::Save(const std::filesystem::path& path) const {
  binary::Writer w;
  w.PutBytes(Serialize());
  w.WriteFile(path);
}

Corpus Corpus::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus store: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return Deserialize(std::move(bytes));
}

namespace {

EvidenceGroup ParseGroup(const nlohmann::json& group) {
  EvidenceGroup g;
  if (!group.is_array()) throw DataError("evidence group is not an array");
  for (const auto& member : group) {
    if (!member.is_array() || member.size() != 4) {
      throw DataError("evidence member must have 4 entries");
    }
    if (member[2].is_null() || member[3].is_null()) continue;
    if (!member[2].is_string() || !member[3].is_number_integer()) {
      throw DataError("evidence member page/line have wrong types");
    }
    g.members.push_back(SentenceRef{NormalizeTitle(member[2].get<std::string>()),
                                    member[3].get<int>()});
  }
  std::sort(g.members.begin(), g.members.end());
  g.members.erase(std::unique(g.members.begin(), g.members.end()),
                  g.members.end());
  return g;
}

}  // namespace

std::vector<ClaimRecord> LoadClaims(std::istream& in) {
  std::vector<ClaimRecord> claims;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "claims line " + std::to_string(line_no) + ": ";
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(where + "not a JSON object");
    }
    if (!j.contains("id") || !j["id"].is_number_integer() ||
        !j.contains("claim") || !j["claim"].is_string()) {
      throw DataError(where + "needs integer id and string claim");
    }
    ClaimRecord c;
    c.claim_id = j["id"].get<std::int64_t>();
    c.text = j["claim"].get<std::string>();
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string()) throw DataError(where + "label not a string");
      c.gold_label = ParseLabel(j["label"].get<std::string>());
      if (!c.gold_label) throw DataError(where + "unknown label");
    }
    if (j.contains("evidence") && !j["evidence"].is_null()) {
      if (!j["evidence"].is_array()) throw DataError(where + "bad evidence");
      try {
        for (const auto& group : j["evidence"]) {
          EvidenceGroup g = ParseGroup(group);
          if (g.members.empty()) continue;
          if (std::find(c.gold_evidence.begin(), c.gold_evidence.end(), g) ==
              c.gold_evidence.end()) {
            c.gold_evidence.push_back(std::move(g));
          }
        }
      } catch (const DataError& e) {
        throw DataError(where + e.what());
      }
    }
    if (c.gold_label == Label::kNotEnoughInfo) c.gold_evidence.clear();
    claims.push_back(std::move(c));
  }
  return claims;
}

std::vector<ClaimRecord> LoadClaimsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open claims: " + path.string());
  return LoadClaims(in);
}

}  // namespace fever
