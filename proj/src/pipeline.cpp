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

#include "fever/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fever/bridge.hpp"
#include "fever/evaluation.hpp"
#include "fever/fuzzy.hpp"
#include "fever/parallel.hpp"
#include "fever/retrieval.hpp"
#include "fever/stage_io.hpp"
#include "fever/text.hpp"

namespace fever {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kArtifactVersion = "1";

// ---- configuration -------------------------------------------------------

ordered_json TfIdfConfigJson(const TfIdfConfig& c) {
  return {{"lowercase", c.force_lowercase},
          {"ascii", c.force_ascii},
          {"norm", c.norm == TfIdfNorm::kL2 ? "l2" : "none"},
          {"sublinear", c.sublinear_tf},
          {"max_ngram", c.max_ngram}};
}

ordered_json GbdtConfigJson(const GbdtConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"n_estimators", c.n_estimators},
          {"max_depth", c.max_depth},
          {"l2_leaf_regularization", c.l2_leaf_regularization},
          {"seed", c.seed}};
}

void CheckKeys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  if (!j.is_object()) throw DataError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DataError("unknown key '" + key + "' in " + where);
    }
  }
}

TfIdfConfig TfIdfConfigFromJson(const nlohmann::json& j, TfIdfConfig c) {
  CheckKeys(j, {"lowercase", "ascii", "norm", "sublinear", "max_ngram"}, "TF-IDF config");
  c.force_lowercase = j.value("lowercase", c.force_lowercase);
  c.force_ascii = j.value("ascii", c.force_ascii);
  if (j.contains("norm")) {
    const auto norm = j["norm"].get<std::string>();
    if (norm == "l2") {
      c.norm = TfIdfNorm::kL2;
    } else if (norm == "none") {
      c.norm = TfIdfNorm::kNone;
    } else {
      throw DataError("TF-IDF norm must be \"l2\" or \"none\"");
    }
  }
  c.sublinear_tf = j.value("sublinear", c.sublinear_tf);
  c.max_ngram = j.value("max_ngram", c.max_ngram);
  if (c.max_ngram < 1) throw DataError("TF-IDF max_ngram must be at least 1");
  return c;
}

GbdtConfig GbdtConfigFromJson(const nlohmann::json& j, GbdtConfig c) {
  CheckKeys(j, {"learning_rate", "n_estimators", "max_depth", "l2_leaf_regularization", "seed"},
            "GBDT config");
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.n_estimators = j.value("n_estimators", c.n_estimators);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.l2_leaf_regularization = j.value("l2_leaf_regularization", c.l2_leaf_regularization);
  c.seed = j.value("seed", c.seed);
  return c;
}

// ---- hashing and artifacts ----------------------------------------------

std::string HashParts(std::initializer_list<std::string_view> parts) {
  text::Fnv1a h;
  for (auto p : parts) {
    h.Update(static_cast<std::uint64_t>(p.size()));
    h.Update(p);
  }
  return h.hex();
}

std::string HashFile(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string(what) + " not found: " + path.string());
  text::Fnv1a h;
  char buffer[1 << 16];
  std::uint64_t size = 0;
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    h.Update(std::string_view(buffer, static_cast<std::size_t>(in.gcount())));
    size += static_cast<std::uint64_t>(in.gcount());
  }
  h.Update(size);
  return h.hex();
}

void WriteFileAtomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Timer {
 public:
  double ElapsedMs() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string FormatFraction(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

std::string_view RetrievalModeName(RetrievalMode mode) {
  return mode == RetrievalMode::kSeparated ? "separated" : "concatenated";
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& j) {
  CheckKeys(j,
            {"corpus", "claims", "work_dir", "query_terms", "aggregator_model",
             "retrieval_mode", "title_tfidf", "body_tfidf", "concatenated_tfidf", "k", "fuzzy",
             "max_edit_distance", "scorer", "selection_mode", "reretrieval",
             "reretrieval_pool", "aggregation", "gbdt", "cv_folds", "tfidf_tune_k",
             "negatives", "seed", "threads"},
            "pipeline config");
  PipelineConfig c;
  try {
    if (j.contains("corpus")) c.corpus = j["corpus"].get<std::string>();
    if (j.contains("claims")) c.claims = j["claims"].get<std::string>();
    if (j.contains("work_dir")) c.work_dir = j["work_dir"].get<std::string>();
    if (j.contains("query_terms") && !j["query_terms"].is_null()) {
      c.query_terms = j["query_terms"].get<std::string>();
    }
    if (j.contains("aggregator_model") && !j["aggregator_model"].is_null()) {
      c.aggregator_model = j["aggregator_model"].get<std::string>();
    }
    if (j.contains("retrieval_mode")) {
      const auto mode = j["retrieval_mode"].get<std::string>();
      if (mode == "separated") {
        c.retrieval_mode = RetrievalMode::kSeparated;
      } else if (mode == "concatenated") {
        c.retrieval_mode = RetrievalMode::kConcatenated;
      } else {
        throw DataError("retrieval_mode must be \"separated\" or \"concatenated\"");
      }
    }
    if (j.contains("title_tfidf")) c.title_tfidf = TfIdfConfigFromJson(j["title_tfidf"], c.title_tfidf);
    if (j.contains("body_tfidf")) c.body_tfidf = TfIdfConfigFromJson(j["body_tfidf"], c.body_tfidf);
    if (j.contains("concatenated_tfidf")) {
      c.concatenated_tfidf = TfIdfConfigFromJson(j["concatenated_tfidf"], c.concatenated_tfidf);
    }
    c.k = j.value("k", c.k);
    c.fuzzy = j.value("fuzzy", c.fuzzy);
    c.max_edit_distance = j.value("max_edit_distance", c.max_edit_distance);
    c.scorer = j.value("scorer", c.scorer);
    if (j.contains("selection_mode")) {
      const auto mode = ParseScoreMode(j["selection_mode"].get<std::string>());
      if (!mode) throw DataError("selection_mode must be \"binary\" or \"ternary\"");
      c.selection_mode = *mode;
    }
    c.reretrieval = j.value("reretrieval", c.reretrieval);
    c.reretrieval_pool = j.value("reretrieval_pool", c.reretrieval_pool);
    if (j.contains("aggregation")) {
      const auto method = ParseAggregationMethod(j["aggregation"].get<std::string>());
      if (!method) throw DataError("aggregation must be singleton, concatenated or mixed");
      c.aggregation = *method;
    }
    if (j.contains("gbdt")) c.gbdt = GbdtConfigFromJson(j["gbdt"], c.gbdt);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    c.tfidf_tune_k = j.value("tfidf_tune_k", c.tfidf_tune_k);
    c.negatives = j.value("negatives", c.negatives);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad pipeline config: ") + e.what());
  }
  if (c.threads < 1) throw DataError("threads must be at least 1");
  if (c.max_edit_distance < 0) throw DataError("max_edit_distance must be non-negative");
  if (c.reretrieval_pool < 0) throw DataError("reretrieval_pool must be non-negative");
  if (c.negatives < 0) throw DataError("negatives must be non-negative");
  return c;
}

PipelineConfig PipelineConfig::FromFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config file not found: " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("config file is not valid JSON: " + path.string());
  PipelineConfig c = FromJson(j);
  const fs::path base = path.parent_path();
  auto resolve = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(c.corpus);
  resolve(c.claims);
  if (j.contains("work_dir")) resolve(c.work_dir);
  if (c.query_terms) resolve(*c.query_terms);
  if (c.aggregator_model) resolve(*c.aggregator_model);
  return c;
}

ordered_json PipelineConfig::ToJson() const {
  ordered_json j;
  j["corpus"] = corpus.string();
  j["claims"] = claims.string();
  j["work_dir"] = work_dir.string();
  j["query_terms"] = query_terms ? ordered_json(query_terms->string()) : ordered_json(nullptr);
  j["aggregator_model"] =
      aggregator_model ? ordered_json(aggregator_model->string()) : ordered_json(nullptr);
  j["retrieval_mode"] = RetrievalModeName(retrieval_mode);
  j["title_tfidf"] = TfIdfConfigJson(title_tfidf);
  j["body_tfidf"] = TfIdfConfigJson(body_tfidf);
  j["concatenated_tfidf"] = TfIdfConfigJson(concatenated_tfidf);
  j["k"] = k;
  j["fuzzy"] = fuzzy;
  j["max_edit_distance"] = max_edit_distance;
  j["scorer"] = scorer;
  j["selection_mode"] = ScoreModeName(selection_mode);
  j["reretrieval"] = reretrieval;
  j["reretrieval_pool"] = reretrieval_pool;
  j["aggregation"] = AggregationMethodName(aggregation);
  j["gbdt"] = GbdtConfigJson(gbdt);
  j["cv_folds"] = cv_folds;
  j["tfidf_tune_k"] = tfidf_tune_k;
  j["negatives"] = negatives;
  j["seed"] = seed;
  j["threads"] = threads;
  return j;
}

// ---- pipeline ------------------------------------------------------------

struct Pipeline::Impl {
  struct Indices {
    TfIdfIndex title;
    TfIdfIndex body;
    TfIdfIndex concatenated;
  };

  struct ClaimFeatures {
    std::optional<AggregationFeatures> features;
    SoftmaxTriple concat = SoftmaxTriple::Constant(1.0 / 3.0);
  };

  Impl(const PipelineConfig& c, std::ostream* l) : config(c), log(l) {}

  const PipelineConfig& config;
  std::ostream* log;
  std::map<std::string, std::string> file_hashes;
  std::unique_ptr<Corpus> corpus;
  std::optional<std::vector<ClaimRecord>> claims;
  std::unique_ptr<TitleDictionary> titles;
  std::unique_ptr<Scorer> scorer;

  void Log(const std::string& line) const {
    if (log) *log << line << '\n';
  }

  fs::path StageDir(std::string_view stage) const { return config.work_dir / stage; }

  fs::path Artifact(std::string_view stage, const std::string& hash,
                    std::string_view suffix) const {
    return StageDir(stage) / (hash + "." + std::string(suffix));
  }

  fs::path Manifest(std::string_view stage, const std::string& hash) const {
    return Artifact(stage, hash, "manifest.json");
  }

  std::string FileHash(const fs::path& path, const char* what) {
    if (path.empty()) throw DataError(std::string(what) + " path is not configured");
    auto it = file_hashes.find(path.string());
    if (it == file_hashes.end()) {
      it = file_hashes.emplace(path.string(), HashFile(path, what)).first;
    }
    return it->second;
  }

  StageResult Begin(std::string_view stage, const std::string& hash,
                    std::initializer_list<std::string_view> suffixes) const {
    StageResult r{std::string(stage), hash, false, {}};
    for (auto s : suffixes) r.artifacts.push_back(Artifact(stage, hash, s));
    r.cache_hit = fs::exists(Manifest(stage, hash)) &&
                  std::all_of(r.artifacts.begin(), r.artifacts.end(),
                              [](const fs::path& p) { return fs::exists(p); });
    if (r.cache_hit) {
      Log("[" + r.stage + "] cache hit " + hash);
    } else {
      fs::create_directories(StageDir(stage));
    }
    return r;
  }

  void Finish(const StageResult& r, const ordered_json& inputs, const Timer& timer) const {
    ordered_json manifest;
    manifest["stage"] = r.stage;
    manifest["config_hash"] = r.hash;
    manifest["inputs"] = inputs;
    ordered_json artifacts = ordered_json::array();
    for (const auto& a : r.artifacts) artifacts.push_back(a.filename().string());
    manifest["artifacts"] = std::move(artifacts);
    manifest["timings_ms"] = {{"total", timer.ElapsedMs()}};
    WriteFileAtomic(Manifest(r.stage, r.hash), manifest.dump(2) + "\n");
    for (const auto& a : r.artifacts) Log("[" + r.stage + "] wrote " + a.string());
  }

  void Require(std::string_view stage, const std::string& hash,
               std::initializer_list<std::string_view> suffixes) const {
    bool ok = fs::exists(Manifest(stage, hash));
    for (auto s : suffixes) ok = ok && fs::exists(Artifact(stage, hash, s));
    if (!ok) {
      throw StageDependencyError(
          std::string(stage), "no " + std::string(stage) + " artifact for the current inputs (" +
                                  hash + "); run the '" + std::string(stage) + "' stage first");
    }
  }

  // ---- stage hashes ----

  std::string IngestHash() {
    return HashParts({"ingest", kArtifactVersion, FileHash(config.corpus, "corpus file")});
  }

  std::string IndexHash(RetrievalMode mode) {
    std::string configs =
        mode == RetrievalMode::kSeparated
            ? TfIdfConfigJson(config.title_tfidf).dump() + TfIdfConfigJson(config.body_tfidf).dump()
            : TfIdfConfigJson(config.concatenated_tfidf).dump();
    return HashParts({"index", IngestHash(), RetrievalModeName(mode), configs});
  }

  std::string QueryTermsHash() {
    return config.query_terms ? FileHash(*config.query_terms, "query terms file") : "";
  }

  std::string ClaimsHash() { return FileHash(config.claims, "claims file"); }

  std::string RetrieveHash() {
    const std::string opts = std::to_string(config.k) + "/" + std::to_string(config.fuzzy) +
                             "/" + std::to_string(config.max_edit_distance);
    return HashParts({"retrieve", IndexHash(config.retrieval_mode), ClaimsHash(), opts,
                      QueryTermsHash()});
  }

  std::string ScorerKey() const {
    return config.scorer + "/" + std::string(ScoreModeName(config.selection_mode));
  }

  std::string SelectHash() {
    const std::string opts =
        std::to_string(config.reretrieval) + "/" + std::to_string(config.reretrieval_pool);
    return HashParts({"select", RetrieveHash(), ScorerKey(), opts});
  }

  std::string ModelKey() {
    if (config.aggregation == AggregationMethod::kConcatenated) return "argmax";
    if (config.aggregator_model) {
      return "model:" + FileHash(*config.aggregator_model, "aggregator model");
    }
    return "fit:" + GbdtConfigJson(config.gbdt).dump();
  }

  std::string AggregateHash() {
    return HashParts({"aggregate", SelectHash(), AggregationMethodName(config.aggregation),
                      ScorerKey(), ModelKey()});
  }

  std::string EvaluateHash() { return HashParts({"evaluate", AggregateHash(), ClaimsHash()}); }

  // ---- loaded inputs ----

  const Corpus& LoadCorpus() {
    if (!corpus) {
      const std::string hash = IngestHash();
      Require("ingest", hash, {"corpus"});
      corpus = std::make_unique<Corpus>(Corpus::Load(Artifact("ingest", hash, "corpus")));
    }
    return *corpus;
  }

  const std::vector<ClaimRecord>& LoadClaims() {
    if (!claims) {
      ClaimsHash();  // reports a missing file before parsing
      claims = LoadClaimsFile(config.claims);
    }
    return *claims;
  }

  const TitleDictionary& Titles() {
    if (!titles) titles = std::make_unique<TitleDictionary>(TitleDictionary::Build(LoadCorpus()));
    return *titles;
  }

  Scorer& GetScorer() {
    if (!scorer) {
      if (config.scorer == "lexical") {
        scorer = std::make_unique<LexicalScorer>(LoadCorpus(), config.selection_mode);
      } else if (auto command = BridgeCommand(config.scorer); !command.empty()) {
        scorer = std::make_unique<BridgeScorer>(command, config.selection_mode);
      } else {
        throw DataError("unknown scorer '" + config.scorer +
                        "'; expected lexical or bridge:<command>");
      }
    }
    return *scorer;
  }

  // ---- index ----

  StageResult BuildIndex(RetrievalMode mode) {
    const std::string hash = IndexHash(mode);
    const bool separated = mode == RetrievalMode::kSeparated;
    StageResult r = separated ? Begin("index", hash, {"title.tfidf", "body.tfidf"})
                              : Begin("index", hash, {"concatenated.tfidf"});
    if (r.cache_hit) return r;
    Timer timer;
    const Corpus& c = LoadCorpus();
    if (separated) {
      TfIdfIndex::Build(FieldTexts(c, IndexField::kTitle), config.title_tfidf, config.threads)
          .Save(r.artifacts[0]);
      TfIdfIndex::Build(FieldTexts(c, IndexField::kBody), config.body_tfidf, config.threads)
          .Save(r.artifacts[1]);
    } else {
      TfIdfIndex::Build(FieldTexts(c, IndexField::kConcatenated), config.concatenated_tfidf,
                        config.threads)
          .Save(r.artifacts[0]);
    }
    Finish(r, {{"ingest", IngestHash()}, {"mode", RetrievalModeName(mode)}}, timer);
    return r;
  }

  Indices LoadIndices(RetrievalMode mode, bool build_if_missing) {
    if (build_if_missing) BuildIndex(mode);
    const std::string hash = IndexHash(mode);
    Indices out;
    if (mode == RetrievalMode::kSeparated) {
      Require("index", hash, {"title.tfidf", "body.tfidf"});
      out.title = TfIdfIndex::Load(Artifact("index", hash, "title.tfidf"));
      out.body = TfIdfIndex::Load(Artifact("index", hash, "body.tfidf"));
    } else {
      Require("index", hash, {"concatenated.tfidf"});
      out.concatenated = TfIdfIndex::Load(Artifact("index", hash, "concatenated.tfidf"));
    }
    return out;
  }

  // ---- per-claim work ----

  std::vector<DocCandidateSet> RetrieveAll(const Indices& idx, RetrievalMode mode,
                                           bool use_fuzzy) {
    const auto& cl = LoadClaims();
    const TitleDictionary& dict = Titles();
    QueryTermOverrides overrides;
    if (config.query_terms) overrides = LoadQueryTermsFile(*config.query_terms);
    RetrievalOptions options;
    options.k = config.k;
    options.use_fuzzy = use_fuzzy;
    options.max_distance = config.max_edit_distance;
    std::vector<DocCandidateSet> out(cl.size());
    ParallelFor(cl.size(), config.threads, [&](std::size_t i) {
      const auto it = overrides.find(cl[i].claim_id);
      const std::vector<std::string>* terms = it == overrides.end() ? nullptr : &it->second;
      out[i] = mode == RetrievalMode::kSeparated
                   ? RetrieveDocuments(cl[i], idx.title, idx.body, dict, options, terms)
                   : RetrieveDocumentsConcatenated(cl[i], idx.concatenated, dict, options,
                                                   terms);
    });
    return out;
  }

  std::vector<SelectionResult> SelectAll(const std::vector<DocCandidateSet>& docs,
                                         bool reretrieval) {
    const auto& cl = LoadClaims();
    if (docs.size() != cl.size()) throw DataError("document sets do not match the claims");
    const Corpus& c = LoadCorpus();
    Scorer& s = GetScorer();
    SelectionOptions options;
    options.reretrieval = reretrieval;
    options.reretrieval_pool = static_cast<std::size_t>(config.reretrieval_pool);
    std::vector<SelectionResult> out(cl.size());
    ParallelFor(cl.size(), config.threads, [&](std::size_t i) {
      if (docs[i].claim_id != cl[i].claim_id) {
        throw DataError("document sets are out of order at claim " +
                        std::to_string(cl[i].claim_id));
      }
      out[i] = SelectEvidence(cl[i], docs[i], s, c, options);
    });
    return out;
  }

  std::vector<DocCandidateSet> ReadDocuments() {
    const std::string hash = RetrieveHash();
    Require("retrieve", hash, {"docs.jsonl"});
    std::ifstream in(Artifact("retrieve", hash, "docs.jsonl"));
    return ReadDocumentsJsonl(in);
  }

  std::vector<ClaimEvidence> ReadEvidence() {
    const std::string hash = SelectHash();
    Require("select", hash, {"evidence.jsonl", "reretrieved.jsonl"});
    std::ifstream in(Artifact("select", hash, "evidence.jsonl"));
    auto rows = ReadEvidenceJsonl(in);
    if (rows.size() != LoadClaims().size()) {
      throw DataError("evidence rows do not match the claims");
    }
    return rows;
  }

  ClaimFeatures FeaturesFor(const ClaimRecord& claim,
                            const std::vector<EvidenceCandidate>& evidence) {
    const Corpus& c = LoadCorpus();
    Scorer& s = GetScorer();
    std::vector<EvidenceCandidate> ranked(evidence.begin(), evidence.end());
    std::stable_sort(ranked.begin(), ranked.end(), RanksBefore);
    if (ranked.size() > static_cast<std::size_t>(kEvidenceRows)) ranked.resize(kEvidenceRows);
    std::vector<std::string> texts;
    for (const auto& e : ranked) {
      const SentenceEntry* entry = c.GetSentence(e.ref);
      if (!entry) {
        throw DataError("evidence " + e.ref.page_id + ":" + std::to_string(e.ref.line_index) +
                        " is not in the corpus");
      }
      texts.push_back(entry->text);
    }
    ClaimFeatures out;
    if (config.aggregation != AggregationMethod::kSingleton) {
      const auto rows = s.ScoreBatch(ScoreKind::kClaimConcat, claim.text, texts);
      ValidateProbabilityRows(rows, 1, kNumLabels);
      out.concat = rows.front();
    }
    if (config.aggregation != AggregationMethod::kConcatenated) {
      const auto rows = s.ScoreBatch(ScoreKind::kClaim, claim.text, texts);
      ValidateProbabilityRows(rows, texts.size(), kNumLabels);
      std::vector<ScoredEvidence> scored;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        scored.push_back({ranked[i].ref, rows[i], ranked[i].relevance});
      }
      out.features = BuildFeatures(scored, out.concat, config.aggregation);
    }
    return out;
  }

  std::vector<ClaimFeatures> AllFeatures(const std::vector<ClaimEvidence>& evidence) {
    const auto& cl = LoadClaims();
    std::vector<ClaimFeatures> out(cl.size());
    ParallelFor(cl.size(), config.threads, [&](std::size_t i) {
      if (evidence[i].claim_id != cl[i].claim_id) {
        throw DataError("evidence rows are out of order at claim " +
                        std::to_string(cl[i].claim_id));
      }
      out[i] = FeaturesFor(cl[i], evidence[i].evidence);
    });
    return out;
  }

  // Flattened features and labels of the labeled claims.
  std::pair<Eigen::MatrixXd, std::vector<Label>> TrainingMatrix(
      const std::vector<ClaimFeatures>& features) {
    const auto& cl = LoadClaims();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (cl[i].gold_label) rows.push_back(i);
    }
    if (rows.empty()) {
      throw DataError("no labeled claims to train the aggregator on; "
                      "set aggregator_model to a trained model");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                      FeatureLength(config.aggregation));
    std::vector<Label> y;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = features[rows[r]].features->Flatten().transpose();
      y.push_back(*cl[rows[r]].gold_label);
    }
    return {std::move(x), std::move(y)};
  }
};

Pipeline::Pipeline(PipelineConfig config, std::ostream* log)
    : impl_(nullptr), config_(std::move(config)) {
  impl_ = std::make_unique<Impl>(config_, log);
}

Pipeline::~Pipeline() = default;

StageResult Pipeline::Ingest() {
  const std::string hash = impl_->IngestHash();
  StageResult r = impl_->Begin("ingest", hash, {"corpus", "report.json"});
  if (r.cache_hit) return r;
  Timer timer;
  IngestReport report;
  const Corpus corpus = Corpus::IngestFile(config_.corpus, &report);
  corpus.Save(r.artifacts[0]);
  ordered_json rj = {{"records_in", report.records_in},
                     {"records_stored", report.records_stored},
                     {"records_skipped", report.records_skipped},
                     {"records_overwritten", report.records_overwritten},
                     {"errors", report.errors}};
  WriteFileAtomic(r.artifacts[1], rj.dump(2) + "\n");
  impl_->Log("[ingest] " + std::to_string(report.records_stored) + " documents stored, " +
             std::to_string(report.records_skipped) + " skipped, " +
             std::to_string(report.records_overwritten) + " overwritten");
  impl_->Finish(r, {{"corpus", impl_->FileHash(config_.corpus, "corpus file")}}, timer);
  return r;
}

StageResult Pipeline::Index() { return impl_->BuildIndex(config_.retrieval_mode); }

StageResult Pipeline::Retrieve() {
  const std::string hash = impl_->RetrieveHash();
  StageResult r = impl_->Begin("retrieve", hash, {"docs.jsonl"});
  if (r.cache_hit) return r;
  Timer timer;
  const auto indices = impl_->LoadIndices(config_.retrieval_mode, false);
  const auto docs = impl_->RetrieveAll(indices, config_.retrieval_mode, config_.fuzzy);
  std::ostringstream out;
  WriteDocumentsJsonl(docs, out);
  WriteFileAtomic(r.artifacts[0], out.str());
  impl_->Finish(r,
                {{"index", impl_->IndexHash(config_.retrieval_mode)},
                 {"claims", impl_->ClaimsHash()},
                 {"query_terms", impl_->QueryTermsHash()}},
                timer);
  return r;
}

StageResult Pipeline::Select() {
  const std::string hash = impl_->SelectHash();
  StageResult r = impl_->Begin("select", hash, {"evidence.jsonl", "reretrieved.jsonl"});
  if (r.cache_hit) return r;
  Timer timer;
  const auto docs = impl_->ReadDocuments();
  const auto results = impl_->SelectAll(docs, config_.reretrieval);
  std::vector<ClaimEvidence> evidence;
  std::vector<ClaimReretrieval> reretrieved;
  for (std::size_t i = 0; i < results.size(); ++i) {
    evidence.push_back({docs[i].claim_id, results[i].top});
    reretrieved.push_back({docs[i].claim_id, results[i].reretrieved_documents});
  }
  std::ostringstream ev, rr;
  WriteEvidenceJsonl(evidence, ev);
  WriteReretrievalJsonl(reretrieved, rr);
  WriteFileAtomic(r.artifacts[0], ev.str());
  WriteFileAtomic(r.artifacts[1], rr.str());
  impl_->Finish(r, {{"retrieve", impl_->RetrieveHash()}, {"scorer", impl_->ScorerKey()}},
                timer);
  return r;
}

StageResult Pipeline::Aggregate() {
  const std::string hash = impl_->AggregateHash();
  const bool learned = config_.aggregation != AggregationMethod::kConcatenated;
  StageResult r = learned ? impl_->Begin("aggregate", hash, {"predictions.jsonl", "model.json"})
                          : impl_->Begin("aggregate", hash, {"predictions.jsonl"});
  if (r.cache_hit) return r;
  Timer timer;
  const auto evidence = impl_->ReadEvidence();
  const auto& claims = impl_->LoadClaims();
  const auto features = impl_->AllFeatures(evidence);

  GbdtModel model;
  if (learned) {
    if (config_.aggregator_model) {
      model = GbdtModel::FromJson(ReadFile(*config_.aggregator_model));
    } else {
      const auto [x, labels] = impl_->TrainingMatrix(features);
      std::vector<int> y(labels.size());
      std::transform(labels.begin(), labels.end(), y.begin(),
                     [](Label l) { return static_cast<int>(l); });
      model = FitGbdt(x, y, kNumLabels, config_.gbdt);
    }
    WriteFileAtomic(r.artifacts[1], model.ToJson() + "\n");
  }

  std::vector<ClaimVerdict> verdicts(claims.size());
  for (std::size_t i = 0; i < claims.size(); ++i) {
    ClaimVerdict& v = verdicts[i];
    v.claim_id = claims[i].claim_id;
    v.method = config_.aggregation;
    for (const auto& e : evidence[i].evidence) v.evidence.push_back(e.ref);
    v.evidence = DedupAndTruncate(v.evidence, kMaxScoredEvidence);
    v.label = learned ? fever::Aggregate(*features[i].features, model)
                      : AggregateConcatenated(features[i].concat);
  }
  std::ostringstream out;
  WritePredictionsJsonl(verdicts, out);
  WriteFileAtomic(r.artifacts[0], out.str());
  impl_->Finish(r, {{"select", impl_->SelectHash()}, {"model", impl_->ModelKey()}}, timer);
  return r;
}

StageResult Pipeline::Evaluate() {
  const std::string hash = impl_->EvaluateHash();
  StageResult r = impl_->Begin("evaluate", hash, {"report.json", "report.txt"});
  if (r.cache_hit) {
    impl_->Log(ReadFile(r.artifacts[1]));
    return r;
  }
  Timer timer;
  const std::string aggregate_hash = impl_->AggregateHash();
  impl_->Require("aggregate", aggregate_hash, {"predictions.jsonl"});
  std::ifstream pin(impl_->Artifact("aggregate", aggregate_hash, "predictions.jsonl"));
  const auto predictions = ReadPredictionsJsonl(pin);

  RetrievedDocuments retrieved;
  for (const auto& set : impl_->ReadDocuments()) retrieved[set.claim_id] = set.PageIds();
  const std::string select_hash = impl_->SelectHash();
  impl_->Require("select", select_hash, {"reretrieved.jsonl"});
  std::ifstream rin(impl_->Artifact("select", select_hash, "reretrieved.jsonl"));
  for (const auto& row : ReadReretrievalJsonl(rin)) {
    auto& pages = retrieved[row.claim_id];
    for (const auto& d : row.docs) pages.push_back(d.page_id);
  }

  const MetricReport report = fever::Evaluate(predictions, impl_->LoadClaims(), &retrieved);
  WriteFileAtomic(r.artifacts[0], report.ToJson() + "\n");
  WriteFileAtomic(r.artifacts[1], report.ToTable());
  impl_->Log(report.ToTable());
  impl_->Finish(r, {{"aggregate", aggregate_hash}, {"claims", impl_->ClaimsHash()}}, timer);
  return r;
}

StageResult Pipeline::TuneTfIdf() {
  const std::string hash = HashParts(
      {"tune-tfidf", impl_->IngestHash(), impl_->ClaimsHash(),
       RetrievalModeName(config_.retrieval_mode), std::to_string(config_.tfidf_tune_k)});
  const bool separated = config_.retrieval_mode == RetrievalMode::kSeparated;
  StageResult r = separated
                      ? impl_->Begin("tune-tfidf", hash, {"title.csv", "body.csv", "best.json"})
                      : impl_->Begin("tune-tfidf", hash, {"concatenated.csv", "best.json"});
  if (r.cache_hit) {
    impl_->Log(ReadFile(r.artifacts.back()));
    return r;
  }
  Timer timer;
  const Corpus& corpus = impl_->LoadCorpus();
  const auto& claims = impl_->LoadClaims();
  const auto grid = TfIdfGrid();
  const std::vector<IndexField> fields =
      separated ? std::vector<IndexField>{IndexField::kTitle, IndexField::kBody}
                : std::vector<IndexField>{IndexField::kConcatenated};
  ordered_json best;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto report = GridSearchTfIdf(corpus, claims, grid, fields[f], config_.tfidf_tune_k,
                                        config_.threads);
    WriteFileAtomic(r.artifacts[f], report.ToCsv());
    best[std::string(IndexFieldName(fields[f]))] = {
        {"config", TfIdfConfigJson(report.best_config())},
        {"recall", report.rows[report.best].recall},
        {"claims_evaluated", report.claims_evaluated}};
  }
  WriteFileAtomic(r.artifacts.back(), best.dump(2) + "\n");
  impl_->Log(best.dump(2));
  impl_->Finish(r, {{"ingest", impl_->IngestHash()}, {"claims", impl_->ClaimsHash()}}, timer);
  return r;
}

StageResult Pipeline::TuneGbdt() {
  if (config_.aggregation == AggregationMethod::kConcatenated) {
    throw DataError("tune-gbdt needs singleton or mixed aggregation");
  }
  const std::string hash = HashParts(
      {"tune-gbdt", impl_->SelectHash(), AggregationMethodName(config_.aggregation),
       impl_->ScorerKey(),
       std::to_string(config_.cv_folds) + "/" + std::to_string(config_.seed) + "/" +
           std::to_string(config_.gbdt.l2_leaf_regularization)});
  StageResult r = impl_->Begin("tune-gbdt", hash, {"cv.csv", "model.json"});
  if (r.cache_hit) return r;
  Timer timer;
  const auto evidence = impl_->ReadEvidence();
  const auto features = impl_->AllFeatures(evidence);
  const auto [x, labels] = impl_->TrainingMatrix(features);
  const auto grid = GbdtGrid(config_.gbdt.l2_leaf_regularization, config_.seed);
  const auto trained =
      TrainAggregator(x, labels, grid, config_.cv_folds, config_.seed, config_.threads);
  WriteFileAtomic(r.artifacts[0], trained.report.ToCsv());
  WriteFileAtomic(r.artifacts[1], trained.model.ToJson() + "\n");
  const auto& best = trained.report.rows[trained.report.best];
  impl_->Log("[tune-gbdt] " + std::to_string(grid.size()) + " configs, " +
             std::to_string(config_.cv_folds) + " folds" +
             (trained.report.stratified ? "" : " (unstratified)") + "; best " +
             best.config.ToString() + " mean accuracy " + FormatFraction(best.mean_accuracy));
  impl_->Finish(r, {{"select", impl_->SelectHash()}}, timer);
  return r;
}

StageResult Pipeline::Ablate() {
  const std::string settings =
      std::to_string(config_.k) + "/" + std::to_string(config_.max_edit_distance) + "/" +
      std::to_string(config_.reretrieval_pool);
  const std::string hash = HashParts(
      {"ablate", impl_->IndexHash(RetrievalMode::kSeparated),
       impl_->IndexHash(RetrievalMode::kConcatenated), impl_->ClaimsHash(),
       impl_->QueryTermsHash(), impl_->ScorerKey(), settings});
  StageResult r = impl_->Begin("ablate", hash, {"json", "txt"});
  if (r.cache_hit) {
    impl_->Log(ReadFile(r.artifacts[1]));
    return r;
  }
  Timer timer;
  const auto& claims = impl_->LoadClaims();
  ordered_json rows = ordered_json::array();
  std::ostringstream table;
  table << std::left << std::setw(32) << "Retrieval" << std::right << std::setw(10)
        << "Recall@5" << std::setw(10) << "OFEVER" << '\n';
  for (RetrievalMode mode : {RetrievalMode::kConcatenated, RetrievalMode::kSeparated}) {
    const auto indices = impl_->LoadIndices(mode, true);
    struct Variant {
      const char* name;
      const char* label;
      bool fuzzy;
      bool reretrieval;
    };
    const std::string base_label = "TF-IDF (" + std::string(RetrievalModeName(mode)) + ")";
    for (const Variant& v : {Variant{"base", "", false, false},
                             Variant{"fuzzy", "  + fuzzy string search", true, false},
                             Variant{"reretrieval", "  + document re-retrieval", true, true}}) {
      const auto docs = impl_->RetrieveAll(indices, mode, v.fuzzy);
      const auto selected = impl_->SelectAll(docs, v.reretrieval);
      std::vector<ClaimVerdict> verdicts(claims.size());
      RetrievedDocuments retrieved;
      for (std::size_t i = 0; i < claims.size(); ++i) {
        verdicts[i].claim_id = claims[i].claim_id;
        for (const auto& e : selected[i].top) verdicts[i].evidence.push_back(e.ref);
        auto& pages = retrieved[claims[i].claim_id];
        pages = docs[i].PageIds();
        for (const auto& d : selected[i].reretrieved_documents) pages.push_back(d.page_id);
      }
      const double recall = RecallAtK(verdicts, claims, kMaxScoredEvidence);
      const double ofever = Ofever(retrieved, claims);
      rows.push_back({{"tfidf", RetrievalModeName(mode)},
                      {"variant", v.name},
                      {"recall_at_5", recall},
                      {"ofever", ofever}});
      table << std::left << std::setw(32) << (*v.label ? std::string(v.label) : base_label)
            << std::right << std::setw(10) << FormatFraction(recall) << std::setw(10)
            << FormatFraction(ofever) << '\n';
    }
  }
  WriteFileAtomic(r.artifacts[0], ordered_json{{"rows", rows}}.dump(2) + "\n");
  WriteFileAtomic(r.artifacts[1], table.str());
  impl_->Log(table.str());
  impl_->Finish(r, {{"claims", impl_->ClaimsHash()}, {"scorer", impl_->ScorerKey()}}, timer);
  return r;
}

StageResult Pipeline::ExportTraining() {
  const std::string hash = HashParts(
      {"export-training", impl_->RetrieveHash(),
       std::to_string(config_.negatives) + "/" + std::to_string(config_.seed),
       ScoreModeName(config_.selection_mode)});
  StageResult r = impl_->Begin("export-training", hash, {"jsonl", "report.json"});
  if (r.cache_hit) return r;
  Timer timer;
  std::map<std::int64_t, DocCandidateSet> docs;
  for (auto& set : impl_->ReadDocuments()) docs.emplace(set.claim_id, std::move(set));
  TrainingExportReport report;
  const auto examples =
      ExportTrainingData(impl_->LoadClaims(), impl_->LoadCorpus(), docs, config_.negatives,
                         config_.selection_mode, config_.seed, &report);
  std::ostringstream out;
  WriteTrainingJsonl(examples, out);
  WriteFileAtomic(r.artifacts[0], out.str());
  ordered_json rj = {{"claims", report.claims},
                     {"positives", report.positives},
                     {"negatives", report.negatives},
                     {"short_of_negatives", report.short_of_negatives},
                     {"unresolved_gold", report.unresolved_gold}};
  WriteFileAtomic(r.artifacts[1], rj.dump(2) + "\n");
  impl_->Log("[export-training] " + std::to_string(report.positives) + " positives, " +
             std::to_string(report.negatives) + " negatives");
  impl_->Finish(r, {{"retrieve", impl_->RetrieveHash()}}, timer);
  return r;
}

std::vector<StageResult> Pipeline::Run() {
  return {Ingest(), Index(), Retrieve(), Select(), Aggregate(), Evaluate()};
}

}  // namespace fever
