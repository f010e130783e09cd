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

// Staged pipeline with content-addressed artifacts.
//
// Each stage owns <work_dir>/<stage>/ and names its artifacts by a hash of
// its inputs: upstream stage hashes, input file contents and the config
// fields it reads. A stage whose manifest and artifacts already exist is a
// cache hit. Downstream stages look up upstream artifacts by recomputing
// those hashes, so a missing one raises StageDependencyError naming the
// stage to run.

#ifndef FEVER_PIPELINE_HPP_
#define FEVER_PIPELINE_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fever/aggregation.hpp"
#include "fever/corpus.hpp"
#include "fever/gbdt.hpp"
#include "fever/selection.hpp"
#include "fever/tfidf.hpp"

namespace fever {

enum class RetrievalMode { kSeparated, kConcatenated };

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path claims;
  std::filesystem::path work_dir = "work";
  // Optional {"id", "terms"} JSONL replacing the heuristic term extractor.
  std::optional<std::filesystem::path> query_terms;
  // Trained aggregator (a tune-gbdt model). Without one, aggregate fits
  // `gbdt` on the labeled claims it is given.
  std::optional<std::filesystem::path> aggregator_model;

  RetrievalMode retrieval_mode = RetrievalMode::kSeparated;
  TfIdfConfig title_tfidf = DefaultTitleTfIdfConfig();
  TfIdfConfig body_tfidf = DefaultBodyTfIdfConfig();
  TfIdfConfig concatenated_tfidf = DefaultConcatenatedTfIdfConfig();
  int k = 10;
  bool fuzzy = true;
  int max_edit_distance = 2;

  std::string scorer = "lexical";  // or "bridge:<command>"
  ScoreMode selection_mode = ScoreMode::kTernary;
  bool reretrieval = true;
  int reretrieval_pool = 5;

  AggregationMethod aggregation = AggregationMethod::kMixed;
  GbdtConfig gbdt = DefaultGbdtConfig();
  int cv_folds = 4;

  int tfidf_tune_k = 5;
  int negatives = 10;
  std::uint64_t seed = 0;
  int threads = 1;  // never part of any artifact hash

  // Missing keys keep their defaults; unknown keys are a DataError.
  static PipelineConfig FromJson(const nlohmann::json& j);
  static PipelineConfig FromFile(const std::filesystem::path& path);
  nlohmann::ordered_json ToJson() const;
};

struct StageResult {
  std::string stage;
  std::string hash;
  bool cache_hit = false;
  std::vector<std::filesystem::path> artifacts;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  StageResult Ingest();
  StageResult Index();
  StageResult Retrieve();
  StageResult Select();
  StageResult Aggregate();
  StageResult Evaluate();
  StageResult TuneTfIdf();
  StageResult TuneGbdt();
  StageResult Ablate();
  StageResult ExportTraining();
  // ingest, index, retrieve, select, aggregate, evaluate.
  std::vector<StageResult> Run();

  const PipelineConfig& config() const { return config_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  PipelineConfig config_;
};

std::string_view RetrievalModeName(RetrievalMode mode);

}  // namespace fever

#endif  // FEVER_PIPELINE_HPP_
