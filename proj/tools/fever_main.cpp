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

// fever: staged fact-verification pipeline.
//
//   fever run --corpus wiki-pages.jsonl --claims claims.jsonl --work-dir work
//   fever ablate --config pipeline.json
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 an upstream stage
// has not been run.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "fever/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitStage = 3;

struct Overrides {
  std::string config;
  std::string work_dir;
  std::string corpus;
  std::string claims;
  std::string scorer;
  std::string query_terms;
  std::string aggregator_model;
  std::string retrieval_mode;
  std::string aggregation;
  std::string selection_mode;
  bool no_fuzzy = false;
  bool no_reretrieval = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<int> threads;
  std::optional<int> negatives;
};

fever::PipelineConfig BuildConfig(const Overrides& o) {
  const fever::PipelineConfig base =
      o.config.empty() ? fever::PipelineConfig{} : fever::PipelineConfig::FromFile(o.config);
  nlohmann::json j = base.ToJson();
  if (!o.work_dir.empty()) j["work_dir"] = o.work_dir;
  if (!o.corpus.empty()) j["corpus"] = o.corpus;
  if (!o.claims.empty()) j["claims"] = o.claims;
  if (!o.scorer.empty()) j["scorer"] = o.scorer;
  if (!o.query_terms.empty()) j["query_terms"] = o.query_terms;
  if (!o.aggregator_model.empty()) j["aggregator_model"] = o.aggregator_model;
  if (!o.retrieval_mode.empty()) j["retrieval_mode"] = o.retrieval_mode;
  if (!o.aggregation.empty()) j["aggregation"] = o.aggregation;
  if (!o.selection_mode.empty()) j["selection_mode"] = o.selection_mode;
  if (o.no_fuzzy) j["fuzzy"] = false;
  if (o.no_reretrieval) j["reretrieval"] = false;
  if (o.seed) j["seed"] = *o.seed;
  if (o.k) j["k"] = *o.k;
  if (o.threads) j["threads"] = *o.threads;
  if (o.negatives) j["negatives"] = *o.negatives;
  return fever::PipelineConfig::FromJson(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged FEVER fact-verification pipeline"};
  app.require_subcommand(1);
  Overrides o;

  app.add_option("--config", o.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--work-dir", o.work_dir, "Artifact directory");
  app.add_option("--corpus", o.corpus, "Wikipedia dump (JSONL)");
  app.add_option("--claims", o.claims, "Claims (JSONL)");
  app.add_option("--scorer", o.scorer, "lexical or bridge:<command>")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            if (s == "lexical") return {};
            if (s.rfind("bridge:", 0) == 0 && s.size() > 7) return {};
            return "expected lexical or bridge:<command>";
          },
          "SCORER"));
  app.add_option("--query-terms", o.query_terms, "Per-claim fuzzy search terms (JSONL)")
      ->check(CLI::ExistingFile);
  app.add_option("--aggregator-model", o.aggregator_model, "Trained aggregator model")
      ->check(CLI::ExistingFile);
  app.add_option("--retrieval-mode", o.retrieval_mode, "separated or concatenated")
      ->check(CLI::IsMember({"separated", "concatenated"}));
  app.add_option("--aggregation", o.aggregation, "singleton, concatenated or mixed")
      ->check(CLI::IsMember({"singleton", "concatenated", "mixed"}));
  app.add_option("--selection-mode", o.selection_mode, "binary or ternary")
      ->check(CLI::IsMember({"binary", "ternary"}));
  app.add_flag("--no-fuzzy", o.no_fuzzy, "Disable fuzzy title search");
  app.add_flag("--no-reretrieval", o.no_reretrieval, "Disable evidence re-retrieval");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--k", o.k, "Documents per claim (even)")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            int k = 0;
            const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
            const bool ok = ec == std::errc() && end == s.data() + s.size();
            return ok && k > 0 && k % 2 == 0 ? "" : "k must be even and positive";
          },
          "EVEN"));
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--negatives", o.negatives, "Negative samples per claim for export-training")
      ->check(CLI::NonNegativeNumber);

  using Stage = std::function<void(fever::Pipeline&)>;
  const std::map<std::string, std::pair<std::string, Stage>> stages = {
      {"ingest", {"Parse the corpus into the document store", [](auto& p) { p.Ingest(); }}},
      {"index", {"Build TF-IDF indices", [](auto& p) { p.Index(); }}},
      {"retrieve", {"Retrieve candidate documents", [](auto& p) { p.Retrieve(); }}},
      {"select", {"Rank and select evidence sentences", [](auto& p) { p.Select(); }}},
      {"aggregate", {"Predict claim labels", [](auto& p) { p.Aggregate(); }}},
      {"evaluate", {"Score predictions", [](auto& p) { p.Evaluate(); }}},
      {"tune-tfidf", {"Grid-search TF-IDF settings", [](auto& p) { p.TuneTfIdf(); }}},
      {"tune-gbdt", {"Cross-validate the aggregator grid", [](auto& p) { p.TuneGbdt(); }}},
      {"ablate", {"Retrieval ablation table", [](auto& p) { p.Ablate(); }}},
      {"export-training",
       {"Export sentence-selection training pairs", [](auto& p) { p.ExportTraining(); }}},
      {"run", {"ingest through evaluate", [](auto& p) { p.Run(); }}},
  };
  for (const auto& [name, entry] : stages) {
    app.add_subcommand(name, entry.first)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    fever::Pipeline pipeline(BuildConfig(o), &std::cout);
    stages.at(command).second(pipeline);
  } catch (const fever::StageDependencyError& e) {
    std::cerr << "fever " << command << ": " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "fever " << command << ": " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
