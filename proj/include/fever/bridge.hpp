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

// Client side of the external scorer protocol.
//
// The scorer runs as a child process speaking line-delimited JSON on its
// standard streams. Requests are
//   {"kind": "sentence"|"claim"|"claim_concat"|"terms", "id": n,
//    "claim": "...", "sentences": [...]}
// and responses are {"id": n, "probs": [[...], ...]}, {"id": n, "terms":
// [...]} or {"id": n, "error": "..."}. Responses may arrive in any order.

#ifndef FEVER_BRIDGE_HPP_
#define FEVER_BRIDGE_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fever/selection.hpp"

namespace fever {

class BridgeProcess {
 public:
  // Runs `command` through /bin/sh. Throws DataError if it cannot start.
  explicit BridgeProcess(const std::string& command);
  ~BridgeProcess();
  BridgeProcess(const BridgeProcess&) = delete;
  BridgeProcess& operator=(const BridgeProcess&) = delete;

  // Assigns the request id and sends one line. The future throws DataError
  // if the child exits or replies with an error.
  std::future<nlohmann::json> Send(nlohmann::json request);

 private:
  void ReadLoop();
  void FailPending(const std::string& why);

  int fd_ = -1;
  int pid_ = -1;
  std::mutex mu_;
  std::int64_t next_id_ = 1;
  std::map<std::int64_t, std::promise<nlohmann::json>> pending_;
  bool closed_ = false;
  std::string close_reason_;
  std::thread reader_;
};

class BridgeScorer : public Scorer {
 public:
  BridgeScorer(const std::string& command, ScoreMode mode);

  ScoreMode mode() const override { return mode_; }
  std::vector<Eigen::VectorXd> ScoreBatch(ScoreKind kind, std::string_view claim,
                                          std::span<const std::string> sentences) override;

  // Query terms for fuzzy title search (the "terms" request kind).
  std::vector<std::string> ExtractTerms(std::string_view claim);

 private:
  ScoreMode mode_;
  BridgeProcess process_;
};

// "bridge:<command>" -> "<command>"; empty when `spec` is not a bridge spec.
std::string BridgeCommand(std::string_view spec);

}  // namespace fever

#endif  // FEVER_BRIDGE_HPP_
