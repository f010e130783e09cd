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

// Stand-in scorer speaking the bridge protocol on stdin/stdout.
//
// Probabilities are a fixed function of each sentence's bytes. Flags:
//   --binary         sentence rows are [p_irrelevant, p_relevant]
//   --reverse        answer whatever is queued in reverse arrival order
//   --bad-sum        rows sum to 1.2
//   --short          one row fewer than asked for
//   --fail-kind K    reply with an error to every request of kind K
//   --exit-after N   exit without answering the N+1th request

#include <poll.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Options {
  bool binary = false;
  bool reverse = false;
  bool bad_sum = false;
  bool short_rows = false;
  std::string fail_kind;
  long exit_after = -1;
};

double Hash01(const std::string& s) {
  unsigned h = 0;
  for (unsigned char c : s) h = h * 31 + c;
  return static_cast<double>(h % 1001) / 1000.0;
}

std::vector<double> Row(const std::string& text, bool binary, bool bad_sum) {
  const double h = Hash01(text);
  std::vector<double> row =
      binary ? std::vector<double>{1.0 - h, h}
             : std::vector<double>{0.2 * h, 0.5 * (1.0 - h), 1.0 - 0.2 * h - 0.5 * (1.0 - h)};
  if (bad_sum) row.back() += 0.2;
  return row;
}

nlohmann::json Answer(const std::string& line, const Options& o) {
  auto request = nlohmann::json::parse(line, nullptr, false);
  if (request.is_discarded() || !request.is_object()) {
    return {{"id", nullptr}, {"error", "malformed request"}};
  }
  const auto id = request.value("id", nlohmann::json());
  const std::string kind = request.value("kind", "");
  if (kind == o.fail_kind) return {{"id", id}, {"error", "refusing kind " + kind}};
  const std::string claim = request.value("claim", "");
  std::vector<std::string> sentences;
  if (request.contains("sentences") && request["sentences"].is_array()) {
    for (const auto& s : request["sentences"]) sentences.push_back(s.get<std::string>());
  }
  if (kind == "terms") {
    std::vector<std::string> terms;
    std::string word;
    for (char c : claim + " ") {
      if (c == ' ' || c == '.') {
        if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0]))) {
          terms.push_back(word);
        }
        word.clear();
      } else {
        word.push_back(c);
      }
    }
    return {{"id", id}, {"terms", terms}};
  }
  nlohmann::json probs = nlohmann::json::array();
  if (kind == "claim_concat") {
    std::string joined;
    for (const auto& s : sentences) joined += s + " ";
    probs.push_back(Row(joined, false, o.bad_sum));
  } else if (kind == "sentence" || kind == "claim") {
    for (const auto& s : sentences) {
      probs.push_back(Row(s, kind == "sentence" && o.binary, o.bad_sum));
    }
    if (o.short_rows && !probs.empty()) probs.erase(probs.size() - 1);
  } else {
    return {{"id", id}, {"error", "unknown kind '" + kind + "'"}};
  }
  return {{"id", id}, {"probs", probs}};
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--binary") o.binary = true;
    if (arg == "--reverse") o.reverse = true;
    if (arg == "--bad-sum") o.bad_sum = true;
    if (arg == "--short") o.short_rows = true;
    if (arg == "--fail-kind" && i + 1 < argc) o.fail_kind = argv[++i];
    if (arg == "--exit-after" && i + 1 < argc) o.exit_after = std::stol(argv[++i]);
  }
  std::ios::sync_with_stdio(false);
  std::vector<std::string> queue;
  long seen = 0;
  std::string buffer;
  char chunk[4096];
  bool eof = false;
  while (!eof || !queue.empty()) {
    // Collect everything that arrives within a short window so several
    // in-flight requests can be answered out of order.
    pollfd pfd{STDIN_FILENO, POLLIN, 0};
    const int timeout_ms = queue.empty() ? -1 : (o.reverse ? 30 : 0);
    if (!eof && ::poll(&pfd, 1, timeout_ms) > 0) {
      const ssize_t n = ::read(STDIN_FILENO, chunk, sizeof(chunk));
      if (n <= 0) {
        eof = true;
      } else {
        buffer.append(chunk, static_cast<std::size_t>(n));
        for (std::size_t nl; (nl = buffer.find('\n')) != std::string::npos;) {
          if (o.exit_after >= 0 && seen == o.exit_after) return 0;
          ++seen;
          queue.push_back(buffer.substr(0, nl));
          buffer.erase(0, nl + 1);
        }
        continue;
      }
    }
    if (o.reverse) {
      for (auto it = queue.rbegin(); it != queue.rend(); ++it) {
        std::cout << Answer(*it, o).dump() << '\n';
      }
    } else {
      for (const auto& line : queue) std::cout << Answer(line, o).dump() << '\n';
    }
    std::cout.flush();
    queue.clear();
  }
  return 0;
}
