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

#include "fever/bridge.hpp"

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace fever {

namespace {

void WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DataError(std::string("bridge write failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

BridgeProcess::BridgeProcess(const std::string& command) {
  if (command.empty()) throw DataError("empty bridge command");
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw DataError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw DataError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  fd_ = fds[0];
  pid_ = pid;
  reader_ = std::thread([this] { ReadLoop(); });
}

BridgeProcess::~BridgeProcess() {
  ::shutdown(fd_, SHUT_WR);
  int status = 0;
  bool exited = false;
  for (int i = 0; i < 200 && !exited; ++i) {
    exited = ::waitpid(pid_, &status, WNOHANG) == pid_;
    if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  if (!exited) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
  ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable()) reader_.join();
  ::close(fd_);
}

std::future<nlohmann::json> BridgeProcess::Send(nlohmann::json request) {
  std::promise<nlohmann::json> promise;
  auto future = promise.get_future();
  std::lock_guard lock(mu_);
  if (closed_) throw DataError("bridge is closed: " + close_reason_);
  const std::int64_t id = next_id_++;
  request["id"] = id;
  pending_.emplace(id, std::move(promise));
  try {
    WriteAll(fd_, request.dump() + "\n");
  } catch (...) {
    pending_.erase(id);
    throw;
  }
  return future;
}

void BridgeProcess::ReadLoop() {
  std::string buffer;
  char chunk[65536];
  for (;;) {
    const ssize_t n = ::read(fd_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos;
         start = nl + 1) {
      const std::string_view line(buffer.data() + start, nl - start);
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      auto response = nlohmann::json::parse(line, nullptr, false);
      if (response.is_discarded() || !response.is_object() || !response.contains("id") ||
          !response["id"].is_number_integer()) {
        FailPending("unparseable bridge response: " + std::string(line.substr(0, 200)));
        return;
      }
      std::lock_guard lock(mu_);
      auto it = pending_.find(response["id"].get<std::int64_t>());
      if (it == pending_.end()) continue;
      if (response.contains("error")) {
        it->second.set_exception(std::make_exception_ptr(
            DataError("bridge error for request " + std::to_string(it->first) + ": " +
                      response["error"].dump())));
      } else {
        it->second.set_value(std::move(response));
      }
      pending_.erase(it);
    }
    buffer.erase(0, start);
  }
  FailPending("bridge process closed its output");
}

void BridgeProcess::FailPending(const std::string& why) {
  std::lock_guard lock(mu_);
  closed_ = true;
  close_reason_ = why;
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(DataError(why)));
  }
  pending_.clear();
}

BridgeScorer::BridgeScorer(const std::string& command, ScoreMode mode)
    : mode_(mode), process_(command) {}

std::vector<Eigen::VectorXd> BridgeScorer::ScoreBatch(
    ScoreKind kind, std::string_view claim, std::span<const std::string> sentences) {
  nlohmann::json request = {{"kind", ScoreKindName(kind)},
                            {"claim", claim},
                            {"sentences", sentences}};
  const nlohmann::json response = process_.Send(std::move(request)).get();
  if (!response.contains("probs") || !response["probs"].is_array()) {
    throw DataError("bridge response lacks probs");
  }
  std::vector<Eigen::VectorXd> rows;
  for (const auto& row : response["probs"]) {
    if (!row.is_array()) throw DataError("bridge probs row is not an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i].is_number()) throw DataError("bridge probs entry is not a number");
      v(static_cast<Eigen::Index>(i)) = row[i].get<double>();
    }
    rows.push_back(std::move(v));
  }
  const std::size_t expected = kind == ScoreKind::kClaimConcat ? 1 : sentences.size();
  const int width = kind == ScoreKind::kSentence ? ScoreWidth(mode_) : 3;
  ValidateProbabilityRows(rows, expected, width);
  return rows;
}

std::vector<std::string> BridgeScorer::ExtractTerms(std::string_view claim) {
  nlohmann::json request = {{"kind", "terms"},
                            {"claim", claim},
                            {"sentences", nlohmann::json::array()}};
  const nlohmann::json response = process_.Send(std::move(request)).get();
  if (!response.contains("terms") || !response["terms"].is_array()) {
    throw DataError("bridge response lacks terms");
  }
  std::vector<std::string> terms;
  for (const auto& t : response["terms"]) {
    if (!t.is_string()) throw DataError("bridge term is not a string");
    terms.push_back(t.get<std::string>());
  }
  return terms;
}

std::string BridgeCommand(std::string_view spec) {
  constexpr std::string_view kPrefix = "bridge:";
  if (spec.substr(0, kPrefix.size()) != kPrefix) return {};
  return std::string(spec.substr(kPrefix.size()));
}

}  // namespace fever
