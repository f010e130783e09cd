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

// Little-endian byte buffers for the versioned store and index files.

#ifndef FEVER_BINARY_IO_HPP_
#define FEVER_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>

#include "fever/types.hpp"

namespace fever::binary {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void Put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }

  void PutString(std::string_view s) {
    Put<std::uint64_t>(s.size());
    buffer_.append(s);
  }

  void PutBytes(std::string_view s) { buffer_.append(s); }

  // Overwrites a previously written u64 at byte offset `at`.
  void PatchU64(std::size_t at, std::uint64_t value) {
    std::memcpy(buffer_.data() + at, &value, sizeof(value));
  }

  std::size_t size() const { return buffer_.size(); }
  const std::string& bytes() const { return buffer_; }

  void WriteFile(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw DataError("write failed: " + path.string());
  }

 private:
  std::string buffer_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : buffer_(std::move(bytes)) {}

  static Reader FromFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return Reader(std::move(bytes));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  T Get() {
    Require(sizeof(T));
    T value;
    std::memcpy(&value, buffer_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string GetString() {
    const auto n = Get<std::uint64_t>();
    Require(n);
    std::string s = buffer_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view GetBytes(std::size_t n) {
    Require(n);
    std::string_view s(buffer_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  void Seek(std::size_t pos) {
    if (pos > buffer_.size()) throw DataError("binary file: seek past end");
    pos_ = pos;
  }
  std::size_t position() const { return pos_; }
  std::size_t size() const { return buffer_.size(); }

 private:
  void Require(std::uint64_t n) const {
    if (n > buffer_.size() - pos_) throw DataError("binary file truncated");
  }

  std::string buffer_;
  std::size_t pos_ = 0;
};

}  // namespace fever::binary

#endif  // FEVER_BINARY_IO_HPP_
