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

// Unicode-aware string helpers shared by the retrieval modules. All strings
// are UTF-8; invalid byte sequences decode to U+FFFD.

#ifndef FEVER_TEXT_HPP_
#define FEVER_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fever::text {

std::u32string DecodeUtf8(std::string_view s);
std::string EncodeUtf8(std::u32string_view s);

// NFKD decomposition followed by removal of every non-ASCII code point.
std::string FoldAscii(std::string_view s);

// Full Unicode lowercase (root locale).
std::string ToLower(std::string_view s);

// Maximal runs of alphanumeric code points. Everything else separates.
std::vector<std::string> Tokenize(std::string_view s);

bool IsUppercaseInitial(std::string_view token);

// FNV-1a, 64 bit. Used for cache keys and manifests, never for security.
class Fnv1a {
 public:
  Fnv1a& Update(std::string_view bytes);
  Fnv1a& Update(std::uint64_t value);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 14695981039346656037ULL;
};

}  // namespace fever::text

#endif  // FEVER_TEXT_HPP_
