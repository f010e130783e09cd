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

#include "fever/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdio>
#include <stdexcept>

namespace fever::text {

namespace {

icu::UnicodeString FromUtf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string ToUtf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

template <typename Fn>
void ForEachCodePoint(std::string_view s, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    fn(c, start, i);
  }
}

}  // namespace

std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  ForEachCodePoint(s, [&](UChar32 c, int32_t, int32_t) {
    out.push_back(static_cast<char32_t>(c));
  });
  return out;
}

std::string EncodeUtf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      n = 0;
      U8_APPEND_UNSAFE(buf, n, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), n);
  }
  return out;
}

std::string FoldAscii(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkd = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKD unavailable");
  icu::UnicodeString decomposed = nfkd->normalize(FromUtf8(s), status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKD failed");
  std::string out;
  out.reserve(s.size());
  for (int32_t i = 0; i < decomposed.length(); ++i) {
    const char16_t c = decomposed.charAt(i);
    if (c < 0x80) out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string ToLower(std::string_view s) {
  icu::UnicodeString u = FromUtf8(s);
  u.toLower(icu::Locale::getRoot());
  return ToUtf8(u);
}

std::vector<std::string> Tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  int32_t run_start = -1;
  ForEachCodePoint(s, [&](UChar32 c, int32_t start, int32_t end) {
    if (u_isalnum(c)) {
      if (run_start < 0) run_start = start;
      if (end == static_cast<int32_t>(s.size())) {
        tokens.emplace_back(s.substr(run_start, end - run_start));
        run_start = -1;
      }
    } else if (run_start >= 0) {
      tokens.emplace_back(s.substr(run_start, start - run_start));
      run_start = -1;
    }
  });
  return tokens;
}

bool IsUppercaseInitial(std::string_view token) {
  if (token.empty()) return false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(token.data());
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(bytes, i, static_cast<int32_t>(token.size()), c);
  return c >= 0 && (u_isupper(c) || u_istitle(c));
}

Fnv1a& Fnv1a::Update(std::string_view bytes) {
  for (unsigned char b : bytes) {
    state_ ^= b;
    state_ *= 1099511628211ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::Update(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xFF;
    state_ *= 1099511628211ULL;
  }
  return *this;
}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(state_));
  return buf;
}

}  // namespace fever::text
