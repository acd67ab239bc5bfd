// Copyright 2026 The ClaimLens Authors.
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

#ifndef CLAIMLENS_TEXT_H_
#define CLAIMLENS_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace claimlens {

// ASCII lowercase; bytes outside ASCII are left untouched.
std::string ToLower(std::string_view text);

// Collapses whitespace runs to a single space and trims both ends.
std::string NormalizeWhitespace(std::string_view text);

// Splits on ASCII whitespace.
std::vector<std::string> SplitWhitespace(std::string_view text);

// Word tokenizer used by all surface features: lowercases, splits on
// characters that are not alphanumeric and keeps apostrophes that sit
// between two word characters ("don't" stays one token). Non-ASCII bytes
// count as word characters so UTF-8 letters are never split.
std::vector<std::string> Tokenize(std::string_view text);

// Joins `parts` with `sep`.
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Number of UTF-8 code points.
size_t CountCodePoints(std::string_view text);

// Splits a camelCase identifier into lowercase words ("hasLabel" ->
// {"has", "label"}).
std::vector<std::string> SplitCamelCase(std::string_view identifier);

// Whole-file read/write helpers. Both throw FileError on failure.
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

// Reads a file as lines without trailing '\n' / '\r'.
std::vector<std::string> ReadLines(const std::string &path);

// printf-style "%.17g" formatting, round-trippable.
std::string FormatDouble(double value);

}  // namespace claimlens

#endif  // CLAIMLENS_TEXT_H_
