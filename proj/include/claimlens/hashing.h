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

#ifndef CLAIMLENS_HASHING_H_
#define CLAIMLENS_HASHING_H_

#include <string>
#include <string_view>

namespace claimlens {

// Lowercase hex SHA-256 digest of `data`.
std::string Sha256Hex(std::string_view data);

// SHA-256 of a file's bytes. Throws FileError if unreadable.
std::string Sha256File(const std::string &path);

}  // namespace claimlens

#endif  // CLAIMLENS_HASHING_H_
