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

#ifndef CLAIMLENS_TESTS_TEST_UTIL_H_
#define CLAIMLENS_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("claimlens_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  std::string File(const std::string &name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string SourcePath(const std::string &relative) {
  return std::string(CLAIMLENS_SOURCE_DIR) + "/" + relative;
}

// Byte comparison against tests/golden/<name>. With CLAIMLENS_UPDATE_GOLDEN
// set the file is rewritten instead and the comparison passes.
inline bool MatchesGolden(const std::string &name, const std::string &actual) {
  const std::string path = SourcePath("tests/golden/" + name);
  if (std::getenv("CLAIMLENS_UPDATE_GOLDEN")) {
    WriteFile(path, actual);
    return true;
  }
  return ReadFile(path) == actual;
}

// Writes a ClaimBuster-format CSV with the given per-class counts in a
// seeded random order. Verdict codes follow the public export (-1/0/1).
inline void WriteSyntheticClaimBuster(const std::string &path, int nfs, int ufs,
                                      int cfs, uint64_t seed) {
  std::vector<int> codes;
  codes.insert(codes.end(), nfs, -1);
  codes.insert(codes.end(), ufs, 0);
  codes.insert(codes.end(), cfs, 1);
  Rng rng(seed);
  rng.Shuffle(codes);
  static const char *kSpeakers[] = {"Barack Obama", "Mitt Romney",
                                    "Hillary Clinton", "Donald Trump"};
  static const char *kParties[] = {"Democratic", "Republican"};
  std::string out =
      "Sentence_id,Text,Speaker,Speaker_title,Speaker_party,File_id,Verdict\n";
  for (size_t i = 0; i < codes.size(); ++i) {
    const int s = static_cast<int>(rng.Below(4));
    out += std::to_string(1000 + i) + ",\"Sentence " + std::to_string(i) +
           ", as said, has \"\"quoted\"\" words.\"," + kSpeakers[s] +
           ",Candidate," + kParties[s % 2] + ",debate" +
           std::to_string(i % 7) + "," + std::to_string(codes[i]) + "\n";
  }
  WriteFile(path, out);
}

// Writes a raw NewsClaims JSON-lines file whose cleaning yields exactly
// `fvc` + `non_fvc` sentences. Noise rows that the cleaner must remove are
// interleaved: case-folded duplicates, short sentences, URL-only rows, and
// rows carrying URL / citation markers that survive after stripping.
inline void WriteSyntheticNewsClaims(const std::string &path, int fvc,
                                     int non_fvc, uint64_t seed) {
  std::vector<int> labels;
  labels.insert(labels.end(), fvc, 1);
  labels.insert(labels.end(), non_fvc, 0);
  Rng rng(seed);
  rng.Shuffle(labels);
  std::string out;
  int noise = 0;
  auto row = [&](const std::string &text, int label) {
    out += "{\"id\":\"n" + std::to_string(noise++) + "\",\"text\":\"" + text +
           "\",\"label\":\"" + (label ? "FVC" : "NON_FVC") +
           "\",\"doc\":\"doc" + std::to_string(noise % 143) + "\"}\n";
  };
  for (size_t i = 0; i < labels.size(); ++i) {
    std::string text = "Officials reported case count " + std::to_string(i) +
                       " in the weekly bulletin.";
    if (i % 11 == 0) text += " https://example.org/report/" + std::to_string(i);
    if (i % 13 == 0) text += " [" + std::to_string(i % 9 + 1) + "]";
    row(text, labels[i]);
    switch (rng.Below(6)) {
      case 0: row("OFFICIALS REPORTED CASE COUNT " + std::to_string(i) +
                  " IN THE WEEKLY BULLETIN.", labels[i]);
              break;
      case 1: row("He said so.", 0); break;
      case 2: row("www.example.com/page" + std::to_string(i), 0); break;
      case 3: row("See [12] here.", 0); break;
      default: break;
    }
  }
  WriteFile(path, out);
}

// Toy corpus for skip-gram sanity: "a" and "b" always share a sentence,
// "a" and "z" never do. Filler words keep the two groups apart.
inline std::vector<std::vector<std::string>> CooccurrenceToyCorpus(
    uint64_t seed, int sentences = 200) {
  const std::vector<std::string> left = {"c", "d", "e", "f"};
  const std::vector<std::string> right = {"x", "w", "v", "u"};
  Rng rng(seed);
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i < sentences; ++i) {
    const bool first = i % 2 == 0;
    const auto &fill = first ? left : right;
    std::vector<std::string> s = {first ? "a" : "z", first ? "b" : "y"};
    for (int k = 0; k < 3; ++k) s.push_back(fill[rng.Below(fill.size())]);
    rng.Shuffle(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace claimlens::testing

#endif  // CLAIMLENS_TESTS_TEST_UTIL_H_
