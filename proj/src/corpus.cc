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

#include "claimlens/corpus.h"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// LabelScheme

LabelScheme LabelScheme::ClaimBuster3() {
  return LabelScheme(SchemeName::kClaimBuster3, {"NFS", "UFS", "CFS"});
}

LabelScheme LabelScheme::NewsClaims2() {
  return LabelScheme(SchemeName::kNewsClaims2, {"FVC", "NON_FVC"});
}

LabelScheme LabelScheme::FromName(const std::string &name) {
  if (name == "CLAIMBUSTER3") return ClaimBuster3();
  if (name == "NEWSCLAIMS2") return NewsClaims2();
  throw ArgumentError("unknown label scheme '" + name + "'");
}

std::string LabelScheme::NameString() const {
  return name_ == SchemeName::kClaimBuster3 ? "CLAIMBUSTER3" : "NEWSCLAIMS2";
}

std::optional<int> LabelScheme::IndexOf(const std::string &label) const {
  for (int i = 0; i < size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::string SplitTagName(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kTest: return "test";
    case SplitTag::kAll: return "all";
  }
  return "all";
}

SplitTag ParseSplitTag(const std::string &name) {
  if (name == "train") return SplitTag::kTrain;
  if (name == "test") return SplitTag::kTest;
  if (name == "all") return SplitTag::kAll;
  throw ArgumentError("unknown split tag '" + name + "'");
}

// ---------------------------------------------------------------------------
// Corpus

void Corpus::Add(ClaimInstance instance) {
  instance.text = NormalizeWhitespace(instance.text);
  if (instance.text.empty()) {
    throw SchemaError("instance '" + instance.id + "' has empty text");
  }
  if (!scheme_.Contains(instance.label)) {
    throw SchemaError("instance '" + instance.id + "' has label index " +
                      std::to_string(instance.label) + " outside " +
                      scheme_.NameString());
  }
  if (!ids_.emplace(instance.id, instances_.size()).second) {
    throw SchemaError("duplicate instance id '" + instance.id + "'");
  }
  instances_.push_back(std::move(instance));
}

std::vector<int> Corpus::Labels() const {
  std::vector<int> labels;
  labels.reserve(instances_.size());
  for (const auto &instance : instances_) labels.push_back(instance.label);
  return labels;
}

std::vector<std::string> Corpus::Texts() const {
  std::vector<std::string> texts;
  texts.reserve(instances_.size());
  for (const auto &instance : instances_) texts.push_back(instance.text);
  return texts;
}

// ---------------------------------------------------------------------------
// ClaimBuster

namespace {

// RFC 4180 style reader: quoted fields may contain delimiters, doubled
// quotes and newlines.
std::vector<std::vector<std::string>> ParseDelimited(const std::string &data,
                                                      char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delimiter) {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
      bool blank = row.size() == 1 && row[0].empty();
      if (!blank) rows.push_back(std::move(row));
      row.clear();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

char DetectDelimiter(const std::string &data) {
  size_t end = data.find('\n');
  std::string header = data.substr(0, end);
  size_t tabs = std::count(header.begin(), header.end(), '\t');
  size_t commas = std::count(header.begin(), header.end(), ',');
  return tabs > commas ? '\t' : ',';
}

std::string Trim(const std::string &s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::optional<std::string> OptionalField(const std::vector<std::string> &row,
                                         std::optional<size_t> column) {
  if (!column || *column >= row.size()) return std::nullopt;
  std::string value = NormalizeWhitespace(row[*column]);
  if (value.empty()) return std::nullopt;
  return value;
}

}  // namespace

ClaimBusterPart ParseClaimBusterPart(const std::string &name) {
  if (name == "groundtruth") return ClaimBusterPart::kGroundTruth;
  if (name == "crowdsourced") return ClaimBusterPart::kCrowdsourced;
  throw ArgumentError("unknown ClaimBuster part '" + name + "'");
}

Corpus LoadClaimBuster(const std::string &path, ClaimBusterPart part,
                       const ClaimBusterFormat &format) {
  const std::string data = ReadFile(path);
  const char delimiter = DetectDelimiter(data);
  auto rows = ParseDelimited(data, delimiter);
  if (rows.size() < 2) throw SchemaError(path + ": no data rows");

  std::map<std::string, size_t> columns;
  for (size_t i = 0; i < rows[0].size(); ++i) {
    std::string name = Trim(rows[0][i]);
    // Strip a UTF-8 byte order mark on the first header cell.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    columns[name] = i;
  }
  auto find_column = [&](const std::string &name) -> std::optional<size_t> {
    auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  };
  auto text_col = find_column(format.text_column);
  auto label_col = find_column(format.label_column);
  if (!text_col || !label_col) {
    throw SchemaError(path + ": header lacks required columns '" +
                      format.text_column + "' and '" + format.label_column +
                      "'");
  }
  auto id_col = find_column(format.id_column);
  auto speaker_col = find_column(format.speaker_column);
  auto title_col = find_column(format.title_column);
  auto party_col = find_column(format.party_column);
  auto doc_col = find_column(format.doc_column);

  Corpus corpus(LabelScheme::ClaimBuster3());
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    const std::string where = path + " row " + std::to_string(r);
    if (*text_col >= row.size() || *label_col >= row.size()) {
      throw SchemaError(where + ": too few fields");
    }
    std::string code = Trim(row[*label_col]);
    auto mapped = format.label_codes.find(code);
    if (mapped == format.label_codes.end()) {
      throw SchemaError(where + ": unknown label code '" + code + "'");
    }
    auto label = corpus.scheme().IndexOf(mapped->second);
    if (!label) {
      throw SchemaError(where + ": label '" + mapped->second +
                        "' not in CLAIMBUSTER3");
    }
    ClaimInstance instance;
    instance.id = id_col && *id_col < row.size() && !Trim(row[*id_col]).empty()
                      ? Trim(row[*id_col])
                      : "row" + std::to_string(r);
    instance.text = row[*text_col];
    instance.label = *label;
    instance.speaker = OptionalField(row, speaker_col);
    instance.speaker_title = OptionalField(row, title_col);
    instance.speaker_party = OptionalField(row, party_col);
    instance.source_doc = OptionalField(row, doc_col);
    try {
      corpus.Add(std::move(instance));
    } catch (const SchemaError &e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  spdlog::debug("loaded {} {} instances from {}", corpus.size(),
                part == ClaimBusterPart::kGroundTruth ? "groundtruth"
                                                      : "crowdsourced",
                path);
  return corpus;
}

// ---------------------------------------------------------------------------
// NewsClaims

std::string StripUrls(const std::string &text, size_t *removed) {
  std::vector<std::string> kept;
  size_t count = 0;
  for (const std::string &token : SplitWhitespace(text)) {
    size_t start = token.find_first_not_of("([<\"'");
    std::string lowered =
        start == std::string::npos ? "" : ToLower(token.substr(start));
    if (lowered.rfind("http://", 0) == 0 || lowered.rfind("https://", 0) == 0 ||
        lowered.rfind("www.", 0) == 0) {
      ++count;
      continue;
    }
    kept.push_back(token);
  }
  if (removed) *removed += count;
  return Join(kept, " ");
}

std::string StripCitations(const std::string &text, size_t *removed) {
  static const std::regex kCitation(
      R"(\[\s*(?:\d+(?:\s*(?:,|-|\xE2\x80\x93)\s*\d+)*|[Cc]itation needed)\s*\])");
  std::string out;
  size_t count = 0;
  auto begin = std::sregex_iterator(text.begin(), text.end(), kCitation);
  size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out.append(text, last, it->position() - last);
    last = it->position() + it->length();
    ++count;
  }
  out.append(text, last, std::string::npos);
  if (removed) *removed += count;
  return out;
}

Corpus CleanNewsClaims(const Corpus &raw, const NewsClaimsCleaning &options,
                       CleaningStats *stats) {
  CleaningStats local;
  local.input = raw.size();
  Corpus cleaned(raw.scheme(), raw.split());
  std::set<std::string> seen;
  for (const ClaimInstance &instance : raw.instances()) {
    std::string text = StripUrls(instance.text, &local.urls_removed);
    text = NormalizeWhitespace(StripCitations(text, &local.citations_removed));
    if (text.empty()) {
      ++local.dropped_empty;
      continue;
    }
    if (SplitWhitespace(text).size() < options.min_tokens) {
      ++local.dropped_short;
      continue;
    }
    if (!seen.insert(ToLower(text)).second) {
      ++local.dropped_duplicate;
      continue;
    }
    ClaimInstance copy = instance;
    copy.text = std::move(text);
    cleaned.Add(std::move(copy));
  }
  local.kept = cleaned.size();
  spdlog::debug(
      "newsclaims cleaning: {} in, {} kept ({} empty, {} short, {} duplicate)",
      local.input, local.kept, local.dropped_empty, local.dropped_short,
      local.dropped_duplicate);
  if (stats) *stats = local;
  return cleaned;
}

namespace {

int ParseNewsClaimsLabel(const json &value, const std::string &where) {
  if (value.is_boolean()) return value.get<bool>() ? 0 : 1;
  if (value.is_number_integer()) {
    int v = value.get<int>();
    if (v == 1) return 0;
    if (v == 0) return 1;
  }
  if (value.is_string()) {
    std::string s = value.get<std::string>();
    for (char &c : s) {
      c = c == '-' ? '_' : static_cast<char>(std::toupper(
                                static_cast<unsigned char>(c)));
    }
    if (s == "FVC") return 0;
    if (s == "NON_FVC") return 1;
  }
  throw SchemaError(where + ": unknown label " + value.dump());
}

}  // namespace

Corpus LoadNewsClaims(const std::string &path,
                      const NewsClaimsCleaning &options, CleaningStats *stats) {
  const auto lines = ReadLines(path);
  Corpus raw(LabelScheme::NewsClaims2());
  size_t empty_rows = 0;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (NormalizeWhitespace(lines[i]).empty()) continue;
    const std::string where = path + " line " + std::to_string(i + 1);
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::parse_error &e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("text") ||
        !record["text"].is_string() || !record.contains("label")) {
      throw SchemaError(where + ": expected object with text and label");
    }
    ClaimInstance instance;
    instance.id = record.contains("id")
                      ? (record["id"].is_string()
                             ? record["id"].get<std::string>()
                             : record["id"].dump())
                      : "line" + std::to_string(i + 1);
    instance.text = record["text"].get<std::string>();
    instance.label = ParseNewsClaimsLabel(record["label"], where);
    if (record.contains("doc") && record["doc"].is_string()) {
      instance.source_doc = record["doc"].get<std::string>();
    }
    if (NormalizeWhitespace(instance.text).empty()) {
      ++empty_rows;
      continue;
    }
    try {
      raw.Add(std::move(instance));
    } catch (const SchemaError &e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  Corpus cleaned = CleanNewsClaims(raw, options, stats);
  if (stats) {
    stats->dropped_empty += empty_rows;
    stats->input += empty_rows;
  }
  return cleaned;
}

// ---------------------------------------------------------------------------
// Splitting

Fraction Fraction::Parse(const std::string &text) {
  Fraction f;
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      f.numerator = std::stoll(text.substr(0, slash));
      f.denominator = std::stoll(text.substr(slash + 1));
    } else {
      // Decimal: scale by a power of ten.
      size_t dot = text.find('.');
      std::string digits = text;
      int64_t scale = 1;
      if (dot != std::string::npos) {
        digits = text.substr(0, dot) + text.substr(dot + 1);
        for (size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
      }
      f.numerator = std::stoll(digits);
      f.denominator = scale;
    }
  } catch (const std::exception &) {
    throw ArgumentError("cannot parse fraction '" + text + "'");
  }
  if (f.denominator <= 0) throw ArgumentError("bad fraction '" + text + "'");
  return f;
}

std::string Fraction::ToString() const {
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

std::pair<Corpus, Corpus> Split(const Corpus &corpus, Fraction test_fraction,
                                uint64_t seed) {
  if (test_fraction.denominator <= 0 || test_fraction.numerator <= 0 ||
      test_fraction.numerator >= test_fraction.denominator) {
    throw ArgumentError("test fraction " + test_fraction.ToString() +
                        " outside (0, 1)");
  }
  if (corpus.empty()) throw ArgumentError("cannot split an empty corpus");

  const int num_classes = corpus.scheme().size();
  std::vector<std::vector<size_t>> by_class(num_classes);
  for (size_t i = 0; i < corpus.size(); ++i) {
    by_class[corpus[i].label].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> in_test(corpus.size(), false);
  for (auto &members : by_class) {
    const int64_t n = static_cast<int64_t>(members.size());
    // round half up of n * p / q
    const int64_t take =
        (2 * n * test_fraction.numerator + test_fraction.denominator) /
        (2 * test_fraction.denominator);
    rng.Shuffle(members);
    for (int64_t k = 0; k < take; ++k) in_test[members[k]] = true;
  }
  Corpus train(corpus.scheme(), SplitTag::kTrain);
  Corpus test(corpus.scheme(), SplitTag::kTest);
  for (size_t i = 0; i < corpus.size(); ++i) {
    (in_test[i] ? test : train).Add(corpus[i]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<LabelShare> ClassDistribution(const Corpus &corpus) {
  std::vector<LabelShare> shares;
  if (corpus.empty()) return shares;
  std::vector<size_t> counts(corpus.scheme().size(), 0);
  for (const auto &instance : corpus.instances()) ++counts[instance.label];
  for (int i = 0; i < corpus.scheme().size(); ++i) {
    shares.push_back({corpus.scheme().Label(i), counts[i],
                      100.0 * static_cast<double>(counts[i]) /
                          static_cast<double>(corpus.size())});
  }
  return shares;
}

std::vector<double> RoundPercentages(const std::vector<LabelShare> &shares,
                                     int decimals) {
  std::vector<double> out;
  if (shares.empty()) return out;
  int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const int64_t units = 100 * scale;
  int64_t total = 0;
  for (const auto &s : shares) total += static_cast<int64_t>(s.count);
  if (total == 0) return std::vector<double>(shares.size(), 0.0);

  std::vector<int64_t> floors(shares.size());
  std::vector<int64_t> remainders(shares.size());
  int64_t assigned = 0;
  for (size_t i = 0; i < shares.size(); ++i) {
    const int64_t scaled = static_cast<int64_t>(shares[i].count) * units;
    floors[i] = scaled / total;
    remainders[i] = scaled % total;
    assigned += floors[i];
  }
  std::vector<size_t> order(shares.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b];
  });
  for (size_t k = 0; assigned < units && k < order.size(); ++k, ++assigned) {
    ++floors[order[k]];
  }
  for (int64_t f : floors) {
    out.push_back(static_cast<double>(f) / static_cast<double>(scale));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string SerializeCorpus(const Corpus &corpus) {
  std::ostringstream out;
  json header = {{"type", "corpus"},
                 {"scheme", corpus.scheme().NameString()},
                 {"labels", corpus.scheme().labels()},
                 {"split", SplitTagName(corpus.split())},
                 {"count", corpus.size()}};
  out << header.dump() << '\n';
  for (const auto &instance : corpus.instances()) {
    json row = {{"id", instance.id},
                {"text", instance.text},
                {"label", corpus.scheme().Label(instance.label)}};
    if (instance.speaker) row["speaker"] = *instance.speaker;
    if (instance.speaker_title) row["speaker_title"] = *instance.speaker_title;
    if (instance.speaker_party) row["speaker_party"] = *instance.speaker_party;
    if (instance.source_doc) row["source_doc"] = *instance.source_doc;
    out << row.dump() << '\n';
  }
  return out.str();
}

Corpus ParseCorpus(const std::string &jsonl, const std::string &origin) {
  std::istringstream in(jsonl);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(origin + ": empty corpus file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error &e) {
    throw FormatError(origin + ": bad header: " + e.what());
  }
  if (!header.is_object() || header.value("type", "") != "corpus") {
    throw FormatError(origin + ": missing corpus header record");
  }
  Corpus corpus(LabelScheme::FromName(header.at("scheme").get<std::string>()),
                ParseSplitTag(header.value("split", "all")));
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json row = json::parse(line);
      ClaimInstance instance;
      instance.id = row.at("id").get<std::string>();
      instance.text = row.at("text").get<std::string>();
      auto label = corpus.scheme().IndexOf(row.at("label").get<std::string>());
      if (!label) throw FormatError("unknown label");
      instance.label = *label;
      auto opt = [&](const char *key) -> std::optional<std::string> {
        if (!row.contains(key)) return std::nullopt;
        return row[key].get<std::string>();
      };
      instance.speaker = opt("speaker");
      instance.speaker_title = opt("speaker_title");
      instance.speaker_party = opt("speaker_party");
      instance.source_doc = opt("source_doc");
      corpus.Add(std::move(instance));
    } catch (const json::exception &e) {
      throw FormatError(origin + " line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const Error &e) {
      throw FormatError(origin + " line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (header.contains("count") &&
      header["count"].get<size_t>() != corpus.size()) {
    throw FormatError(origin + ": header count does not match rows");
  }
  return corpus;
}

void SaveCorpus(const Corpus &corpus, const std::string &path) {
  WriteFile(path, SerializeCorpus(corpus));
}

Corpus LoadCorpus(const std::string &path) {
  return ParseCorpus(ReadFile(path), path);
}

}  // namespace claimlens
