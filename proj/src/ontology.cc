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

#include "claimlens/ontology.h"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens {

using nlohmann::json;

bool IsNormalizedLabel(const std::string &label) {
  return label == "TRUE" || label == "FALSE" || label == "MIXTURE" ||
         label == "OTHER";
}

namespace {

std::string StringField(const json &row, const char *key) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return "";
  if (!it->is_string()) {
    throw FormatError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

// Accepts a list of strings or a single string.
std::vector<std::string> ListField(const json &row, const char *key) {
  std::vector<std::string> out;
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return out;
  if (it->is_string()) {
    if (!it->get<std::string>().empty()) out.push_back(it->get<std::string>());
    return out;
  }
  if (!it->is_array()) {
    throw FormatError(std::string("field '") + key + "' must be a list");
  }
  for (const auto &v : *it) {
    if (!v.is_string()) {
      throw FormatError(std::string("field '") + key + "' must hold strings");
    }
    if (!v.get<std::string>().empty()) out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<FactCheckRecord> IngestRecords(const std::string &path,
                                           const IngestOptions &options,
                                           IngestReport *report) {
  std::vector<FactCheckRecord> records;
  IngestReport local;
  const auto lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (NormalizeWhitespace(lines[i]).empty()) continue;
    ++local.lines;
    FactCheckRecord r;
    try {
      const json row = json::parse(lines[i]);
      if (!row.is_object()) throw FormatError("not a JSON object");
      r.id = row.contains("id") && row["id"].is_number()
                 ? std::to_string(row["id"].get<long long>())
                 : StringField(row, "id");
      r.claim_text = NormalizeWhitespace(StringField(row, "claim_text"));
      r.normalized_label = StringField(row, "normalized_label");
      std::transform(r.normalized_label.begin(), r.normalized_label.end(),
                     r.normalized_label.begin(),
                     [](unsigned char c) { return std::toupper(c); });
      r.debunk_links = ListField(row, "debunk_links");
      r.review_body = StringField(row, "review_body");
      r.review_title = StringField(row, "review_title");
      r.references = ListField(row, "references");
      r.claim_entities = ListField(row, "claim_entities");
      r.review_entities = ListField(row, "review_entities");
      r.wiki_categories = ListField(row, "wiki_categories");
      r.review_author = StringField(row, "review_author");
      r.publication_date = StringField(row, "publication_date");
      r.language = StringField(row, "language");
    } catch (const std::exception &e) {
      if (options.strict) {
        throw FormatError(path + " line " + std::to_string(i + 1) + ": " + e.what());
      }
      spdlog::debug("{} line {}: skipped ({})", path, i + 1, e.what());
      ++local.dropped_unparseable;
      continue;
    }
    if (!r.language.empty() && !options.language.empty() &&
        ToLower(r.language) != ToLower(options.language)) {
      ++local.dropped_language;
      continue;
    }
    if (r.claim_text.empty() || !IsNormalizedLabel(r.normalized_label)) {
      ++local.dropped_invalid;
      continue;
    }
    records.push_back(std::move(r));
  }
  local.kept = records.size();
  if (local.kept != local.lines) {
    spdlog::info(
        "{}: kept {} of {} records (unparseable {}, language {}, invalid {})",
        path, local.kept, local.lines, local.dropped_unparseable,
        local.dropped_language, local.dropped_invalid);
  }
  if (report) *report = local;
  return records;
}

// ---------------------------------------------------------------------------
// Ontology

namespace {

bool Contains(const std::vector<std::string> &v, const std::string &x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

void CheckName(const std::string &name) {
  if (name.empty() || name.find_first_of(" \t\r\n\"") != std::string::npos) {
    throw ArgumentError("invalid ontology name '" + name + "'");
  }
}

}  // namespace

void Ontology::DeclareClass(const std::string &name) {
  CheckName(name);
  if (!Contains(classes_, name)) classes_.push_back(name);
}

void Ontology::DeclareObjectProperty(const std::string &name,
                                     const std::string &domain,
                                     const std::string &range) {
  CheckName(name);
  if (!IsClass(domain) || !IsClass(range)) {
    throw ArgumentError("property " + name + " refers to an undeclared class");
  }
  if (!Contains(object_properties_, name)) object_properties_.push_back(name);
  object_signature_[name] = {domain, range};
}

void Ontology::DeclareDataProperty(const std::string &name,
                                   const std::string &domain) {
  CheckName(name);
  if (!IsClass(domain)) {
    throw ArgumentError("property " + name + " refers to an undeclared class");
  }
  if (!Contains(data_properties_, name)) data_properties_.push_back(name);
  data_domain_[name] = domain;
}

void Ontology::AddIndividual(const std::string &name, const std::string &cls,
                             const std::string &label) {
  CheckName(name);
  if (!IsClass(cls)) throw ArgumentError("undeclared class " + cls);
  if (IsClass(name)) throw ArgumentError(name + " is a class");
  auto [it, inserted] = memberships_.try_emplace(name);
  if (inserted) individuals_.push_back(name);
  it->second.insert(cls);
  if (!label.empty() && Label(name).empty()) labels_[name] = label;
}

void Ontology::AddObjectAssertion(const std::string &subject,
                                  const std::string &property,
                                  const std::string &object) {
  if (!IsIndividual(subject) || !IsIndividual(object) ||
      !IsObjectProperty(property)) {
    throw ArgumentError("assertion " + subject + " " + property + " " + object +
                        " refers to undeclared names");
  }
  OntologyAssertion a{subject, property, object, false};
  if (assertion_set_.insert(a).second) assertions_.push_back(a);
}

void Ontology::AddDataAssertion(const std::string &subject,
                                const std::string &property,
                                const std::string &value) {
  if (!IsIndividual(subject) || !IsDataProperty(property)) {
    throw ArgumentError("assertion " + subject + " " + property +
                        " refers to undeclared names");
  }
  OntologyAssertion a{subject, property, value, true};
  if (assertion_set_.insert(a).second) assertions_.push_back(a);
}

void Ontology::SetLabel(const std::string &name, const std::string &label) {
  if (!IsIndividual(name) && !IsClass(name)) {
    throw ArgumentError("label for undeclared name " + name);
  }
  labels_[name] = label;
}

const std::set<std::string> &Ontology::ClassesOf(
    const std::string &individual) const {
  auto it = memberships_.find(individual);
  if (it == memberships_.end()) {
    throw ArgumentError("unknown individual " + individual);
  }
  return it->second;
}

std::string Ontology::Label(const std::string &name) const {
  auto it = labels_.find(name);
  return it == labels_.end() ? "" : it->second;
}

bool Ontology::IsClass(const std::string &name) const {
  return Contains(classes_, name);
}
bool Ontology::IsIndividual(const std::string &name) const {
  return memberships_.count(name) > 0;
}
bool Ontology::IsObjectProperty(const std::string &name) const {
  return object_signature_.count(name) > 0;
}
bool Ontology::IsDataProperty(const std::string &name) const {
  return data_domain_.count(name) > 0;
}

std::string Ontology::SerializeTriples() const {
  std::string out;
  auto line = [&](const std::string &s, const std::string &p,
                  const std::string &o) { out += s + " " + p + " " + o + " .\n"; };
  for (const auto &c : classes_) line(c, onto::kType, onto::kClass);
  for (const auto &p : object_properties_) {
    line(p, onto::kType, onto::kObjectProperty);
    line(p, onto::kDomain, object_signature_.at(p).first);
    line(p, onto::kRange, object_signature_.at(p).second);
  }
  for (const auto &p : data_properties_) {
    line(p, onto::kType, onto::kDataProperty);
    line(p, onto::kDomain, data_domain_.at(p));
  }
  for (const auto &i : individuals_) {
    line(i, onto::kType, onto::kNamedIndividual);
    for (const auto &c : memberships_.at(i)) line(i, onto::kType, c);
  }
  for (const auto &a : assertions_) {
    line(a.subject, a.predicate, a.literal ? json(a.object).dump() : a.object);
  }
  return out;
}

std::string Ontology::SerializeLabels() const {
  json j = json::object();
  for (const auto &[name, label] : labels_) j[name] = label;
  return j.dump(2) + "\n";
}

Ontology Ontology::Parse(const std::string &triples, const std::string &labels) {
  Ontology ont;
  std::istringstream in(triples);
  std::string line;
  size_t number = 0;
  // Property signatures arrive over several lines.
  std::map<std::string, std::string> domains, ranges;
  std::vector<std::string> pending_object, pending_data;
  auto fail = [&](const std::string &why) {
    throw FormatError("ontology line " + std::to_string(number) + ": " + why);
  };
  struct Row {
    std::string s, p, o;
    bool literal;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    if (line.size() < 2 || line.substr(line.size() - 2) != " .") fail("missing ' .'");
    const std::string body = line.substr(0, line.size() - 2);
    const size_t a = body.find(' ');
    const size_t b = a == std::string::npos ? a : body.find(' ', a + 1);
    if (b == std::string::npos) fail("expected subject predicate object");
    Row r{body.substr(0, a), body.substr(a + 1, b - a - 1), body.substr(b + 1),
          false};
    if (!r.o.empty() && r.o[0] == '"') {
      try {
        r.o = json::parse(r.o).get<std::string>();
      } catch (const json::exception &) {
        fail("bad literal");
      }
      r.literal = true;
    }
    rows.push_back(std::move(r));
  }
  for (const auto &r : rows) {
    if (r.p == onto::kType && r.o == onto::kClass) ont.DeclareClass(r.s);
    if (r.p == onto::kType && r.o == onto::kObjectProperty) pending_object.push_back(r.s);
    if (r.p == onto::kType && r.o == onto::kDataProperty) pending_data.push_back(r.s);
    if (r.p == onto::kDomain) domains[r.s] = r.o;
    if (r.p == onto::kRange) ranges[r.s] = r.o;
  }
  for (const auto &p : pending_object) ont.DeclareObjectProperty(p, domains[p], ranges[p]);
  for (const auto &p : pending_data) ont.DeclareDataProperty(p, domains[p]);
  for (const auto &r : rows) {
    if (r.p != onto::kType || r.o == onto::kClass || r.o == onto::kObjectProperty ||
        r.o == onto::kDataProperty || r.o == onto::kNamedIndividual) {
      continue;
    }
    ont.AddIndividual(r.s, r.o);
  }
  for (const auto &r : rows) {
    if (r.p == onto::kType || r.p == onto::kDomain || r.p == onto::kRange) continue;
    if (r.literal) {
      ont.AddDataAssertion(r.s, r.p, r.o);
    } else {
      ont.AddObjectAssertion(r.s, r.p, r.o);
    }
  }
  try {
    const json parsed = json::parse(labels);
    for (auto it = parsed.begin(); it != parsed.end(); ++it) {
      ont.SetLabel(it.key(), it.value().get<std::string>());
    }
  } catch (const json::exception &e) {
    throw FormatError(std::string("ontology labels: ") + e.what());
  }
  return ont;
}

std::string Ontology::ExportTurtle() const {
  std::string out =
      "@prefix cl: <https://claimlens.invalid/ontology#> .\n"
      "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
      "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
      "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n\n";
  std::istringstream in(SerializeTriples());
  std::string line;
  while (std::getline(in, line)) out += line + "\n";
  for (const auto &[name, label] : labels_) {
    out += name + " rdfs:label " + json(label).dump() + " .\n";
  }
  return out;
}

void Ontology::Save(const std::string &prefix) const {
  WriteFile(prefix + ".triples", SerializeTriples());
  WriteFile(prefix + ".labels.json", SerializeLabels());
}

Ontology Ontology::Load(const std::string &prefix) {
  return Parse(ReadFile(prefix + ".triples"), ReadFile(prefix + ".labels.json"));
}

std::string OntologySlug(const std::string &surface) {
  const auto tokens = Tokenize(surface);
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out += '_';
    for (char c : t) out += c == '\'' ? '_' : c;
  }
  return out.empty() ? "unknown" : out;
}

std::string EntitySurface(const std::string &reference) {
  std::string s = reference;
  if (s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0) {
    while (!s.empty() && s.back() == '/') s.pop_back();
    s = s.substr(s.find_last_of('/') + 1);
  }
  if (s.rfind("Category:", 0) == 0) s = s.substr(9);
  std::replace(s.begin(), s.end(), '_', ' ');
  return NormalizeWhitespace(s);
}

Ontology BuildOntology(const std::vector<FactCheckRecord> &records) {
  Ontology ont;
  for (const char *c : {"cl:Claim", "cl:ClaimReview", "cl:Entity",
                        "cl:WikiCategory", "cl:Author", "cl:Label"}) {
    ont.DeclareClass(c);
  }
  ont.DeclareObjectProperty("cl:hasLabel", "cl:Claim", "cl:Label");
  ont.DeclareObjectProperty("cl:reviewedBy", "cl:Claim", "cl:ClaimReview");
  ont.DeclareObjectProperty("cl:mentionsEntity", "cl:Claim", "cl:Entity");
  ont.DeclareObjectProperty("cl:inCategory", "cl:Claim", "cl:WikiCategory");
  ont.DeclareObjectProperty("cl:authoredBy", "cl:ClaimReview", "cl:Author");
  ont.DeclareDataProperty("cl:citesReference", "cl:Claim");
  ont.DeclareDataProperty("cl:publishedOn", "cl:ClaimReview");

  for (size_t i = 0; i < records.size(); ++i) {
    const FactCheckRecord &r = records[i];
    const std::string claim = "cl:claim_" + std::to_string(i);
    ont.AddIndividual(claim, "cl:Claim", r.claim_text);

    const std::string label = "cl:label_" + r.normalized_label;
    ont.AddIndividual(label, "cl:Label", ToLower(r.normalized_label));
    ont.AddObjectAssertion(claim, "cl:hasLabel", label);

    auto add_entity = [&](const std::string &subject, const std::string &ref) {
      const std::string surface = EntitySurface(ref);
      const std::string name = "cl:entity_" + OntologySlug(surface);
      ont.AddIndividual(name, "cl:Entity", surface);
      ont.AddObjectAssertion(subject, "cl:mentionsEntity", name);
    };
    for (const auto &e : r.claim_entities) add_entity(claim, e);
    for (const auto &c : r.wiki_categories) {
      const std::string surface = EntitySurface(c);
      const std::string name = "cl:category_" + OntologySlug(surface);
      ont.AddIndividual(name, "cl:WikiCategory", surface);
      ont.AddObjectAssertion(claim, "cl:inCategory", name);
    }
    for (const auto &link : r.debunk_links) {
      ont.AddDataAssertion(claim, "cl:citesReference", link);
    }

    const bool has_review = !r.review_title.empty() || !r.review_body.empty() ||
                            !r.review_author.empty() ||
                            !r.publication_date.empty() ||
                            !r.review_entities.empty() || !r.references.empty();
    if (!has_review) continue;
    const std::string review = "cl:review_" + std::to_string(i);
    std::string review_label = r.review_title;
    if (review_label.empty()) {
      auto words = SplitWhitespace(r.review_body);
      if (words.size() > 12) words.resize(12);
      review_label = Join(words, " ");
    }
    if (review_label.empty()) review_label = "claim review";
    ont.AddIndividual(review, "cl:ClaimReview", review_label);
    ont.AddObjectAssertion(claim, "cl:reviewedBy", review);
    // Review entities hang off the claim: mentionsEntity has a Claim domain.
    for (const auto &e : r.review_entities) add_entity(claim, e);
    for (const auto &ref : r.references) {
      ont.AddDataAssertion(claim, "cl:citesReference", ref);
    }
    if (!r.review_author.empty()) {
      const std::string author = "cl:author_" + OntologySlug(r.review_author);
      ont.AddIndividual(author, "cl:Author", NormalizeWhitespace(r.review_author));
      ont.AddObjectAssertion(review, "cl:authoredBy", author);
    }
    if (!r.publication_date.empty()) {
      ont.AddDataAssertion(review, "cl:publishedOn", r.publication_date);
    }
  }
  return ont;
}

// ---------------------------------------------------------------------------
// Walks

std::vector<std::vector<std::string>> WalkCorpus::Combined() const {
  std::vector<std::vector<std::string>> out = structure;
  out.insert(out.end(), lexical.begin(), lexical.end());
  return out;
}

std::vector<std::string> LexicalTokens(const Ontology &ontology,
                                       const std::string &name) {
  const std::string label = ontology.Label(name);
  if (!label.empty()) {
    auto tokens = Tokenize(label);
    if (!tokens.empty()) return tokens;
  }
  std::string local = name.substr(name.find(':') + 1);
  std::vector<std::string> out;
  for (const auto &part : SplitCamelCase(local)) {
    for (const auto &t : Tokenize(part)) out.push_back(t);
  }
  return out;
}

WalkCorpus GenerateWalkCorpus(const Ontology &ontology,
                              const WalkOptions &options) {
  if (ontology.empty()) throw ArgumentError("walks need a non-empty ontology");
  if (options.walk_length < 1 || options.walks_per_entity < 0) {
    throw ArgumentError("walk_length must be >= 1 and walks_per_entity >= 0");
  }
  // Directed projection: memberships and object assertions.
  std::vector<std::string> nodes = ontology.classes();
  nodes.insert(nodes.end(), ontology.individuals().begin(),
               ontology.individuals().end());
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> out_edges;
  for (const auto &i : ontology.individuals()) {
    for (const auto &c : ontology.ClassesOf(i)) {
      out_edges[i].emplace_back(onto::kType, c);
    }
  }
  for (const auto &a : ontology.assertions()) {
    if (!a.literal) out_edges[a.subject].emplace_back(a.predicate, a.object);
  }

  WalkCorpus corpus;
  for (size_t n = 0; n < nodes.size(); ++n) {
    Rng rng(DeriveSeed(options.seed, n));
    for (int w = 0; w < options.walks_per_entity; ++w) {
      std::vector<std::string> walk = {nodes[n]};
      std::string current = nodes[n];
      for (int step = 1; step < options.walk_length; ++step) {
        auto it = out_edges.find(current);
        if (it == out_edges.end() || it->second.empty()) break;
        const auto &[relation, target] = it->second[rng.Below(it->second.size())];
        walk.push_back(relation);
        walk.push_back(target);
        current = target;
      }
      corpus.structure.push_back(std::move(walk));
    }
  }
  for (const auto &walk : corpus.structure) {
    std::vector<std::string> lexical;
    for (const auto &token : walk) {
      if (token == onto::kType) {
        lexical.push_back("type");
        continue;
      }
      for (auto &t : LexicalTokens(ontology, token)) lexical.push_back(std::move(t));
    }
    corpus.lexical.push_back(std::move(lexical));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Embedding

void OntologyEmbedding::Index(const std::string &phrase,
                              const std::string &entity) {
  const auto tokens = Tokenize(phrase);
  if (tokens.empty()) return;
  auto &entities = token_index_[Join(tokens, " ")];
  if (std::find(entities.begin(), entities.end(), entity) == entities.end()) {
    entities.push_back(entity);
  }
  max_phrase_tokens_ = std::max(max_phrase_tokens_, tokens.size());
}

SentenceEncoding OntologyEmbedding::Encode(const std::string &text) const {
  SentenceEncoding result;
  result.vector = Eigen::VectorXd::Zero(dim());
  const auto tokens = Tokenize(text);
  size_t i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    const size_t longest = std::min(max_phrase_tokens_, tokens.size() - i);
    for (size_t n = longest; n >= 1; --n) {
      std::string key = tokens[i];
      for (size_t k = 1; k < n; ++k) key += " " + tokens[i + k];
      auto it = token_index_.find(key);
      if (it == token_index_.end()) continue;
      ++result.matched_count;
      for (const auto &e : it->second) {
        if (std::find(result.matched_entities.begin(),
                      result.matched_entities.end(),
                      e) == result.matched_entities.end()) {
          result.matched_entities.push_back(e);
        }
      }
      matched = n;
      break;
    }
    i += matched ? matched : 1;
  }
  int used = 0;
  for (const auto &e : result.matched_entities) {
    if (const auto *v = vectors_.Find(e)) {
      result.vector += *v;
      ++used;
    }
  }
  if (used > 0) result.vector /= used;
  return result;
}

void OntologyEmbedding::Save(const std::string &prefix) const {
  SaveWord2VecText(vectors_, prefix + ".vec");
  json index = json::object();
  for (const auto &[phrase, entities] : token_index_) index[phrase] = entities;
  WriteFile(prefix + ".index.json", index.dump(2) + "\n");
}

OntologyEmbedding OntologyEmbedding::Load(const std::string &prefix) {
  EmbeddingTable table = LoadPretrained(prefix + ".vec");
  OntologyEmbedding emb(table.dim());
  emb.vectors_ = std::move(table);
  try {
    const json index = json::parse(ReadFile(prefix + ".index.json"));
    for (auto it = index.begin(); it != index.end(); ++it) {
      for (const auto &e : it.value()) emb.Index(it.key(), e.get<std::string>());
    }
  } catch (const json::exception &e) {
    throw FormatError(prefix + ".index.json: " + e.what());
  }
  return emb;
}

OntologyEmbedding TrainOntologyEmbedding(const Ontology &ontology,
                                         const WalkCorpus &corpus,
                                         const OntologyEmbeddingOptions &options) {
  const auto sentences = corpus.Combined();
  if (sentences.empty()) throw ArgumentError("empty walk corpus");
  EmbeddingTable words = SkipGramTrainer(options.skipgram).Train(sentences);
  OntologyEmbedding emb(words.dim());
  std::vector<std::string> names = ontology.classes();
  names.insert(names.end(), ontology.individuals().begin(),
               ontology.individuals().end());
  size_t zero = 0;
  for (const auto &name : names) {
    if (const auto *v = words.Find(name)) {
      emb.vectors().Set(name, *v);
      continue;
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(words.dim());
    int known = 0;
    for (const auto &t : LexicalTokens(ontology, name)) {
      if (const auto *v = words.Find(t)) {
        sum += *v;
        ++known;
      }
    }
    if (known == 0) {
      ++zero;
      spdlog::debug("ontology entity {} has no vector; using zeros", name);
    }
    emb.vectors().Set(name, known ? Eigen::VectorXd(sum / known) : sum);
  }
  if (zero > 0) spdlog::warn("{} ontology entities embedded as zero vectors", zero);
  for (const auto &name : ontology.individuals()) {
    const auto &classes = ontology.ClassesOf(name);
    const bool indexed = std::any_of(
        options.indexed_classes.begin(), options.indexed_classes.end(),
        [&](const std::string &c) { return classes.count(c) > 0; });
    if (!indexed) continue;
    const auto tokens = Tokenize(ontology.Label(name));
    if (tokens.empty() ||
        static_cast<int>(tokens.size()) > options.max_index_tokens) {
      continue;
    }
    emb.Index(ontology.Label(name), name);
  }
  return emb;
}

}  // namespace claimlens
