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

#include <cmath>

#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

using nlohmann::json;

FactCheckRecord Record(const std::string &text, const std::string &label,
                       std::vector<std::string> entities = {}) {
  FactCheckRecord r;
  r.claim_text = text;
  r.normalized_label = label;
  r.claim_entities = std::move(entities);
  return r;
}

size_t CountPredicate(const Ontology &ont, const std::string &p) {
  size_t n = 0;
  for (const auto &a : ont.assertions()) n += a.predicate == p;
  return n;
}

size_t CountClass(const Ontology &ont, const std::string &cls) {
  size_t n = 0;
  for (const auto &i : ont.individuals()) n += ont.ClassesOf(i).count(cls);
  return n;
}

TEST_CASE("ingest drops invalid rows and keeps order") {
  testing::TempDir dir;
  std::string text;
  for (int i = 0; i < 100; ++i) {
    text += json{{"id", std::to_string(i)},
                 {"claim_text", "Claim number " + std::to_string(i)},
                 {"normalized_label", i % 2 ? "true" : "FALSE"}}
                .dump() +
            "\n";
  }
  WriteFile(dir.File("ok.jsonl"), text);
  IngestReport report;
  auto records = IngestRecords(dir.File("ok.jsonl"), {}, &report);
  REQUIRE(records.size() == 100);
  CHECK(report.kept == 100);
  for (int i = 0; i < 100; ++i) CHECK(records[i].id == std::to_string(i));
  CHECK(records[1].normalized_label == "TRUE");

  WriteFile(dir.File("empty.jsonl"), "");
  CHECK(IngestRecords(dir.File("empty.jsonl")).empty());

  WriteFile(dir.File("mixed.jsonl"),
            R"({"normalized_label":"TRUE"})" "\n"
            R"({"claim_text":"x","normalized_label":"MAYBE"})" "\n"
            R"({"claim_text":"Le ciel est bleu","normalized_label":"TRUE","language":"fr"})" "\n"
            "{not json\n"
            R"({"claim_text":"Valid one","normalized_label":"mixture","claim_entities":["http://dbpedia.org/resource/Oval_Office"]})" "\n");
  records = IngestRecords(dir.File("mixed.jsonl"), {}, &report);
  REQUIRE(records.size() == 1);
  CHECK(records[0].normalized_label == "MIXTURE");
  CHECK(report.lines == 5);
  CHECK(report.dropped_invalid == 2);
  CHECK(report.dropped_language == 1);
  CHECK(report.dropped_unparseable == 1);

  IngestOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(IngestRecords(dir.File("mixed.jsonl"), strict), FormatError);
}

TEST_CASE("ontology construction rules") {
  Ontology one = BuildOntology(
      {Record("The oval office was repainted", "FALSE", {"Oval Office", "Paint"})});
  CHECK(CountClass(one, "cl:Claim") == 1);
  CHECK(CountPredicate(one, "cl:mentionsEntity") == 2);
  CHECK(one.classes() == std::vector<std::string>{"cl:Claim", "cl:ClaimReview",
                                                  "cl:Entity", "cl:WikiCategory",
                                                  "cl:Author", "cl:Label"});
  CHECK(one.object_properties().size() + one.data_properties().size() == 7);

  std::vector<FactCheckRecord> records;
  for (int i = 0; i < 30; ++i) {
    FactCheckRecord r = Record("Claim " + std::to_string(i), i % 3 ? "TRUE" : "OTHER",
                               {"http://dbpedia.org/resource/Oval_Office"});
    r.wiki_categories = {"Category:United_States"};
    r.review_title = "Review " + std::to_string(i);
    r.review_author = "Ann Smith";
    r.publication_date = "2020-01-0" + std::to_string(i % 9 + 1);
    r.debunk_links = {"https://example.org/" + std::to_string(i)};
    records.push_back(r);
  }
  Ontology many = BuildOntology(records);
  CHECK(many.classes().size() == 6);
  CHECK(CountClass(many, "cl:Entity") == 1);
  CHECK(CountClass(many, "cl:Author") == 1);
  CHECK(CountClass(many, "cl:Label") == 2);
  CHECK(CountClass(many, "cl:ClaimReview") == 30);
  CHECK(many.Label("cl:entity_oval_office") == "Oval Office");
  CHECK(many.Label("cl:category_united_states") == "United States");
  for (const auto &i : many.individuals()) {
    CHECK_FALSE(many.ClassesOf(i).empty());
    CHECK_FALSE(many.Label(i).empty());
  }
  // Deterministic bytes.
  CHECK(BuildOntology(records).SerializeTriples() == many.SerializeTriples());
  CHECK(BuildOntology(records).SerializeLabels() == many.SerializeLabels());
}

TEST_CASE("ontology serialization round trip") {
  testing::TempDir dir;
  FactCheckRecord r = Record("Taxes \"doubled\" in 2010", "FALSE", {"Taxes"});
  r.references = {"https://example.org/a b"};
  r.review_author = "Bob";
  Ontology ont = BuildOntology({r});
  ont.Save(dir.File("ont"));
  Ontology back = Ontology::Load(dir.File("ont"));
  CHECK(back.SerializeTriples() == ont.SerializeTriples());
  CHECK(back.SerializeLabels() == ont.SerializeLabels());
  const std::string ttl = ont.ExportTurtle();
  CHECK(ttl.find("@prefix cl:") != std::string::npos);
  CHECK(ttl.find("rdfs:label \"Taxes \\\"doubled\\\" in 2010\"") != std::string::npos);
  CHECK_THROWS_AS(Ontology::Parse("a b\n", "{}"), FormatError);
}

TEST_CASE("ontology rejects undeclared references") {
  Ontology ont;
  ont.DeclareClass("cl:A");
  CHECK_THROWS_AS(ont.AddIndividual("cl:x", "cl:B"), ArgumentError);
  ont.AddIndividual("cl:x", "cl:A");
  CHECK_THROWS_AS(ont.AddObjectAssertion("cl:x", "cl:rel", "cl:x"), ArgumentError);
  CHECK_THROWS_AS(ont.DeclareObjectProperty("cl:rel", "cl:A", "cl:B"), ArgumentError);
}

Ontology ChainOntology() {
  Ontology ont;
  ont.DeclareClass("cl:Node");
  ont.DeclareObjectProperty("cl:next", "cl:Node", "cl:Node");
  for (const char *n : {"cl:a", "cl:b", "cl:c"}) ont.AddIndividual(n, "cl:Node");
  ont.AddObjectAssertion("cl:a", "cl:next", "cl:b");
  ont.AddObjectAssertion("cl:b", "cl:next", "cl:c");
  return ont;
}

TEST_CASE("walks follow edges and are reproducible") {
  Ontology ont = ChainOntology();
  WalkOptions options;
  options.walk_length = 3;
  options.walks_per_entity = 1;
  options.seed = 17;
  WalkCorpus walks = GenerateWalkCorpus(ont, options);
  REQUIRE(walks.structure.size() == 4);  // class + 3 individuals
  CHECK(walks.structure[0] == std::vector<std::string>{"cl:Node"});
  CHECK(GenerateWalkCorpus(ont, options).structure == walks.structure);
  CHECK(GenerateWalkCorpus(ont, options).lexical == walks.lexical);

  // Enumerate every legal walk of 3 nodes from each start.
  std::set<std::vector<std::string>> legal = {
      {"cl:Node"},
      {"cl:a", "rdf:type", "cl:Node"},
      {"cl:a", "cl:next", "cl:b", "rdf:type", "cl:Node"},
      {"cl:a", "cl:next", "cl:b", "cl:next", "cl:c"},
      {"cl:b", "rdf:type", "cl:Node"},
      {"cl:b", "cl:next", "cl:c", "rdf:type", "cl:Node"},
      {"cl:c", "rdf:type", "cl:Node"}};
  for (uint64_t seed = 0; seed < 50; ++seed) {
    options.seed = seed;
    for (const auto &w : GenerateWalkCorpus(ont, options).structure) {
      CHECK(legal.count(w) == 1);
    }
  }

  Ontology isolated;
  isolated.DeclareClass("cl:Lonely");
  isolated.AddIndividual("cl:x", "cl:Lonely");
  options.walk_length = 4;
  CHECK(GenerateWalkCorpus(isolated, options).structure[0].size() == 1);
}

TEST_CASE("every individual starts a walk") {
  std::vector<FactCheckRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back(Record("claim text " + std::to_string(i), "TRUE",
                             {"E" + std::to_string(i % 4)}));
  }
  Ontology ont = BuildOntology(records);
  WalkOptions options;
  options.walks_per_entity = 1;
  WalkCorpus walks = GenerateWalkCorpus(ont, options);
  std::set<std::string> starts;
  for (const auto &w : walks.structure) starts.insert(w.front());
  for (const auto &i : ont.individuals()) CHECK(starts.count(i) == 1);
}

TEST_CASE("lexical sentences use label tokens") {
  Ontology ont = BuildOntology({Record("ClaimX about taxes", "FALSE")});
  WalkOptions options;
  options.walk_length = 2;
  options.walks_per_entity = 20;
  WalkCorpus walks = GenerateWalkCorpus(ont, options);
  bool found = false;
  for (size_t i = 0; i < walks.structure.size(); ++i) {
    const auto &s = walks.structure[i];
    if (s.size() == 3 && s[0] == "cl:claim_0" && s[1] == "cl:hasLabel") {
      CHECK(walks.lexical[i] ==
            std::vector<std::string>{"claimx", "about", "taxes", "has", "label",
                                     "false"});
      found = true;
    }
  }
  CHECK(found);
  CHECK(LexicalTokens(ont, "cl:ClaimReview") ==
        std::vector<std::string>{"claim", "review"});
}

TEST_CASE("entity vectors follow the IRI-then-label rule") {
  Ontology ont;
  ont.DeclareClass("cl:Entity");
  ont.AddIndividual("cl:entity_oval_office", "cl:Entity", "oval office");
  ont.AddIndividual("cl:entity_ghost", "cl:Entity", "zzz qqq");
  ont.AddIndividual("cl:entity_seen", "cl:Entity", "seen");
  WalkCorpus corpus;
  for (int i = 0; i < 20; ++i) {
    corpus.structure.push_back({"cl:entity_seen", "oval", "office", "words"});
  }
  OntologyEmbeddingOptions options;
  options.skipgram.dim = 6;
  options.skipgram.epochs = 2;
  OntologyEmbedding emb = TrainOntologyEmbedding(ont, corpus, options);
  EmbeddingTable words = SkipGramTrainer(options.skipgram).Train(corpus.Combined());
  CHECK(*emb.vectors().Find("cl:entity_seen") == *words.Find("cl:entity_seen"));
  CHECK(*emb.vectors().Find("cl:entity_oval_office") ==
        (*words.Find("oval") + *words.Find("office")) / 2);
  CHECK(emb.vectors().Find("cl:entity_ghost")->isZero(0));
  CHECK(emb.token_index().count("oval office") == 1);
}

TEST_CASE("co-occurring ontology entities are closer") {
  // Two communities of entities linked through their claims.
  std::vector<FactCheckRecord> records;
  for (int i = 0; i < 40; ++i) {
    if (i % 2 == 0) {
      records.push_back(Record("budget claim " + std::to_string(i), "TRUE",
                               {"Budget", "Deficit"}));
    } else {
      records.push_back(Record("vaccine claim " + std::to_string(i), "FALSE",
                               {"Vaccine", "Measles"}));
    }
  }
  Ontology ont = BuildOntology(records);
  WalkOptions walk;
  walk.walks_per_entity = 20;
  walk.walk_length = 4;
  OntologyEmbeddingOptions options;
  options.skipgram.dim = 16;
  options.skipgram.window = 5;
  options.skipgram.epochs = 10;
  int wins = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    walk.seed = seed;
    options.skipgram.seed = seed;
    OntologyEmbedding emb =
        TrainOntologyEmbedding(ont, GenerateWalkCorpus(ont, walk), options);
    const auto &v = emb.vectors();
    if (v.Cosine("cl:entity_budget", "cl:entity_deficit") >
        v.Cosine("cl:entity_budget", "cl:entity_measles")) {
      ++wins;
    }
  }
  CHECK(wins == 5);
}

TEST_CASE("sentence encoding") {
  OntologyEmbedding emb(2);
  emb.vectors().Set("cl:oval", Eigen::Vector2d(1, 0));
  emb.vectors().Set("cl:oval_office", Eigen::Vector2d(0, 3));
  emb.vectors().Set("cl:taxes", Eigen::Vector2d(2, 2));
  emb.Index("Oval", "cl:oval");
  emb.Index("oval office", "cl:oval_office");
  emb.Index("taxes", "cl:taxes");

  SentenceEncoding none = emb.Encode("Nothing to see here");
  CHECK(none.matched_count == 0);
  CHECK(none.vector.isZero(0));
  CHECK(none.vector.size() == 2);

  SentenceEncoding one = emb.Encode("Inside the Oval Office today");
  CHECK(one.matched_count == 1);
  CHECK(one.matched_entities == std::vector<std::string>{"cl:oval_office"});
  CHECK(one.vector == Eigen::Vector2d(0, 3));

  SentenceEncoding two = emb.Encode("oval office taxes, taxes and the oval");
  CHECK(two.matched_count == 4);
  CHECK(two.matched_entities.size() == 3);
  CHECK((two.vector - Eigen::Vector2d(1, 5.0 / 3)).norm() < 1e-15);

  // Mean never exceeds the largest entity norm.
  Rng rng(3);
  const std::vector<std::string> words = {"oval", "office", "taxes", "x", "y"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    for (int k = 0; k < 6; ++k) text += words[rng.Below(words.size())] + " ";
    CHECK(emb.Encode(text).vector.norm() <= 3.0 + 1e-12);
  }

  testing::TempDir dir;
  emb.Save(dir.File("emb"));
  OntologyEmbedding back = OntologyEmbedding::Load(dir.File("emb"));
  CHECK(back.vectors() == emb.vectors());
  CHECK(back.token_index() == emb.token_index());
  CHECK(back.Encode("the oval office").vector == one.vector);
}

}  // namespace
}  // namespace claimlens
