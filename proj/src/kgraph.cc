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

#include "claimlens/kgraph.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "claimlens/errors.h"
#include "claimlens/hashing.h"
#include "claimlens/random.h"
#include "claimlens/tensor_io.h"
#include "claimlens/text.h"

namespace claimlens {

int Vocabulary::Add(const std::string &name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

int Vocabulary::Find(const std::string &name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

std::string Vocabulary::Hash() const { return Sha256Hex(Join(names_, "\n")); }

bool TripleGraph::Add(const std::string &head, const std::string &relation,
                      const std::string &tail) {
  for (const auto *name : {&head, &relation, &tail}) {
    if (name->empty() || name->find_first_of("\t\n") != std::string::npos) {
      throw ArgumentError("graph names must be non-empty and tab-free: '" +
                          *name + "'");
    }
  }
  Triple t;
  t.head = entities_.Add(head);
  t.relation = relations_.Add(relation);
  t.tail = entities_.Add(tail);
  return Add(t);
}

bool TripleGraph::Add(const Triple &triple) {
  if (triple.head < 0 || triple.head >= entities_.size() || triple.tail < 0 ||
      triple.tail >= entities_.size() || triple.relation < 0 ||
      triple.relation >= relations_.size()) {
    throw ArgumentError("triple refers to an unregistered id");
  }
  if (!set_.insert(triple).second) return false;
  triples_.push_back(triple);
  return true;
}

std::vector<Triple> TripleGraph::Incident(int entity) const {
  std::vector<Triple> out;
  for (const auto &t : triples_) {
    if (t.head == entity || t.tail == entity) out.push_back(t);
  }
  return out;
}

void SaveTriples(const TripleGraph &graph, const std::string &path) {
  std::string out;
  for (const auto &t : graph.triples()) {
    out += graph.entities().Name(t.head) + "\t" +
           graph.relations().Name(t.relation) + "\t" +
           graph.entities().Name(t.tail) + "\n";
  }
  WriteFile(path, out);
}

TripleGraph LoadTriples(const std::string &path) {
  TripleGraph graph;
  const auto lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = lines[i].find('\t', start);
      fields.push_back(lines[i].substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw FormatError(path + " line " + std::to_string(i + 1) +
                        ": expected 3 tab-separated fields");
    }
    graph.Add(fields[0], fields[1], fields[2]);
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Gazetteer

void GazetteerLinker::Add(const std::string &surface, const std::string &entity) {
  const auto tokens = Tokenize(surface);
  if (tokens.empty() || entity.empty()) {
    throw ArgumentError("gazetteer entry needs a surface form and an entity");
  }
  surfaces_[Join(tokens, " ")] = entity;
  max_tokens_ = std::max(max_tokens_, tokens.size());
}

GazetteerLinker GazetteerLinker::Load(const std::string &path) {
  GazetteerLinker linker;
  const auto lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(path + " line " + std::to_string(i + 1) +
                        ": expected surface<TAB>entity");
    }
    linker.Add(line.substr(0, tab), line.substr(tab + 1));
  }
  return linker;
}

std::vector<EntityLink> GazetteerLinker::Link(const std::string &text,
                                              double threshold) const {
  std::vector<EntityLink> links;
  if (threshold > 1.0) return links;
  const auto tokens = Tokenize(text);
  size_t i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    const size_t longest = std::min(max_tokens_, tokens.size() - i);
    for (size_t n = longest; n >= 1; --n) {
      std::string key = tokens[i];
      for (size_t k = 1; k < n; ++k) key += " " + tokens[i + k];
      auto it = surfaces_.find(key);
      if (it != surfaces_.end()) {
        const bool seen = std::any_of(links.begin(), links.end(),
                                      [&](const EntityLink &l) {
                                        return l.entity == it->second;
                                      });
        if (!seen) links.push_back({it->second, 1.0});
        matched = n;
        break;
      }
    }
    i += matched ? matched : 1;
  }
  return links;
}

// ---------------------------------------------------------------------------
// Metadata graph

std::string LengthBucket(int word_count) {
  if (word_count <= 10) return "le10";
  if (word_count <= 25) return "11to25";
  return "gt25";
}

std::string SentimentBucket(double sentiment) {
  if (sentiment < 0) return "neg";
  if (sentiment > 0) return "pos";
  return "neu";
}

std::string SentenceNode(const std::string &instance_id) {
  return "sentence:" + instance_id;
}

namespace {

std::string Slug(const std::string &value) {
  std::string out;
  for (const auto &token : Tokenize(value)) {
    if (!out.empty()) out += '_';
    out += token;
  }
  return out.empty() ? "unknown" : out;
}

}  // namespace

TripleGraph BuildMetadataGraph(const Corpus &corpus, const EntityLinker *linker,
                               const MetadataGraphOptions &options,
                               const SentimentLexicon &sentiment) {
  TripleGraph graph;
  size_t link_failures = 0;
  for (const auto &instance : corpus.instances()) {
    const std::string node = SentenceNode(instance.id);
    if (instance.speaker) {
      graph.Add(node, "hasSpeaker", "speaker:" + Slug(*instance.speaker));
    }
    if (instance.speaker_title) {
      graph.Add(node, "hasSpeakerTitle", "title:" + Slug(*instance.speaker_title));
    }
    if (instance.speaker_party) {
      graph.Add(node, "hasParty", "party:" + Slug(*instance.speaker_party));
    }
    const int words = static_cast<int>(Tokenize(instance.text).size());
    graph.Add(node, "hasLengthBucket", "length:" + LengthBucket(words));
    graph.Add(node, "hasSentimentBucket",
              "sentiment:" + SentimentBucket(SentimentScore(instance.text, sentiment)));
    if (!linker) continue;
    try {
      for (const auto &link : linker->Link(instance.text, options.link_threshold)) {
        graph.Add(node, "mentions", "entity:" + link.entity);
      }
    } catch (const LinkerError &e) {
      if (link_failures++ == 0) {
        spdlog::warn("entity linking failed ({}); mentions omitted", e.what());
      }
    }
  }
  if (link_failures > 1) {
    spdlog::warn("entity linking failed for {} instances", link_failures);
  }
  return graph;
}

// ---------------------------------------------------------------------------
// TransE

TransENorm ParseTransENorm(const std::string &name) {
  if (name == "L1" || name == "l1") return TransENorm::kL1;
  if (name == "L2" || name == "l2") return TransENorm::kL2;
  throw ArgumentError("unknown TransE norm '" + name + "'");
}

std::string TransENormName(TransENorm norm) {
  return norm == TransENorm::kL1 ? "L1" : "L2";
}

double TransEDistance(const Eigen::VectorXd &head,
                      const Eigen::VectorXd &relation,
                      const Eigen::VectorXd &tail, TransENorm norm) {
  const Eigen::VectorXd diff = head + relation - tail;
  return norm == TransENorm::kL1 ? diff.lpNorm<1>() : diff.norm();
}

double TransEModel::Score(int head, int relation, int tail) const {
  const int ne = static_cast<int>(entity_emb.rows());
  const int nr = static_cast<int>(relation_emb.rows());
  if (head < 0 || head >= ne || tail < 0 || tail >= ne || relation < 0 ||
      relation >= nr) {
    throw ArgumentError("TransE score for unknown id");
  }
  return TransEDistance(entity_emb.row(head).transpose(),
                        relation_emb.row(relation).transpose(),
                        entity_emb.row(tail).transpose(), norm);
}

namespace {

// Distance and its gradient with respect to (h + r - t).
double DistanceAndGrad(const Eigen::MatrixXd &e, const Eigen::MatrixXd &r,
                       const Triple &t, TransENorm norm, Eigen::VectorXd *grad) {
  const Eigen::VectorXd diff =
      (e.row(t.head) + r.row(t.relation) - e.row(t.tail)).transpose();
  if (norm == TransENorm::kL1) {
    *grad = diff.unaryExpr([](double x) {
      return static_cast<double>((x > 0) - (x < 0));
    });
    return diff.lpNorm<1>();
  }
  const double d = diff.norm();
  *grad = d > 0 ? Eigen::VectorXd(diff / d) : Eigen::VectorXd::Zero(diff.size());
  return d;
}

// Calls sink(is_entity, row, gradient) for every active pair.
template <typename Sink>
double HingeLoss(const Eigen::MatrixXd &e, const Eigen::MatrixXd &r,
                 const std::vector<Triple> &pos, const std::vector<Triple> &neg,
                 double margin, TransENorm norm, Sink &&sink) {
  if (pos.size() != neg.size()) {
    throw ArgumentError("positive and negative batches differ in size");
  }
  double loss = 0.0;
  Eigen::VectorXd gp, gn;
  for (size_t i = 0; i < pos.size(); ++i) {
    const double dp = DistanceAndGrad(e, r, pos[i], norm, &gp);
    const double dn = DistanceAndGrad(e, r, neg[i], norm, &gn);
    const double term = margin + dp - dn;
    if (term <= 0) continue;
    loss += term;
    sink(true, pos[i].head, gp);
    sink(false, pos[i].relation, gp);
    sink(true, pos[i].tail, -gp);
    sink(true, neg[i].head, -gn);
    sink(false, neg[i].relation, -gn);
    sink(true, neg[i].tail, gn);
  }
  return loss;
}

void NormalizeRow(Eigen::MatrixXd &m, Eigen::Index row) {
  const double n = m.row(row).norm();
  if (n > 0) m.row(row) /= n;
}

}  // namespace

double TransEHingeLoss(const Eigen::MatrixXd &entity_emb,
                       const Eigen::MatrixXd &relation_emb,
                       const std::vector<Triple> &positives,
                       const std::vector<Triple> &negatives, double margin,
                       TransENorm norm, Eigen::MatrixXd *grad_entity,
                       Eigen::MatrixXd *grad_relation) {
  if (grad_entity) grad_entity->setZero(entity_emb.rows(), entity_emb.cols());
  if (grad_relation) grad_relation->setZero(relation_emb.rows(), relation_emb.cols());
  return HingeLoss(entity_emb, relation_emb, positives, negatives, margin, norm,
                   [&](bool is_entity, int row, const Eigen::VectorXd &g) {
                     Eigen::MatrixXd *target = is_entity ? grad_entity : grad_relation;
                     if (target) target->row(row) += g.transpose();
                   });
}

TransEModel TrainTransE(const TripleGraph &graph, const TransEOptions &options) {
  if (graph.triples().empty()) throw ArgumentError("TransE needs at least one triple");
  if (options.dim < 2) throw ArgumentError("TransE dim must be >= 2");
  if (options.margin <= 0) throw ArgumentError("TransE margin must be positive");
  const int ne = graph.entities().size();
  const int nr = graph.relations().size();
  const int k = options.dim;
  Rng rng(options.seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(k));
  TransEModel model;
  model.norm = options.norm;
  model.margin = options.margin;
  model.entity_emb.resize(ne, k);
  model.relation_emb.resize(nr, k);
  for (Eigen::Index i = 0; i < model.relation_emb.size(); ++i) {
    model.relation_emb.data()[i] = rng.Uniform(-bound, bound);
  }
  for (Eigen::Index i = 0; i < model.entity_emb.size(); ++i) {
    model.entity_emb.data()[i] = rng.Uniform(-bound, bound);
  }
  for (int i = 0; i < nr; ++i) NormalizeRow(model.relation_emb, i);
  for (int i = 0; i < ne; ++i) NormalizeRow(model.entity_emb, i);

  std::vector<Triple> order = graph.triples();
  const size_t batch = static_cast<size_t>(std::max(1, options.batch_size));
  std::vector<Triple> pos, neg;
  std::map<int, Eigen::VectorXd> entity_grad, relation_grad;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.Shuffle(order);
    for (size_t start = 0; start < order.size(); start += batch) {
      pos.clear();
      neg.clear();
      for (size_t i = start; i < std::min(start + batch, order.size()); ++i) {
        const Triple &t = order[i];
        const bool corrupt_head = rng.Bernoulli(0.5);
        Triple c = t;
        bool found = false;
        for (int tries = 0; tries < 100 && !found; ++tries) {
          const int e = static_cast<int>(rng.Below(static_cast<uint64_t>(ne)));
          (corrupt_head ? c.head : c.tail) = e;
          found = !graph.Contains(c);
        }
        if (!found) continue;
        pos.push_back(t);
        neg.push_back(c);
      }
      entity_grad.clear();
      relation_grad.clear();
      HingeLoss(model.entity_emb, model.relation_emb, pos, neg, options.margin,
                options.norm, [&](bool is_entity, int row, const Eigen::VectorXd &g) {
                  auto &target = is_entity ? entity_grad : relation_grad;
                  auto it = target.find(row);
                  if (it == target.end()) {
                    target.emplace(row, g);
                  } else {
                    it->second += g;
                  }
                });
      for (const auto &[row, g] : relation_grad) {
        model.relation_emb.row(row) -= options.learning_rate * g.transpose();
      }
      for (const auto &[row, g] : entity_grad) {
        model.entity_emb.row(row) -= options.learning_rate * g.transpose();
      }
      for (const auto &t : pos) {
        NormalizeRow(model.entity_emb, t.head);
        NormalizeRow(model.entity_emb, t.tail);
      }
      for (const auto &t : neg) {
        NormalizeRow(model.entity_emb, t.head);
        NormalizeRow(model.entity_emb, t.tail);
      }
    }
  }
  return model;
}

RankingMetrics EvaluateTailRanking(const TransEModel &model,
                                   const TripleGraph &graph,
                                   const std::vector<Triple> &triples,
                                   bool filtered) {
  RankingMetrics metrics;
  if (triples.empty()) return metrics;
  const int ne = static_cast<int>(model.entity_emb.rows());
  for (const auto &t : triples) {
    const double target = model.Score(t.head, t.relation, t.tail);
    int rank = 1;
    for (int e = 0; e < ne; ++e) {
      if (e == t.tail) continue;
      if (filtered && graph.Contains(Triple{t.head, t.relation, e})) continue;
      if (model.Score(t.head, t.relation, e) < target) ++rank;
    }
    metrics.mean_rank += rank;
    metrics.mrr += 1.0 / rank;
  }
  metrics.mean_rank /= static_cast<double>(triples.size());
  metrics.mrr /= static_cast<double>(triples.size());
  return metrics;
}

MetadataEncoding ParseMetadataEncoding(const std::string &name) {
  if (name == "node") return MetadataEncoding::kNode;
  if (name == "neighbor_mean") return MetadataEncoding::kNeighborMean;
  throw ArgumentError("unknown metadata encoding '" + name + "'");
}

Eigen::VectorXd EncodeMetadata(const ClaimInstance &instance,
                               const TripleGraph &graph,
                               const TransEModel &model,
                               MetadataEncoding encoding) {
  const int node = graph.entities().Find(SentenceNode(instance.id));
  if (node < 0 || node >= model.entity_emb.rows()) {
    throw ArgumentError("no graph node for instance '" + instance.id + "'");
  }
  if (encoding == MetadataEncoding::kNode) {
    return model.entity_emb.row(node).transpose();
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim());
  int count = 0;
  for (const auto &t : graph.triples()) {
    if (t.head != node) continue;
    sum += model.entity_emb.row(t.tail).transpose();
    ++count;
  }
  return count ? Eigen::VectorXd(sum / count) : sum;
}

void SaveTransE(const TransEModel &model, const TripleGraph &graph,
                const std::string &prefix) {
  TensorBundle bundle;
  bundle.Put("transe.entity", model.entity_emb);
  bundle.Put("transe.relation", model.relation_emb);
  bundle.Write(prefix + ".bin");
  nlohmann::json sidecar = {
      {"type", "transe"},
      {"dim", model.dim()},
      {"entities", model.entity_emb.rows()},
      {"relations", model.relation_emb.rows()},
      {"norm", TransENormName(model.norm)},
      {"margin", model.margin},
      {"entity_vocab_sha256", graph.entities().Hash()},
      {"relation_vocab_sha256", graph.relations().Hash()},
  };
  WriteFile(prefix + ".json", sidecar.dump(2) + "\n");
}

TransEModel LoadTransE(const std::string &prefix, const TripleGraph &graph) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(ReadFile(prefix + ".json"));
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(prefix + ".json: " + e.what());
  }
  if (sidecar.value("type", "") != "transe") {
    throw FormatError(prefix + ".json is not a TransE sidecar");
  }
  if (sidecar.value("entity_vocab_sha256", "") != graph.entities().Hash() ||
      sidecar.value("relation_vocab_sha256", "") != graph.relations().Hash()) {
    throw StateError(prefix + ": checkpoint vocabulary does not match the graph");
  }
  const TensorBundle bundle = TensorBundle::Read(prefix + ".bin");
  const int dim = sidecar.at("dim").get<int>();
  TransEModel model;
  model.entity_emb = bundle.Get("transe.entity", graph.entities().size(), dim);
  model.relation_emb = bundle.Get("transe.relation", graph.relations().size(), dim);
  model.norm = ParseTransENorm(sidecar.at("norm").get<std::string>());
  model.margin = sidecar.at("margin").get<double>();
  return model;
}

}  // namespace claimlens
