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

#ifndef CLAIMLENS_KGRAPH_H_
#define CLAIMLENS_KGRAPH_H_

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/corpus.h"
#include "claimlens/lexfeat.h"

namespace claimlens {

// Bidirectional name <-> dense id map.
class Vocabulary {
 public:
  // Returns the id of `name`, registering it if new.
  int Add(const std::string &name);
  // -1 when absent.
  int Find(const std::string &name) const;
  const std::string &Name(int id) const { return names_.at(id); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string> &names() const { return names_; }

  // SHA-256 over the newline-joined names in id order.
  std::string Hash() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

struct Triple {
  int head = 0;
  int relation = 0;
  int tail = 0;

  auto operator<=>(const Triple &) const = default;
};

class TripleGraph {
 public:
  // Registers names as needed; returns false for a duplicate triple.
  bool Add(const std::string &head, const std::string &relation,
           const std::string &tail);
  // Ids must already be registered.
  bool Add(const Triple &triple);

  bool Contains(const Triple &triple) const { return set_.count(triple) > 0; }

  Vocabulary &entities() { return entities_; }
  Vocabulary &relations() { return relations_; }
  const Vocabulary &entities() const { return entities_; }
  const Vocabulary &relations() const { return relations_; }
  // Insertion order.
  const std::vector<Triple> &triples() const { return triples_; }

  // Triples touching `entity` as head or tail.
  std::vector<Triple> Incident(int entity) const;

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::set<Triple> set_;
};

// TSV head<TAB>relation<TAB>tail, one triple per line.
void SaveTriples(const TripleGraph &graph, const std::string &path);
TripleGraph LoadTriples(const std::string &path);

// ---------------------------------------------------------------------------
// Entity linking

struct EntityLink {
  std::string entity;
  double score = 0.0;
};

class EntityLinker {
 public:
  virtual ~EntityLinker() = default;
  // Entities with score >= threshold, best first, each entity once.
  // Backend failures raise LinkerError.
  virtual std::vector<EntityLink> Link(const std::string &text,
                                       double threshold) const = 0;
};

// Offline linker: greedy longest token match against a surface-form table.
// Every match scores 1.0.
class GazetteerLinker : public EntityLinker {
 public:
  void Add(const std::string &surface, const std::string &entity);
  // TSV surface<TAB>entity_id; '#' comments and blank lines skipped.
  static GazetteerLinker Load(const std::string &path);

  std::vector<EntityLink> Link(const std::string &text,
                               double threshold) const override;
  size_t size() const { return surfaces_.size(); }

 private:
  std::unordered_map<std::string, std::string> surfaces_;  // joined tokens
  size_t max_tokens_ = 0;
};

// Client for a TagMe-style annotation service. Reads the "annotations"
// array (title, rho) of the JSON reply.
class TagMeLinker : public EntityLinker {
 public:
  TagMeLinker(std::string endpoint, std::string token, int timeout_seconds = 10);
  std::vector<EntityLink> Link(const std::string &text,
                               double threshold) const override;

 private:
  std::string endpoint_;
  std::string token_;
  int timeout_seconds_;
};

// ---------------------------------------------------------------------------
// Metadata graph

std::string LengthBucket(int word_count);       // le10, 11to25, gt25
std::string SentimentBucket(double sentiment);  // neg, neu, pos
std::string SentenceNode(const std::string &instance_id);

struct MetadataGraphOptions {
  double link_threshold = 0.1;
};

// Every instance contributes a sentence node; missing metadata omits the
// corresponding triple. Linker failures are logged and skip mentions.
TripleGraph BuildMetadataGraph(
    const Corpus &corpus, const EntityLinker *linker,
    const MetadataGraphOptions &options = {},
    const SentimentLexicon &sentiment = SentimentLexicon::Default());

// ---------------------------------------------------------------------------
// TransE

enum class TransENorm { kL1, kL2 };
TransENorm ParseTransENorm(const std::string &name);
std::string TransENormName(TransENorm norm);

struct TransEOptions {
  int dim = 50;
  double margin = 1.0;
  double learning_rate = 0.01;
  int epochs = 100;
  int batch_size = 128;
  TransENorm norm = TransENorm::kL2;
  uint64_t seed = 1;
};

struct TransEModel {
  Eigen::MatrixXd entity_emb;    // |E| x k
  Eigen::MatrixXd relation_emb;  // |R| x k
  TransENorm norm = TransENorm::kL2;
  double margin = 1.0;

  int dim() const { return static_cast<int>(entity_emb.cols()); }

  // d(h + r, t); unknown ids raise ArgumentError.
  double Score(int head, int relation, int tail) const;
};

// Translation distance between raw vectors.
double TransEDistance(const Eigen::VectorXd &head,
                      const Eigen::VectorXd &relation,
                      const Eigen::VectorXd &tail, TransENorm norm);

// Sum over pairs of max(0, margin + d(pos) - d(neg)) and its gradient with
// respect to both embedding tables (same shapes). Exposed for gradient checks.
double TransEHingeLoss(const Eigen::MatrixXd &entity_emb,
                       const Eigen::MatrixXd &relation_emb,
                       const std::vector<Triple> &positives,
                       const std::vector<Triple> &negatives, double margin,
                       TransENorm norm, Eigen::MatrixXd *grad_entity = nullptr,
                       Eigen::MatrixXd *grad_relation = nullptr);

// Minibatch SGD on the margin ranking loss. Head or tail is corrupted
// uniformly; corruptions that are true triples are resampled. Touched
// entity rows are projected back to the unit sphere after every step.
TransEModel TrainTransE(const TripleGraph &graph, const TransEOptions &options);

struct RankingMetrics {
  double mean_rank = 0.0;
  double mrr = 0.0;
};

// Tail prediction over all entities; with `filtered`, other true tails of
// (h, r) are removed from the candidate list.
RankingMetrics EvaluateTailRanking(const TransEModel &model,
                                   const TripleGraph &graph,
                                   const std::vector<Triple> &triples,
                                   bool filtered = true);

enum class MetadataEncoding { kNode, kNeighborMean };
MetadataEncoding ParseMetadataEncoding(const std::string &name);

// kNode returns the sentence node's own row; kNeighborMean averages the
// rows of the entities it links to. Absent node raises ArgumentError.
Eigen::VectorXd EncodeMetadata(const ClaimInstance &instance,
                               const TripleGraph &graph,
                               const TransEModel &model,
                               MetadataEncoding encoding =
                                   MetadataEncoding::kNode);

// Checkpoint: `<prefix>.bin` tensors and `<prefix>.json` sidecar with the
// dimensions, norm, margin and vocabulary hashes. Loading checks the hashes
// against `graph`.
void SaveTransE(const TransEModel &model, const TripleGraph &graph,
                const std::string &prefix);
TransEModel LoadTransE(const std::string &prefix, const TripleGraph &graph);

}  // namespace claimlens

#endif  // CLAIMLENS_KGRAPH_H_
