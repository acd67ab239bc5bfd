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

#include "claimlens/encoder.h"

#include <cmath>
#include <cstring>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

Eigen::VectorXd ReadGolden(const std::string &name) {
  const auto lines = ReadLines(testing::SourcePath("tests/golden/" + name));
  Eigen::VectorXd v(static_cast<Eigen::Index>(lines.size()));
  for (size_t i = 0; i < lines.size(); ++i) v[i] = std::stod(lines[i]);
  return v;
}

TEST_CASE("basic tokenization splits punctuation and strips accents") {
  WordPieceTokenizer tok({"[UNK]", "[CLS]", "[SEP]"});
  CHECK(tok.BasicTokenize("Hello, World!") ==
        std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tok.BasicTokenize("Café  naïve\tÅngström") ==
        std::vector<std::string>{"cafe", "naive", "angstrom"});
  CHECK(tok.BasicTokenize("don't “quote”") ==
        std::vector<std::string>{"don", "'", "t", "\xE2\x80\x9C", "quote",
                                 "\xE2\x80\x9D"});
  CHECK(tok.BasicTokenize("").empty());
}

TEST_CASE("word pieces use greedy longest match") {
  WordPieceTokenizer tok({"[UNK]", "[CLS]", "[SEP]", "un", "##aff", "##able",
                          "want", "##want", "##ed", "runn", "##ing", ","});
  CHECK(tok.Tokenize("unwanted running") ==
        std::vector<std::string>{"un", "##want", "##ed", "runn", "##ing"});
  CHECK(tok.Tokenize("unaffable") ==
        std::vector<std::string>{"un", "##aff", "##able"});
  CHECK(tok.Tokenize("unwantedX, running") ==
        std::vector<std::string>{"[UNK]", ",", "runn", "##ing"});
  CHECK(tok.Tokenize(std::string(101, 'a')) == std::vector<std::string>{"[UNK]"});
  CHECK(tok.ToIds({"un", "zzz"}) == std::vector<int>{3, 0});
  CHECK_THROWS_AS(WordPieceTokenizer({"a"}), FormatError);
}

TEST_CASE("fixture encoder matches the reference implementation") {
  TransformerEncoder enc =
      TransformerEncoder::Load(testing::SourcePath("fixtures/tiny_encoder"));
  CHECK(enc.dim() == 32);
  CHECK(enc.config().num_layers == 2);

  const Eigen::VectorXd golden = ReadGolden("tiny_encoder_cls_a.txt");
  const Eigen::VectorXd cls = enc.Encode("a");
  REQUIRE(cls.size() == golden.size());
  CHECK((cls - golden).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(enc.Pieces("The cat!") ==
        std::vector<std::string>{"[CLS]", "t", "##h", "##e", "c", "##a", "##t",
                                 "!", "[SEP]"});
  const Eigen::VectorXd golden2 = ReadGolden("tiny_encoder_cls_the_cat.txt");
  CHECK((enc.Encode("The cat!") - golden2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fixture generation is reproducible") {
  TransformerEncoder made = MakeFixtureEncoder();
  TransformerEncoder loaded =
      TransformerEncoder::Load(testing::SourcePath("fixtures/tiny_encoder"));
  CHECK(made.params() == loaded.params());
  CHECK(made.tokenizer().vocab() == loaded.tokenizer().vocab());

  testing::TempDir dir;
  made.Save(dir.File("enc"));
  TransformerEncoder back = TransformerEncoder::Load(dir.File("enc"));
  CHECK(back.params() == made.params());
  CHECK(back.config().ToJson() == made.config().ToJson());
}

TEST_CASE("encoder contract") {
  TransformerEncoder enc = MakeFixtureEncoder();
  const Eigen::VectorXd a = enc.Encode("Some sentence about taxes.");
  const Eigen::VectorXd b = enc.Encode("Some sentence about taxes.");
  CHECK(a.size() == enc.dim());
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);

  // Truncation keeps [CLS] ... [SEP] within max_tokens.
  std::string long_text;
  for (int i = 0; i < 200; ++i) long_text += "word ";
  auto pieces = enc.Pieces(long_text);
  CHECK(static_cast<int>(pieces.size()) == enc.max_tokens());
  CHECK(pieces.back() == "[SEP]");
  CHECK(enc.Encode(long_text).size() == enc.dim());

  EncoderOutput out = enc.EncodeWithAttention("a b c");
  CHECK(out.tokens.size() == 5);
  REQUIRE(out.attention.size() == 2);
  REQUIRE(out.attention[0].size() == 2);
  for (const auto &layer : out.attention) {
    for (const auto &head : layer) {
      CHECK(head.rows() == 5);
      CHECK(head.cols() == 5);
      for (Eigen::Index r = 0; r < 5; ++r) {
        CHECK(std::abs(head.row(r).sum() - 1.0) < 1e-12);
      }
    }
  }
  CHECK(out.cls == enc.Encode("a b c"));

  TransformerEncoder empty;
  CHECK_FALSE(empty.loaded());
  CHECK_THROWS_AS(empty.Encode("x"), StateError);
}

TEST_CASE("encoder backward matches central differences") {
  TransformerEncoder enc = MakeFixtureEncoder(5);
  const std::vector<int> ids = enc.tokenizer().ToIds(enc.Pieces("ab, c"));
  Rng rng(2);
  Eigen::VectorXd w(enc.dim());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.Normal();
  auto cache = enc.NewCache();
  enc.Forward(ids, cache.get());
  ParamMap grads;
  enc.Backward(*cache, w, &grads);

  std::vector<double> fds, analytics;
  ParamMap &params = enc.mutable_params();
  for (auto &[name, p] : params) {
    // Sample a few entries per tensor, preferring ones the input touches.
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::Index idx = static_cast<Eigen::Index>(rng.Below(p.size()));
      if (name == "embeddings.word_embeddings.weight") {
        idx = ids[trial % ids.size()] * p.cols() + rng.Below(p.cols());
      } else if (name == "embeddings.position_embeddings.weight") {
        idx = static_cast<Eigen::Index>(rng.Below(ids.size() * p.cols()));
      }
      // Row-major index into column-major storage.
      const Eigen::Index r = idx / p.cols(), c = idx % p.cols();
      const double saved = p(r, c);
      const double h = 1e-5;
      p(r, c) = saved + h;
      const double up = w.dot(enc.Forward(ids));
      p(r, c) = saved - h;
      const double down = w.dot(enc.Forward(ids));
      p(r, c) = saved;
      const double fd = (up - down) / (2 * h);
      auto it = grads.find(name);
      const double analytic = it == grads.end() ? 0.0 : it->second(r, c);
      fds.push_back(fd);
      analytics.push_back(analytic);
    }
  }
  CHECK(fds.size() > 100);
  Eigen::Map<Eigen::VectorXd> fd(fds.data(), fds.size());
  Eigen::Map<Eigen::VectorXd> an(analytics.data(), analytics.size());
  CHECK((fd - an).norm() / (fd.norm() + an.norm()) < 1e-4);
}

TEST_CASE("Adam steps by the learning rate on the first update") {
  ParamMap params = {{"w", Eigen::MatrixXd::Constant(2, 1, 1.0)}};
  ParamMap grads = {{"w", (Eigen::MatrixXd(2, 1) << 3.0, -0.5).finished()}};
  AdamOptimizer adam(0.1);
  adam.Step(params, grads);
  CHECK(params["w"](0, 0) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(params["w"](1, 0) == doctest::Approx(1.1).epsilon(1e-6));
  CHECK(adam.steps() == 1);
  CHECK_THROWS_AS(AdamOptimizer(0.0), ArgumentError);
  ParamMap zeros = ZerosLike(params);
  CHECK(zeros["w"].isZero(0));
}

}  // namespace
}  // namespace claimlens
