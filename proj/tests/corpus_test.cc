// tests/corpus_test.cc

// Copyright 2026  The tlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "core/corpus.h"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "core/base64.h"
#include "core/checkpoint.h"
#include "core/error.h"
#include "doctest.h"

using namespace tlab;

namespace {

FamilyOptions SmallFamily() {
  FamilyOptions o;
  o.num_phones = 6;
  o.feature_dim = 4;
  o.lexicon_size = 20;
  return o;
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("base64 round trip and rejection") {
  std::vector<std::uint8_t> bytes;
  for (int n = 0; n < 40; ++n) {
    CHECK(*Base64Decode(Base64Encode(bytes)) == bytes);
    bytes.push_back(static_cast<std::uint8_t>(n * 37 + 11));
  }
  CHECK(Base64Encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}) == "Zm9vYg==");
  CHECK_FALSE(Base64Decode("Zm9v!g==").has_value());
  CHECK_FALSE(Base64Decode("Zm9").has_value());
  std::vector<double> vals{0.0, -0.0, 1.5, -3.25e300, 5e-324,
                           std::numeric_limits<double>::infinity()};
  auto back = UnpackDoublesLE(PackDoublesLE(vals));
  REQUIRE(back.has_value());
  for (std::size_t i = 0; i < vals.size(); ++i)
    CHECK(std::signbit((*back)[i]) == std::signbit(vals[i]));
  CHECK(*back == vals);
  // 1.0 is 0x3FF0000000000000; little-endian puts the exponent byte last.
  auto one = PackDoublesLE(std::vector<double>{1.0});
  CHECK(one == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0xF0, 0x3F});
}

TEST_CASE("language family relatedness extremes") {
  auto same = MakeLanguageFamily(3, 3, 1.0, SmallFamily());
  CHECK(same[0].emission_means == same[1].emission_means);
  CHECK(same[1].emission_means == same[2].emission_means);
  bool same_words = same[0].lexicon[0].word == same[1].lexicon[0].word &&
                    same[0].lexicon[1].word == same[1].lexicon[1].word;
  CHECK_FALSE(same_words);
  CHECK_THROWS_AS(MakeLanguageFamily(3, 2, 1.5, SmallFamily()), Error);
  CHECK_THROWS_AS(MakeLanguageFamily(3, 0, 0.5, SmallFamily()), Error);
  auto again = MakeLanguageFamily(3, 3, 1.0, SmallFamily());
  CHECK(again[2].emission_means == same[2].emission_means);
}

TEST_CASE("independent languages have the squared distance of independent draws") {
  // For i.i.d. N(0, 1) entries, E|a - b|^2 per entry is 2, and with
  // relatedness r the shared part cancels: 2 (1 - r^2).
  for (double r : {0.0, 0.6}) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto fam = MakeLanguageFamily(seed, 2, r, SmallFamily());
      Matrix d = fam[0].emission_means - fam[1].emission_means;
      sum += d.squaredNorm();
      n += static_cast<std::size_t>(d.size());
    }
    double mean = sum / static_cast<double>(n);
    double expect = 2.0 * (1.0 - r * r);
    // (a-b)^2 / expect is chi-square(1): sd sqrt(2) per entry.
    double se = expect * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::fabs(mean - expect) < 4.0 * se);
  }
}

TEST_CASE("noiseless unit-duration features are the emission means") {
  auto fam = MakeLanguageFamily(5, 1, 0.5, SmallFamily());
  DomainSpec dom;
  dom.noise_std = 0.0;
  dom.min_duration = dom.max_duration = 1;
  auto utts = Synthesize(fam[0], dom, 30, 9);
  for (const auto &u : utts) {
    REQUIRE(u.num_frames() == static_cast<int>(u.tokens.size()));
    for (int t = 0; t < u.num_frames(); ++t) {
      // Nearest-mean classification.
      int best = -1;
      double best_d = 1e300;
      for (int k = 0; k < fam[0].emission_means.rows(); ++k) {
        double d = (fam[0].emission_means.row(k) - u.features.row(t)).squaredNorm();
        if (d < best_d) best_d = d, best = k;
      }
      CHECK(best == u.tokens[t]);
      CHECK(best_d == 0.0);
      CHECK(u.emit_frames[t] == t + 1);
    }
  }
}

TEST_CASE("utterance invariants and band feasibility") {
  auto fam = MakeLanguageFamily(6, 2, 0.7, SmallFamily());
  DomainSpec dom;
  dom.channel_offset = Vector::Zero(4);
  DomainSpec shifted = DomainShift(dom, 1.0);
  for (const DomainSpec &d : {dom, shifted}) {
    for (const auto &u : Synthesize(fam[1], d, 100, 2, {1, 4})) {
      Vocabulary v = fam[1].vocab();
      CHECK(v.Words(u.tokens) == u.words);
      std::vector<int> spelled;
      for (std::size_t w = 0; w < u.words.size(); ++w) {
        if (w) spelled.push_back(v.boundary());
        auto t = v.Tokens(u.words[w]);
        spelled.insert(spelled.end(), t.begin(), t.end());
      }
      CHECK(spelled == u.tokens);
      CHECK(std::is_sorted(u.emit_frames.begin(), u.emit_frames.end()));
      CHECK(u.emit_frames.front() == 1);
      CHECK(u.emit_frames.back() <= u.num_frames());
      AlignmentBand b = BandFromAlignment(u.emit_frames, 0, 0, u.num_frames());
      // A finite loss on a uniform lattice means at least one path survives.
      LogitLattice lat = LogitLattice::Zeros(u.num_frames(), u.tokens, v.size());
      CHECK(std::isfinite(RnntForward(lat, b).loss));
    }
  }
}

TEST_CASE("uniform word frequencies at exponent zero") {
  FamilyOptions o = SmallFamily();
  o.zipf_exponent = 0.0;
  auto fam = MakeLanguageFamily(8, 1, 0.0, o);
  DomainSpec dom;
  auto utts = Synthesize(fam[0], dom, 6000, 4, {3, 3});
  std::map<std::string, int> counts;
  int n = 0;
  for (const auto &u : utts)
    for (const auto &w : u.words) ++counts[w], ++n;
  double expect = static_cast<double>(n) / 20.0;
  double chi2 = 0.0;
  for (const auto &e : fam[0].lexicon) {
    double c = counts[e.word];
    chi2 += (c - expect) * (c - expect) / expect;
  }
  // 19 degrees of freedom; 0.1% critical value is 43.82.
  CHECK(chi2 < 43.82);
}

TEST_CASE("Zipf law: Kolmogorov-Smirnov on ranks") {
  auto fam = MakeLanguageFamily(9, 1, 0.0, SmallFamily());
  DomainSpec dom;
  auto utts = Synthesize(fam[0], dom, 5000, 5, {2, 3});
  std::map<std::string, int> rank;
  for (std::size_t r = 0; r < fam[0].lexicon.size(); ++r)
    rank[fam[0].lexicon[r].word] = static_cast<int>(r);
  std::vector<double> hist(20, 0.0);
  double n = 0;
  for (const auto &u : utts)
    for (const auto &w : u.words) hist[rank.at(w)] += 1, n += 1;
  REQUIRE(n >= 1e4);
  double z = 0.0;
  for (int r = 1; r <= 20; ++r) z += 1.0 / r;
  double emp = 0.0, theo = 0.0, d = 0.0;
  for (int r = 0; r < 20; ++r) {
    emp += hist[r] / n;
    theo += 1.0 / (r + 1) / z;
    d = std::max(d, std::fabs(emp - theo));
  }
  // 0.1% critical value of the KS statistic is 1.95 / sqrt(n).
  CHECK(d < 1.95 / std::sqrt(n));
}

TEST_CASE("determinism and per-utterance streams") {
  auto fam = MakeLanguageFamily(10, 1, 0.0, SmallFamily());
  DomainSpec dom;
  auto a = Synthesize(fam[0], dom, 20, 77);
  auto b = Synthesize(fam[0], dom, 20, 77);
  CHECK(a == b);
  auto longer = Synthesize(fam[0], dom, 25, 77);
  for (int i = 0; i < 20; ++i) CHECK(longer[i] == a[i]);
  CHECK_FALSE(Synthesize(fam[0], dom, 20, 78) == a);
  CHECK(DeriveSeed(1, 2) != DeriveSeed(2, 1));
}

TEST_CASE("domain shift") {
  DomainSpec d;
  d.channel_offset = Vector::Zero(4);
  CHECK(DomainShift(d, 0.0) == d);
  double prev = -1.0;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    DomainSpec sh = DomainShift(d, s);
    CHECK(sh.channel_offset.norm() > prev);
    prev = sh.channel_offset.norm();
    CHECK(sh.noise_std > d.noise_std);
    CHECK(sh.max_duration >= d.max_duration);
  }
  CHECK_THROWS_AS(DomainShift(d, -1.0), Error);
}

TEST_CASE("corpus file round trip and faults") {
  auto fam = MakeLanguageFamily(11, 1, 0.0, SmallFamily());
  DomainSpec dom;
  Corpus c = MakeCorpus(fam[0], Synthesize(fam[0], dom, 5, 3));
  std::string path = TempPath("tlab_corpus_test.jsonl");
  SaveCorpus(c, path);
  Corpus back = LoadCorpus(path);
  CHECK(back == c);
  CHECK(SerializeCorpus(back) == SerializeCorpus(c));
  std::filesystem::remove(path);

  std::string text = SerializeCorpus(c);
  SUBCASE("version mismatch") {
    auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"version\":2");
    CHECK_THROWS_WITH(ParseCorpus(text), doctest::Contains("unsupported corpus version"));
  }
  SUBCASE("corrupted base64 reports its line") {
    // Line 4 holds the third utterance.
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) start = text.find('\n', start) + 1;
    auto pos = text.find("\"features\":\"", start) + 12;
    text[pos] = '*';
    try {
      ParseCorpus(text);
      FAIL("expected a parse error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::kParse);
      CHECK(std::string(e.what()) ==
            "corpus line 4: corrupted base64 feature payload");
    }
  }
  SUBCASE("truncated file") {
    text.resize(text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_WITH(ParseCorpus(text), doctest::Contains("expected 5 utterances"));
  }
  CHECK_THROWS_AS(LoadCorpus(TempPath("tlab_no_such_file.jsonl")), Error);
}

TEST_CASE("checkpoint round trip preserves every bit") {
  ModelConfig cfg;
  cfg.feature_dim = 4;
  cfg.vocab_size = 7;
  cfg.encoder_layers = 2;
  Checkpoint ck;
  ck.params = InitParams(cfg);
  ck.params.joiner["b_out"](0) = -0.0;
  ck.params.joiner["b_out"](1) = 1e-310;
  ck.stage = "rnnt";
  ck.step = 123;
  ck.config = {{"epochs", 3}};
  ck.trace = nlohmann::json::array({{{"epoch", 0}, {"dev_loss", 1.25}}});
  std::string bytes = SerializeCheckpoint(ck);
  CHECK(bytes.substr(0, 8) == "TLABCKPT");
  Checkpoint back = ParseCheckpoint(bytes);
  CHECK(back == ck);
  CHECK(std::signbit(back.params.joiner["b_out"](0)));
  CHECK(SerializeCheckpoint(back) == bytes);

  std::string path = TempPath("tlab_ckpt_test.bin");
  SaveCheckpoint(ck, path);
  CHECK(LoadCheckpoint(path) == ck);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(ParseCheckpoint(bytes.substr(0, bytes.size() - 3)), Error);
  CHECK_THROWS_AS(ParseCheckpoint(bytes + "x"), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(ParseCheckpoint(bad), Error);
  CHECK(ModelConfigFromJson(ModelConfigToJson(cfg)) == cfg);
}
