// tests/decode_test.cc

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

#include "core/decode.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "core/error.h"
#include "doctest.h"

using namespace tlab;

namespace {

ModelParams SmallModel(std::uint64_t seed, int vocab, double spread) {
  ModelConfig c;
  c.feature_dim = 2;
  c.encoder_hidden = 3;
  c.predictor_hidden = 3;
  c.joiner_hidden = 4;
  c.vocab_size = vocab;
  c.rng_seed = seed;
  ModelParams p = InitParams(c);
  // Sharper output layer so hypotheses separate.
  p.joiner["w_out"] *= spread;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < p.joiner["b_out"].size(); ++i)
    p.joiner["b_out"].data()[i] = n(rng);
  return p;
}

Matrix Features(std::uint64_t seed, int T) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.5);
  Matrix x(T, 2);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

// All sequences over {0..V-1} of length <= max_len.
void Enumerate(int V, int max_len, std::vector<int> &cur,
               std::vector<std::vector<int>> &out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == max_len) return;
  for (int k = 0; k < V; ++k) {
    cur.push_back(k);
    Enumerate(V, max_len, cur, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("beam of one reproduces greedy") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ModelParams p = SmallModel(seed, 3, 3.0);
    Matrix x = Features(seed + 100, 2 + seed % 5);
    BeamOptions opt;
    opt.beam = 1;
    opt.n_best = 1;
    opt.max_symbols_per_frame = 1 + seed % 3;
    NBestList nb = BeamSearch(p, x, opt);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].tokens == GreedyDecode(p, x, opt.max_symbols_per_frame));
  }
}

TEST_CASE("greedy tie goes to the label") {
  ModelParams p = SmallModel(1, 2, 0.0);
  p.joiner["b_out"].setZero();  // all logits equal everywhere
  Matrix x = Features(5, 3);
  // Every step ties; label 0 wins each time until the per-frame cap.
  CHECK(GreedyDecode(p, x, 2) == std::vector<int>(6, 0));
  CHECK(GreedyDecode(p, x, 0).empty());
}

TEST_CASE("wide beam finds the exhaustive n-best") {
  const int V = 2, max_sym = 2;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    int T = 1 + static_cast<int>(seed % 3);
    ModelParams p = SmallModel(seed, V, 2.0);
    Matrix x = Features(seed + 7, T);
    EncoderCache enc = EncoderForward(x, p);

    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    Enumerate(V, T * max_sym, cur, all);
    std::vector<Hypothesis> oracle;
    for (auto &seq : all) oracle.push_back({seq, ScoreSequence(p, enc, seq)});
    std::sort(oracle.begin(), oracle.end(),
              [](const Hypothesis &a, const Hypothesis &b) {
                return HypothesisBefore(a.log_prob, a.tokens, b.log_prob,
                                        b.tokens);
              });

    BeamOptions opt;
    opt.beam = 512;
    opt.n_best = 4;
    opt.max_symbols_per_frame = max_sym;
    NBestList nb = BeamSearch(p, x, opt);
    REQUIRE(nb.size() == std::min<std::size_t>(4, oracle.size()));
    for (std::size_t i = 0; i < nb.size(); ++i) {
      CHECK(nb[i].tokens == oracle[i].tokens);
      CHECK(nb[i].log_prob == doctest::Approx(oracle[i].log_prob).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact scores over all sequences sum below one") {
  // Sequences of bounded length cover part of the probability mass.
  ModelParams p = SmallModel(3, 2, 1.0);
  p.joiner["b_out"](2) = 4.0;  // blank-heavy, so short sequences dominate
  Matrix x = Features(4, 2);
  EncoderCache enc = EncoderForward(x, p);
  std::vector<std::vector<int>> all;
  std::vector<int> cur;
  Enumerate(2, 8, cur, all);
  double total = 0.0;
  for (auto &s : all) total += std::exp(ScoreSequence(p, enc, s));
  CHECK(total <= 1.0 + 1e-12);
  CHECK(total > 0.9);
}

TEST_CASE("n-best list is sorted and unique") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ModelParams p = SmallModel(seed, 4, 1.5);
    Matrix x = Features(seed * 3, 6);
    BeamOptions opt;
    opt.beam = 6;
    opt.n_best = 4;
    NBestList nb = BeamSearch(p, x, opt);
    CHECK(nb.size() <= 4);
    CHECK(!nb.empty());
    std::set<std::vector<int>> seen;
    EncoderCache enc = EncoderForward(x, p);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      CHECK(seen.insert(nb[i].tokens).second);
      CHECK(nb[i].log_prob <= 0.0);
      CHECK(nb[i].log_prob == ScoreSequence(p, enc, nb[i].tokens));
      if (i > 0) CHECK(nb[i - 1].log_prob >= nb[i].log_prob);
    }
  }
}

TEST_CASE("beam option validation") {
  ModelParams p = SmallModel(1, 2, 1.0);
  Matrix x = Features(1, 2);
  BeamOptions opt;
  opt.beam = 2;
  opt.n_best = 3;
  CHECK_THROWS_AS(BeamSearch(p, x, opt), Error);
  opt.n_best = 0;
  CHECK_THROWS_AS(BeamSearch(p, x, opt), Error);
}
