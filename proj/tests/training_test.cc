// tests/training_test.cc

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

#include "core/training.h"

#include <cmath>
#include <random>

#include "core/error.h"
#include "core/eval.h"
#include "doctest.h"
#include "test_util.h"

using namespace tlab;

namespace {

FamilyOptions TinyFamily() {
  FamilyOptions o;
  o.num_phones = 4;
  o.feature_dim = 3;
  o.lexicon_size = 8;
  o.min_word_len = 1;
  o.max_word_len = 2;
  return o;
}

ModelConfig TinyModel() {
  ModelConfig m;
  m.feature_dim = 3;
  m.vocab_size = 5;
  m.encoder_hidden = 5;
  m.predictor_hidden = 4;
  m.joiner_hidden = 6;
  return m;
}

struct Fixture {
  std::vector<LanguageSpec> family = MakeLanguageFamily(21, 2, 0.8, TinyFamily());
  Corpus train_a, train_b, dev;
  Fixture() {
    DomainSpec dom;
    dom.noise_std = 0.3;
    dom.min_duration = 1;
    dom.max_duration = 2;
    train_a = MakeCorpus(family[0], Synthesize(family[0], dom, 12, 1, {1, 2}));
    train_b = MakeCorpus(family[1], Synthesize(family[1], dom, 5, 2, {1, 2}));
    dev = MakeCorpus(family[0], Synthesize(family[0], dom, 4, 3, {1, 2}));
  }
  TrainData Data() const { return {{&train_a, &train_b}, {&dev}}; }
};

TrainConfig BaseConfig() {
  TrainConfig c;
  c.model = TinyModel();
  c.epochs = 2;
  c.batch_size = 4;
  c.schedule.base_lr = 0.05;
  return c;
}

}  // namespace

TEST_CASE("learning-rate schedule by hand") {
  LrSchedule s;
  s.base_lr = 0.3;
  CHECK(LrAt(0, s) == 0.3);
  s.warmup_steps = 10;
  CHECK(LrAt(5, s) == doctest::Approx(0.15).epsilon(1e-15));
  LrSchedule t;
  t.warmup_steps = 2;
  t.hold_steps = 3;
  t.decay_factor = 0.5;
  t.base_lr = 1.0;
  // Ramp 0, 0.5; hold 1, 1, 1 (steps 2..4); decay exponent floor(step - 5).
  CHECK(LrAt(0, t) == 0.0);
  CHECK(LrAt(1, t) == 0.5);
  CHECK(LrAt(2, t) == 1.0);
  CHECK(LrAt(4, t) == 1.0);
  CHECK(LrAt(5, t) == 1.0);
  CHECK(LrAt(6, t) == 0.5);
  CHECK(LrAt(8, t) == 0.125);
  LrSchedule z;
  z.decay_factor = 0.5;
  z.base_lr = 2.0;
  CHECK(LrAt(0, z) == 2.0);
  CHECK(LrAt(1, z) == 1.0);
}

TEST_CASE("learning-rate schedule shape") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    LrSchedule s;
    s.warmup_steps = static_cast<int>(rng() % 8);
    s.hold_steps = static_cast<int>(rng() % 8);
    s.init_lr = 0.01 * (rng() % 5);
    s.base_lr = 0.1 + 0.01 * (rng() % 50);
    s.decay_factor = 0.5 + 0.1 * (rng() % 6);
    s.decay_interval = 1 + static_cast<int>(rng() % 4);
    for (int step = 1; step < 40; ++step) {
      double prev = LrAt(step - 1, s), cur = LrAt(step, s);
      if (step <= s.warmup_steps)
        CHECK(cur >= prev);
      else if (step <= s.warmup_steps + s.hold_steps)
        CHECK(cur == s.base_lr);
      else
        CHECK(cur <= prev);
    }
  }
  LrSchedule bad;
  bad.decay_factor = 0.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("config JSON round trip") {
  TrainConfig c = BaseConfig();
  c.loss = LossKind::kMinWer;
  c.transplant = TransplantMode::kEncoderOnly;
  c.seed_checkpoint = "seed.ckpt";
  c.beam.beam = 5;
  c.schedule.warmup_steps = 7;
  auto j = TrainConfigToJson(c);
  CHECK(TrainConfigToJson(TrainConfigFromJson(j)) == j);
  j["no_such_key"] = 1;
  CHECK_THROWS_AS(TrainConfigFromJson(j), Error);
  CHECK_THROWS_AS(TrainConfigFromJson({{"transplant", "sideways"}}), Error);
}

TEST_CASE("per-utterance RNNT gradient matches central differences") {
  Fixture f;
  ModelParams p = InitParams(TinyModel());
  const Utterance &u = f.train_a.utterances[0];
  GradientTree g = GradientTree::ZerosLike(p);
  RnntUtteranceGrad(p, u, 1, 1, &g);
  std::map<std::string, Matrix> an;
  g.ForEach([&](const std::string &n, const Matrix &m) { an[n] = m; });
  const double h = 1e-5;
  p.ForEach([&](const std::string &name, Matrix &m) {
    for (int i = 0; i < m.size(); i += 3) {
      double orig = m.data()[i];
      GradientTree dummy = GradientTree::ZerosLike(p);
      m.data()[i] = orig + h;
      double up = RnntUtteranceGrad(p, u, 1, 1, &dummy);
      m.data()[i] = orig - h;
      double down = RnntUtteranceGrad(p, u, 1, 1, &dummy);
      m.data()[i] = orig;
      double fd = (up - down) / (2 * h), a = an[name].data()[i];
      if (std::fabs(a) > 1e-8)
        CHECK_MESSAGE(tlab::testing::RelErr(a, fd) < 1e-4, name);
    }
  });
}

TEST_CASE("per-utterance MinWER gradient matches central differences") {
  Fixture f;
  ModelParams p = InitParams(TinyModel());
  const Utterance &u = f.train_a.utterances[1];
  Vocabulary vocab(4);
  // Hypotheses with distinct risks against the reference words.
  NBestList nb{{u.tokens, 0.0}, {vocab.Tokens(u.words[0]), 0.0}, {{}, 0.0},
               {{0, 1, 4, 2}, 0.0}};
  REQUIRE(nb.size() >= 2);
  GradientTree g = GradientTree::ZerosLike(p);
  double risk = -1.0;
  MinWerUtteranceGrad(p, u, nb, vocab, &g, &risk);
  CHECK(risk >= 0.0);
  std::map<std::string, Matrix> an;
  g.ForEach([&](const std::string &n, const Matrix &m) { an[n] = m; });
  const double h = 1e-5;
  int checked = 0;
  p.ForEach([&](const std::string &name, Matrix &m) {
    for (int i = 0; i < m.size(); i += 2) {
      double orig = m.data()[i];
      GradientTree dummy = GradientTree::ZerosLike(p);
      m.data()[i] = orig + h;
      double up = MinWerUtteranceGrad(p, u, nb, vocab, &dummy, nullptr);
      m.data()[i] = orig - h;
      double down = MinWerUtteranceGrad(p, u, nb, vocab, &dummy, nullptr);
      m.data()[i] = orig;
      double fd = (up - down) / (2 * h), a = an[name].data()[i];
      if (std::fabs(a) > 1e-8) {
        CHECK_MESSAGE(tlab::testing::RelErr(a, fd) < 1e-4, name);
        ++checked;
      }
    }
  });
  CHECK(checked > 20);
}

TEST_CASE("no data or zero learning rate leaves parameters unchanged") {
  Fixture f;
  Corpus empty = f.train_a;
  empty.utterances.clear();
  TrainConfig c = BaseConfig();
  c.epochs = 1;
  Checkpoint ck = TrainRnnt({{&empty}, {&f.dev}}, c, nullptr);
  CHECK(ck.params == InitParams(c.model));
  CHECK(ck.step == 0);

  Checkpoint seed = TrainRnnt(f.Data(), c, nullptr);
  // base_lr must be positive, so zero rate comes from the start of a
  // ramp: one batch per epoch means the only step runs at init_lr = 0.
  TrainConfig z = c;
  z.loss = LossKind::kMinWer;
  z.schedule.init_lr = 0.0;
  z.schedule.warmup_steps = 1000;
  z.batch_size = 1000;
  Checkpoint single = FinetuneMinWer(f.Data(), z, seed);
  CHECK(single.params == seed.params);
  CHECK(single.trace.back().contains("train_expected_risk"));
}

TEST_CASE("training is deterministic and lowers dev loss") {
  Fixture f;
  TrainConfig c = BaseConfig();
  c.epochs = 4;
  Checkpoint a = TrainRnnt(f.Data(), c, nullptr);
  Checkpoint b = TrainRnnt(f.Data(), c, nullptr);
  CHECK(SerializeCheckpoint(a) == SerializeCheckpoint(b));
  REQUIRE(a.trace.size() == 5);
  CHECK(a.trace[4]["dev_loss"].get<double>() < a.trace[0]["dev_loss"].get<double>());
  CHECK(a.step == 4 * 5);  // 17 utterances (balanced: 17 draws) in batches of 4
  c.rng_seed = 2;
  CHECK_FALSE(TrainRnnt(f.Data(), c, nullptr).params == a.params);
}

TEST_CASE("transplant modes") {
  Fixture f;
  TrainConfig c = BaseConfig();
  Checkpoint seed = TrainRnnt(f.Data(), c, nullptr);
  TrainConfig t = c;
  t.transplant = TransplantMode::kEncoderOnly;
  t.model.rng_seed = 9;
  ModelParams p = InitialParams(t, &seed);
  CHECK(p.encoder == seed.params.encoder);
  CHECK(p.joiner == InitParams(t.model).joiner);
  t.transplant = TransplantMode::kFull;
  CHECK(InitialParams(t, &seed) == seed.params);
  CHECK_THROWS_AS(InitialParams(t, nullptr), Error);
  t.model.encoder_hidden += 1;
  t.transplant = TransplantMode::kEncoderOnly;
  CHECK_THROWS_AS(InitialParams(t, &seed), Error);
}

TEST_CASE("divergence guard") {
  Fixture f;
  TrainConfig c = BaseConfig();
  c.schedule.base_lr = 1e308;
  c.clip_norm = 1e308;
  try {
    TrainRnnt(f.Data(), c, nullptr);
    FAIL("expected divergence");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDiverged);
    CHECK(std::string(e.what()).find("stage rnnt") != std::string::npos);
  }
}

TEST_CASE("epochs to reach a dev-loss target") {
  nlohmann::json trace = nlohmann::json::array(
      {{{"epoch", 0}, {"dev_loss", 5.0}},
       {{"epoch", 1}, {"dev_loss", 3.0}},
       {{"epoch", 2}, {"dev_loss", 2.0}}});
  CHECK(EpochsToReach(trace, 6.0) == 0);
  CHECK(EpochsToReach(trace, 2.5) == 2);
  CHECK(EpochsToReach(trace, 2.0) == 2);
  CHECK(EpochsToReach(trace, 1.0) == -1);
}
