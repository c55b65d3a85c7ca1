// core/training.cc

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

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.h"
#include "core/json_util.h"
#include "core/minwer.h"

namespace tlab {

using nlohmann::json;

void LrSchedule::Validate() const {
  if (warmup_steps < 0 || hold_steps < 0 || !(base_lr > 0.0) ||
      init_lr < 0.0 || !(decay_factor > 0.0 && decay_factor <= 1.0) ||
      decay_interval < 1)
    ThrowInvalid("invalid learning-rate schedule");
}

double LrAt(std::int64_t step, const LrSchedule &s) {
  if (step < 0) ThrowInvalid("LrAt: negative step");
  if (step < s.warmup_steps)
    return s.init_lr + (s.base_lr - s.init_lr) * static_cast<double>(step) /
                           static_cast<double>(s.warmup_steps);
  std::int64_t after = step - s.warmup_steps;
  if (after < s.hold_steps) return s.base_lr;
  std::int64_t decays = (after - s.hold_steps) / s.decay_interval;
  return s.base_lr * std::pow(s.decay_factor, static_cast<double>(decays));
}

void TrainConfig::Validate() const {
  schedule.Validate();
  model.Validate();
  if (epochs < 0 || batch_size < 1)
    ThrowInvalid("train config: epochs >= 0 and batch_size >= 1 required");
  if (band_left < 0 || band_right < 0)
    ThrowInvalid("train config: band slack must be >= 0");
  if (!(clip_norm > 0.0)) ThrowInvalid("train config: clip_norm must be > 0");
  if (beam.n_best < 1 || beam.beam < beam.n_best)
    ThrowInvalid("train config: need beam >= n_best >= 1");
}

namespace {

const char *Name(LossKind k) { return k == LossKind::kRnnt ? "rnnt" : "minwer"; }
const char *Name(TransplantMode m) {
  switch (m) {
    case TransplantMode::kEncoderOnly: return "encoder_only";
    case TransplantMode::kFull: return "full";
    default: return "none";
  }
}
const char *Name(LanguageSampling s) {
  return s == LanguageSampling::kBalanced ? "balanced" : "proportional";
}

template <typename Enum>
Enum ParseEnum(const json &j, const char *key,
               std::initializer_list<std::pair<const char *, Enum>> options,
               Enum fallback) {
  if (!j.contains(key)) return fallback;
  std::string v = j.at(key).get<std::string>();
  for (const auto &[name, value] : options)
    if (v == name) return value;
  ThrowInvalid(std::string("train config: bad value for ") + key + ": " + v);
}

}  // namespace

json LrScheduleToJson(const LrSchedule &s) {
  return {{"warmup_steps", s.warmup_steps}, {"hold_steps", s.hold_steps},
          {"base_lr", s.base_lr},           {"init_lr", s.init_lr},
          {"decay_factor", s.decay_factor}, {"decay_interval", s.decay_interval}};
}

LrSchedule LrScheduleFromJson(const json &s, const LrSchedule &base) {
  RejectUnknownKeys(s,
                    {"warmup_steps", "hold_steps", "base_lr", "init_lr",
                     "decay_factor", "decay_interval"},
                    "schedule");
  LrSchedule out = base;
  try {
    out.warmup_steps = s.value("warmup_steps", out.warmup_steps);
    out.hold_steps = s.value("hold_steps", out.hold_steps);
    out.base_lr = s.value("base_lr", out.base_lr);
    out.init_lr = s.value("init_lr", out.init_lr);
    out.decay_factor = s.value("decay_factor", out.decay_factor);
    out.decay_interval = s.value("decay_interval", out.decay_interval);
  } catch (const json::exception &e) {
    ThrowInvalid(std::string("schedule: ") + e.what());
  }
  out.Validate();
  return out;
}

json BeamOptionsToJson(const BeamOptions &b) {
  return {{"beam", b.beam},
          {"n_best", b.n_best},
          {"max_symbols_per_frame", b.max_symbols_per_frame}};
}

BeamOptions BeamOptionsFromJson(const json &b, const BeamOptions &base) {
  RejectUnknownKeys(b, {"beam", "n_best", "max_symbols_per_frame"}, "beam");
  BeamOptions out = base;
  try {
    out.beam = b.value("beam", out.beam);
    out.n_best = b.value("n_best", out.n_best);
    out.max_symbols_per_frame =
        b.value("max_symbols_per_frame", out.max_symbols_per_frame);
  } catch (const json::exception &e) {
    ThrowInvalid(std::string("beam: ") + e.what());
  }
  if (out.n_best < 1 || out.beam < out.n_best || out.max_symbols_per_frame < 0)
    ThrowInvalid("beam: need beam >= n_best >= 1");
  return out;
}

json TrainConfigToJson(const TrainConfig &c) {
  json j = {
      {"loss", Name(c.loss)},
      {"schedule", LrScheduleToJson(c.schedule)},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed_checkpoint",
       c.seed_checkpoint ? json(*c.seed_checkpoint) : json(nullptr)},
      {"transplant", Name(c.transplant)},
      {"language_sampling", Name(c.language_sampling)},
      {"rng_seed", c.rng_seed},
      {"model", ModelConfigToJson(c.model)},
      {"band_left", c.band_left},
      {"band_right", c.band_right},
      {"clip_norm", c.clip_norm},
      {"beam", BeamOptionsToJson(c.beam)},
      {"stage", c.stage}};
  return j;
}

TrainConfig TrainConfigFromJson(const json &j) {
  if (!j.is_object()) ThrowInvalid("train config must be an object");
  RejectUnknownKeys(j,
                {"loss", "schedule", "epochs", "batch_size", "seed_checkpoint",
                 "transplant", "language_sampling", "rng_seed", "model",
                 "band_left", "band_right", "clip_norm", "beam", "stage"},
                "train config");
  TrainConfig c;
  try {
    c.loss = ParseEnum<LossKind>(
        j, "loss", {{"rnnt", LossKind::kRnnt}, {"minwer", LossKind::kMinWer}},
        c.loss);
    if (j.contains("schedule"))
      c.schedule = LrScheduleFromJson(j.at("schedule"), c.schedule);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("seed_checkpoint") && !j.at("seed_checkpoint").is_null())
      c.seed_checkpoint = j.at("seed_checkpoint").get<std::string>();
    c.transplant = ParseEnum<TransplantMode>(
        j, "transplant",
        {{"encoder_only", TransplantMode::kEncoderOnly},
         {"full", TransplantMode::kFull},
         {"none", TransplantMode::kNone}},
        c.transplant);
    c.language_sampling = ParseEnum<LanguageSampling>(
        j, "language_sampling",
        {{"balanced", LanguageSampling::kBalanced},
         {"proportional", LanguageSampling::kProportional}},
        c.language_sampling);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    if (j.contains("model")) c.model = ModelConfigFromJson(j.at("model"));
    c.band_left = j.value("band_left", c.band_left);
    c.band_right = j.value("band_right", c.band_right);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    if (j.contains("beam")) c.beam = BeamOptionsFromJson(j.at("beam"), c.beam);
    c.stage = j.value("stage", c.stage);
  } catch (const json::exception &e) {
    ThrowInvalid(std::string("train config: ") + e.what());
  }
  c.Validate();
  return c;
}

double DevLoss(const ModelParams &params,
               const std::vector<const Corpus *> &dev) {
  double total = 0.0;
  std::size_t n = 0;
  for (const Corpus *c : dev) {
    for (const Utterance &u : c->utterances) {
      TransducerPass pass = ModelForward(u.features, u.tokens, params);
      total += RnntForward(pass.lattice).loss;
      ++n;
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

ModelParams InitialParams(const TrainConfig &cfg, const Checkpoint *seed) {
  if (cfg.transplant == TransplantMode::kNone) return InitParams(cfg.model);
  if (seed == nullptr) ThrowInvalid("transplant requested without a seed");
  if (cfg.transplant == TransplantMode::kFull) {
    ModelParams p = seed->params;
    if (!(p.encoder.SameShape(InitParams(cfg.model).encoder) &&
          p.predictor.SameShape(InitParams(cfg.model).predictor)))
      ThrowInvalid("full transplant: seed architecture differs from config");
    return p;
  }
  return TransplantEncoder(seed->params, InitParams(cfg.model));
}

double RnntUtteranceGrad(const ModelParams &params, const Utterance &utt,
                         int band_left, int band_right, GradientTree *grads) {
  AlignmentBand band = BandFromAlignment(utt.emit_frames, band_left,
                                         band_right, utt.num_frames());
  TransducerPass pass = ModelForward(utt.features, utt.tokens, params, &band);
  ForwardResult fwd = RnntForward(pass.lattice, band);
  if (!std::isfinite(fwd.loss)) return fwd.loss;
  LatticeGradient lg = RnntGrad(pass.lattice, band, fwd.log_alpha);
  GradientTree g = ModelBackward(lg, pass, params);
  grads->Add(g);
  return fwd.loss;
}

double MinWerUtteranceGrad(const ModelParams &params, const Utterance &utt,
                           const NBestList &nbest, const Vocabulary &vocab,
                           GradientTree *grads, double *expected_risk) {
  EncoderCache enc = EncoderForward(utt.features, params);
  std::vector<PredictorCache> preds;
  std::vector<JoinerCache> joins(nbest.size());
  std::vector<LogitLattice> lattices;
  std::vector<std::vector<double>> alphas;
  NBestList scored;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    preds.push_back(PredictorForward(nbest[i].tokens, params));
    lattices.push_back(JoinerForward(enc, preds.back(), params, &joins[i]));
    ForwardResult fwd = RnntForward(lattices.back());
    scored.push_back({nbest[i].tokens, -fwd.loss});
    alphas.push_back(std::move(fwd.log_alpha));
  }
  MinWerResult res = MinWerLoss(scored, utt.words, vocab);
  if (expected_risk) *expected_risk = res.expected_risk;
  std::vector<LatticeGradient> lgs = MinWerGrad(scored, res, lattices, alphas);
  Matrix d_enc_total = Matrix::Zero(enc.output().rows(), enc.output().cols());
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    Matrix d_enc, d_pred;
    JoinerBackward(lgs[i], enc, preds[i], joins[i], params, grads, &d_enc,
                   &d_pred);
    PredictorBackward(d_pred, preds[i], params, grads);
    d_enc_total += d_enc;
  }
  EncoderBackward(d_enc_total, enc, params, grads);
  return res.loss;
}

int EpochsToReach(const json &trace, double target) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace[i].at("dev_loss").get<double>() <= target)
      return trace[i].at("epoch").get<int>();
  return -1;
}

namespace {

struct UttRef {
  std::size_t corpus;
  std::size_t index;
};

std::vector<UttRef> EpochOrder(const std::vector<const Corpus *> &train,
                               LanguageSampling sampling, std::mt19937_64 &rng,
                               std::vector<std::vector<std::size_t>> &cursors,
                               std::vector<std::size_t> &positions) {
  std::vector<UttRef> order;
  std::size_t total = 0;
  for (const Corpus *c : train) total += c->utterances.size();
  if (sampling == LanguageSampling::kProportional || train.size() <= 1) {
    for (std::size_t c = 0; c < train.size(); ++c)
      for (std::size_t i = 0; i < train[c]->utterances.size(); ++i)
        order.push_back({c, i});
    std::shuffle(order.begin(), order.end(), rng);
    return order;
  }
  // Round-robin over languages, each cycling through its own shuffled
  // order; small languages are revisited more often.
  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < train.size(); ++c)
    if (!train[c]->utterances.empty()) live.push_back(c);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t c = live[k % live.size()];
    if (positions[c] >= cursors[c].size()) {
      std::shuffle(cursors[c].begin(), cursors[c].end(), rng);
      positions[c] = 0;
    }
    order.push_back({c, cursors[c][positions[c]++]});
  }
  return order;
}

using UttGradFn = std::function<double(const ModelParams &, const Utterance &,
                                       GradientTree *, double *)>;

Checkpoint RunTraining(const TrainData &data, const TrainConfig &cfg,
                       ModelParams params, std::int64_t start_step,
                       const UttGradFn &utt_grad, bool track_risk) {
  Checkpoint ckpt;
  ckpt.stage = cfg.stage;
  ckpt.config = TrainConfigToJson(cfg);
  std::mt19937_64 rng(DeriveSeed(cfg.rng_seed, 0x7261696eULL));

  std::vector<std::vector<std::size_t>> cursors(data.train.size());
  std::vector<std::size_t> positions(data.train.size(), 0);
  for (std::size_t c = 0; c < data.train.size(); ++c) {
    for (std::size_t i = 0; i < data.train[c]->utterances.size(); ++i)
      cursors[c].push_back(i);
    positions[c] = cursors[c].size();  // forces a shuffle on first use
  }

  std::int64_t step = start_step;
  std::int64_t local_step = 0;
  json trace = json::array();
  trace.push_back({{"epoch", 0}, {"step", step}, {"dev_loss", DevLoss(params, data.dev)}});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<UttRef> order = EpochOrder(data.train, cfg.language_sampling,
                                           rng, cursors, positions);
    double loss_sum = 0.0, risk_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t end = std::min(order.size(), b + cfg.batch_size);
      GradientTree grads = GradientTree::ZerosLike(params);
      for (std::size_t k = b; k < end; ++k) {
        const Corpus &corpus = *data.train[order[k].corpus];
        const Utterance &utt = corpus.utterances[order[k].index];
        double risk = 0.0;
        double loss;
        try {
          loss = utt_grad(params, utt, &grads, &risk);
        } catch (const Error &e) {
          throw Error(e.kind(), "stage " + cfg.stage + ", utterance " +
                                    utt.id + ": " + e.what());
        }
        if (!std::isfinite(loss))
          throw Error(ErrorKind::kDiverged,
                      "stage " + cfg.stage + ": non-finite loss at epoch " +
                          std::to_string(epoch) + ", utterance " + utt.id);
        loss_sum += loss;
        risk_sum += risk;
      }
      const double scale = 1.0 / static_cast<double>(end - b);
      double norm = std::sqrt(grads.SquaredNorm()) * scale;
      if (!std::isfinite(norm))
        throw Error(ErrorKind::kDiverged,
                    "stage " + cfg.stage + ": non-finite gradient at epoch " +
                        std::to_string(epoch));
      double clip = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
      double lr = LrAt(local_step, cfg.schedule);
      double factor = -lr * scale * clip;
      GradientTree *g = &grads;
      auto apply = [factor](ParamTree &p, ParamTree &d) {
        for (auto &[name, m] : p) m += factor * d[name];
      };
      apply(params.encoder, g->encoder);
      apply(params.predictor, g->predictor);
      apply(params.joiner, g->joiner);
      bool finite = true;
      params.ForEach([&finite](const std::string &, const Matrix &m) {
        finite = finite && m.allFinite();
      });
      if (!finite)
        throw Error(ErrorKind::kDiverged,
                    "stage " + cfg.stage + ": parameters left the finite "
                    "range at epoch " + std::to_string(epoch) + ", lr " +
                    std::to_string(lr));
      ++step;
      ++local_step;
    }
    json rec = {{"epoch", epoch},
                {"step", step},
                {"lr", LrAt(local_step, cfg.schedule)},
                {"train_loss", order.empty() ? 0.0 : loss_sum / order.size()},
                {"dev_loss", DevLoss(params, data.dev)}};
    if (track_risk)
      rec["train_expected_risk"] = order.empty() ? 0.0 : risk_sum / order.size();
    trace.push_back(std::move(rec));
  }
  ckpt.params = std::move(params);
  ckpt.step = step;
  ckpt.trace = std::move(trace);
  return ckpt;
}

}  // namespace

Checkpoint TrainRnnt(const TrainData &data, const TrainConfig &cfg,
                     const Checkpoint *seed) {
  cfg.Validate();
  for (const Corpus *c : data.train)
    if (c->feature_dim != cfg.model.feature_dim ||
        c->num_phones + 1 != cfg.model.vocab_size)
      ThrowInvalid("train: corpus " + c->language +
                   " does not match the model config");
  ModelParams params = InitialParams(cfg, seed);
  auto fn = [&cfg](const ModelParams &p, const Utterance &u, GradientTree *g,
                   double *) {
    return RnntUtteranceGrad(p, u, cfg.band_left, cfg.band_right, g);
  };
  std::int64_t start =
      cfg.transplant == TransplantMode::kFull && seed ? seed->step : 0;
  return RunTraining(data, cfg, std::move(params), start, fn, false);
}

Checkpoint FinetuneMinWer(const TrainData &data, const TrainConfig &cfg,
                          const Checkpoint &seed) {
  cfg.Validate();
  TrainConfig c = cfg;
  if (c.transplant == TransplantMode::kNone) c.transplant = TransplantMode::kFull;
  ModelParams params = InitialParams(c, &seed);
  Vocabulary vocab(params.config.vocab_size - 1);
  auto fn = [&c, &vocab](const ModelParams &p, const Utterance &u,
                         GradientTree *g, double *risk) {
    NBestList nbest = BeamSearch(p, u.features, c.beam);
    return MinWerUtteranceGrad(p, u, nbest, vocab, g, risk);
  };
  std::int64_t start = c.transplant == TransplantMode::kFull ? seed.step : 0;
  return RunTraining(data, c, std::move(params), start, fn, true);
}

}  // namespace tlab
