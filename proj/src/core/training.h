// core/training.h

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

#ifndef TLAB_CORE_TRAINING_H_
#define TLAB_CORE_TRAINING_H_

// Staged training: alignment-restricted transducer loss (optionally seeded
// from another checkpoint) and N-best expected-WER fine-tuning.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/checkpoint.h"
#include "core/corpus.h"
#include "core/decode.h"

namespace tlab {

// Linear ramp init_lr -> base_lr over warmup_steps, base_lr for hold_steps,
// then base_lr * decay_factor ^ floor((step - warmup - hold) / interval).
struct LrSchedule {
  int warmup_steps = 0;
  int hold_steps = 0;
  double base_lr = 0.1;
  double init_lr = 0.0;
  double decay_factor = 1.0;
  int decay_interval = 1;

  void Validate() const;
};

double LrAt(std::int64_t step, const LrSchedule &s);

enum class LossKind { kRnnt, kMinWer };
enum class TransplantMode { kEncoderOnly, kFull, kNone };
enum class LanguageSampling { kBalanced, kProportional };

struct TrainConfig {
  LossKind loss = LossKind::kRnnt;
  LrSchedule schedule;
  int epochs = 10;
  int batch_size = 8;
  std::optional<std::string> seed_checkpoint;  // path, used by the CLI
  TransplantMode transplant = TransplantMode::kNone;
  LanguageSampling language_sampling = LanguageSampling::kBalanced;
  std::uint64_t rng_seed = 1;
  ModelConfig model;
  int band_left = 1;
  int band_right = 1;
  double clip_norm = 5.0;
  BeamOptions beam;
  std::string stage = "rnnt";

  void Validate() const;
};

nlohmann::json LrScheduleToJson(const LrSchedule &s);
LrSchedule LrScheduleFromJson(const nlohmann::json &j, const LrSchedule &base);
nlohmann::json BeamOptionsToJson(const BeamOptions &b);
BeamOptions BeamOptionsFromJson(const nlohmann::json &j, const BeamOptions &base);

nlohmann::json TrainConfigToJson(const TrainConfig &c);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig TrainConfigFromJson(const nlohmann::json &j);

struct TrainData {
  std::vector<const Corpus *> train;  // one corpus per language
  std::vector<const Corpus *> dev;    // pooled for the dev metrics
};

// Mean full-band -log P(y | x) per utterance.
double DevLoss(const ModelParams &params, const std::vector<const Corpus *> &dev);

// Initial parameters per cfg.transplant. `seed` may be null only when
// transplant is kNone.
ModelParams InitialParams(const TrainConfig &cfg, const Checkpoint *seed);

Checkpoint TrainRnnt(const TrainData &data, const TrainConfig &cfg,
                     const Checkpoint *seed);

Checkpoint FinetuneMinWer(const TrainData &data, const TrainConfig &cfg,
                          const Checkpoint &seed);

// Per-utterance objectives and parameter gradients, exposed for checks.
double RnntUtteranceGrad(const ModelParams &params, const Utterance &utt,
                         int band_left, int band_right, GradientTree *grads);
// Returns the baselined loss; expected_risk is optional output.
double MinWerUtteranceGrad(const ModelParams &params, const Utterance &utt,
                           const NBestList &nbest, const Vocabulary &vocab,
                           GradientTree *grads, double *expected_risk);

// Index of the first trace record whose dev_loss <= target, or -1.
int EpochsToReach(const nlohmann::json &trace, double target);

}  // namespace tlab

#endif  // TLAB_CORE_TRAINING_H_
