// core/experiment.h

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

#ifndef TLAB_CORE_EXPERIMENT_H_
#define TLAB_CORE_EXPERIMENT_H_

// Toy reproductions of the staged-pretraining tables. Every preset builds a
// synthetic language family, trains the configurations it compares,
// decodes held-out sets and returns report tables plus a metrics record.

#include <cstdint>
#include <string>
#include <vector>

#include "core/corpus.h"
#include "core/eval.h"
#include "core/training.h"
#include "json.hpp"

namespace tlab {

struct ExperimentSetup {
  // Language family and corpora.
  int num_phones = 16;
  int feature_dim = 16;
  int lexicon_size = 60;
  double relatedness = 0.9;
  double zipf_exponent = 1.0;
  int high_utts = 2000;  // per high-resource language
  int low_utts = 150;    // per low-resource language
  int dev_utts = 60;
  int test_utts = 150;
  WordCountRange words{1, 3};
  double noise_std = 0.8;
  int min_duration = 1;
  int max_duration = 3;
  double ood_severity = 1.5;

  // Model and training.
  ModelConfig model;
  int pretrain_epochs = 6;
  int mono_epochs = 36;
  int minwer_epochs = 2;
  int batch_size = 8;
  LrSchedule cold_schedule;     // three-stage, used without a seed
  LrSchedule seeded_schedule;   // transfer stage
  LrSchedule minwer_schedule;
  int band_left = 1;
  int band_right = 1;
  BeamOptions train_beam{4, 4, 5};
  BeamOptions eval_beam{4, 1, 5};
  int rare_threshold = 5;

  ExperimentSetup();
  // Same pipeline at a size that runs in seconds.
  static ExperimentSetup Smoke();
};

nlohmann::json ExperimentSetupToJson(const ExperimentSetup &s);
// Missing keys keep the defaults of `base`; unknown keys are rejected.
ExperimentSetup ExperimentSetupFromJson(const nlohmann::json &j,
                                        const ExperimentSetup &base = {});

const std::vector<std::string> &ExperimentPresets();

struct ExperimentResult {
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<ReportTable> tables;
  nlohmann::json metrics;  // per-row WERs, breakdowns, traces, derived values
};

ExperimentResult RunExperiment(const std::string &preset,
                               const ExperimentSetup &setup,
                               std::uint64_t seed);

// Writes <preset>.txt, <preset>.tsv and <preset>.json into out_dir.
void WriteExperimentReports(const ExperimentResult &result,
                            const std::string &out_dir);

// Beam-decodes every utterance and scores it with the rare/non-rare
// breakdown. `pairs` receives the reference/hypothesis words if non-null.
WerReport EvaluateModel(const ModelParams &params, const Corpus &test,
                        const RareWordSet &rare, const BeamOptions &beam,
                        std::vector<WordPair> *pairs = nullptr);

nlohmann::json WerReportToJson(const WerReport &r);

}  // namespace tlab

#endif  // TLAB_CORE_EXPERIMENT_H_
