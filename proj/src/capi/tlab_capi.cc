// capi/tlab_capi.cc

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

#include "tlab/tlab.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "core/checkpoint.h"
#include "core/corpus.h"
#include "core/error.h"
#include "core/eval.h"
#include "core/experiment.h"
#include "core/training.h"
#include "json.hpp"

using nlohmann::json;

struct tlab_corpus {
  tlab::Corpus corpus;
};

struct tlab_model {
  tlab::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

tlab_status StatusOf(tlab::ErrorKind kind) {
  switch (kind) {
    case tlab::ErrorKind::kInvalidArgument: return TLAB_ERROR_INVALID_ARGUMENT;
    case tlab::ErrorKind::kIo: return TLAB_ERROR_IO;
    case tlab::ErrorKind::kParse: return TLAB_ERROR_PARSE;
    case tlab::ErrorKind::kDiverged: return TLAB_ERROR_DIVERGED;
    default: return TLAB_ERROR_RUNTIME;
  }
}

// Runs fn, mapping exceptions to status codes and the thread's message.
template <typename Fn>
tlab_status Guard(Fn &&fn) {
  g_last_error.clear();
  try {
    fn();
    return TLAB_OK;
  } catch (const tlab::Error &e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const json::exception &e) {
    g_last_error = std::string("JSON: ") + e.what();
    return TLAB_ERROR_PARSE;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return TLAB_ERROR_RUNTIME;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return TLAB_ERROR_RUNTIME;
  }
}

char *CopyString(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Require(bool cond, const char *what) {
  if (!cond) tlab::ThrowInvalid(what);
}

json ParseJson(const char *text, const char *what) {
  if (text == nullptr || *text == '\0') return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw tlab::Error(tlab::ErrorKind::kParse,
                      std::string(what) + ": " + e.what());
  }
}

}  // namespace

extern "C" {

const char *tlab_version(void) { return "1.0.0"; }

const char *tlab_last_error(void) { return g_last_error.c_str(); }

void tlab_free_string(char *s) { std::free(s); }

tlab_status tlab_corpus_generate(const char *recipe_json, tlab_corpus **out,
                                 char **resolved_recipe) {
  return Guard([&] {
    Require(out != nullptr, "tlab_corpus_generate: null output");
    tlab::CorpusRecipe r =
        tlab::CorpusRecipeFromJson(ParseJson(recipe_json, "corpus recipe"));
    auto handle = std::make_unique<tlab_corpus>();
    handle->corpus = tlab::BuildCorpus(r);
    if (resolved_recipe)
      *resolved_recipe = CopyString(tlab::CorpusRecipeToJson(r).dump());
    *out = handle.release();
  });
}

tlab_status tlab_corpus_load(const char *path, tlab_corpus **out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "tlab_corpus_load: null argument");
    auto handle = std::make_unique<tlab_corpus>();
    handle->corpus = tlab::LoadCorpus(path);
    *out = handle.release();
  });
}

tlab_status tlab_corpus_save(const tlab_corpus *corpus, const char *path) {
  return Guard([&] {
    Require(corpus != nullptr && path != nullptr,
            "tlab_corpus_save: null argument");
    tlab::SaveCorpus(corpus->corpus, path);
  });
}

tlab_status tlab_corpus_summary(const tlab_corpus *corpus, char **json_out) {
  return Guard([&] {
    Require(corpus != nullptr && json_out != nullptr,
            "tlab_corpus_summary: null argument");
    std::size_t words = 0;
    for (const auto &u : corpus->corpus.utterances) words += u.words.size();
    json j = {{"language", corpus->corpus.language},
              {"feature_dim", corpus->corpus.feature_dim},
              {"num_phones", corpus->corpus.num_phones},
              {"num_utterances", corpus->corpus.utterances.size()},
              {"num_words", words}};
    *json_out = CopyString(j.dump());
  });
}

void tlab_corpus_free(tlab_corpus *corpus) { delete corpus; }

tlab_status tlab_model_load(const char *path, tlab_model **out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "tlab_model_load: null argument");
    auto handle = std::make_unique<tlab_model>();
    handle->checkpoint = tlab::LoadCheckpoint(path);
    *out = handle.release();
  });
}

tlab_status tlab_model_save(const tlab_model *model, const char *path) {
  return Guard([&] {
    Require(model != nullptr && path != nullptr,
            "tlab_model_save: null argument");
    tlab::SaveCheckpoint(model->checkpoint, path);
  });
}

tlab_status tlab_model_summary(const tlab_model *model, char **json_out) {
  return Guard([&] {
    Require(model != nullptr && json_out != nullptr,
            "tlab_model_summary: null argument");
    const tlab::Checkpoint &c = model->checkpoint;
    json j = {{"model", tlab::ModelConfigToJson(c.params.config)},
              {"stage", c.stage},
              {"step", c.step},
              {"config", c.config},
              {"trace", c.trace}};
    *json_out = CopyString(j.dump());
  });
}

void tlab_model_free(tlab_model *model) { delete model; }

tlab_status tlab_train(const char *config_json,
                       const tlab_corpus *const *train, size_t n_train,
                       const tlab_corpus *const *dev, size_t n_dev,
                       const tlab_model *seed, tlab_model **out,
                       char **resolved_config) {
  return Guard([&] {
    Require(out != nullptr, "tlab_train: null output");
    Require(n_train == 0 || train != nullptr, "tlab_train: null train list");
    Require(n_dev == 0 || dev != nullptr, "tlab_train: null dev list");
    tlab::TrainConfig cfg =
        tlab::TrainConfigFromJson(ParseJson(config_json, "train config"));
    tlab::TrainData data;
    for (size_t i = 0; i < n_train; ++i) {
      Require(train[i] != nullptr, "tlab_train: null train corpus");
      data.train.push_back(&train[i]->corpus);
    }
    for (size_t i = 0; i < n_dev; ++i) {
      Require(dev[i] != nullptr, "tlab_train: null dev corpus");
      data.dev.push_back(&dev[i]->corpus);
    }
    auto handle = std::make_unique<tlab_model>();
    if (cfg.loss == tlab::LossKind::kMinWer) {
      Require(seed != nullptr,
              "minwer fine-tuning requires a seed checkpoint");
      handle->checkpoint = tlab::FinetuneMinWer(data, cfg, seed->checkpoint);
    } else {
      handle->checkpoint = tlab::TrainRnnt(
          data, cfg, seed ? &seed->checkpoint : nullptr);
    }
    if (resolved_config)
      *resolved_config = CopyString(tlab::TrainConfigToJson(cfg).dump());
    *out = handle.release();
  });
}

tlab_status tlab_decode(const tlab_model *model, const tlab_corpus *corpus,
                        const char *beam_json, char **hyps_jsonl) {
  return Guard([&] {
    Require(model != nullptr && corpus != nullptr && hyps_jsonl != nullptr,
            "tlab_decode: null argument");
    tlab::BeamOptions beam = tlab::BeamOptionsFromJson(
        ParseJson(beam_json, "beam options"), tlab::BeamOptions{4, 1, 5});
    const tlab::ModelParams &p = model->checkpoint.params;
    if (p.config.feature_dim != corpus->corpus.feature_dim ||
        p.config.vocab_size != corpus->corpus.num_phones + 1)
      tlab::ThrowInvalid("decode: corpus does not match the model");
    tlab::Vocabulary vocab = corpus->corpus.vocab();
    std::ostringstream os;
    for (const auto &u : corpus->corpus.utterances) {
      tlab::NBestList nb = tlab::BeamSearch(p, u.features, beam);
      json line = {{"id", u.id},
                   {"words", vocab.Words(nb.front().tokens)},
                   {"tokens", nb.front().tokens},
                   {"log_prob", nb.front().log_prob}};
      os << line.dump() << "\n";
    }
    *hyps_jsonl = CopyString(os.str());
  });
}

tlab_status tlab_score(const tlab_corpus *reference, const char *hyps_jsonl,
                       const tlab_corpus *train_counts, int rare_threshold,
                       char **report_json) {
  return Guard([&] {
    Require(reference != nullptr && hyps_jsonl != nullptr &&
                report_json != nullptr,
            "tlab_score: null argument");
    Require(rare_threshold >= 0, "tlab_score: rare_threshold must be >= 0");
    std::map<std::string, std::vector<std::string>> hyps;
    std::istringstream is(hyps_jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        std::string id = j.at("id").get<std::string>();
        if (!hyps.emplace(id, j.at("words").get<std::vector<std::string>>())
                 .second)
          tlab::ThrowInvalid("duplicate hypothesis id " + id);
      } catch (const json::exception &e) {
        throw tlab::Error(tlab::ErrorKind::kParse,
                          "hypothesis line " + std::to_string(line_no) +
                              ": " + e.what());
      }
    }
    std::vector<tlab::WordPair> pairs;
    for (const auto &u : reference->corpus.utterances) {
      auto it = hyps.find(u.id);
      if (it == hyps.end())
        tlab::ThrowInvalid("no hypothesis for utterance " + u.id);
      pairs.push_back({u.words, it->second});
      hyps.erase(it);
    }
    if (!hyps.empty())
      tlab::ThrowInvalid("hypothesis for unknown utterance " +
                         hyps.begin()->first);
    std::map<std::string, int> counts;
    if (train_counts) counts = train_counts->corpus.WordCounts();
    tlab::RareWordSet rare(counts, rare_threshold);
    *report_json =
        CopyString(tlab::WerReportToJson(tlab::WerBreakdown(pairs, rare)).dump());
  });
}

tlab_status tlab_experiment_setup(const char *size, const char *overrides_json,
                                  char **setup_json) {
  return Guard([&] {
    Require(setup_json != nullptr, "tlab_experiment_setup: null output");
    std::string sz = size ? size : "full";
    tlab::ExperimentSetup base;
    if (sz == "smoke")
      base = tlab::ExperimentSetup::Smoke();
    else if (sz != "full")
      tlab::ThrowInvalid("experiment size must be \"full\" or \"smoke\"");
    tlab::ExperimentSetup s = tlab::ExperimentSetupFromJson(
        ParseJson(overrides_json, "experiment setup"), base);
    *setup_json = CopyString(tlab::ExperimentSetupToJson(s).dump());
  });
}

tlab_status tlab_experiment_run(const char *preset, const char *setup_json,
                                uint64_t seed, const char *out_dir,
                                char **metrics_json) {
  return Guard([&] {
    Require(preset != nullptr, "tlab_experiment_run: null preset");
    tlab::ExperimentSetup s = tlab::ExperimentSetupFromJson(
        ParseJson(setup_json, "experiment setup"));
    tlab::ExperimentResult r = tlab::RunExperiment(preset, s, seed);
    if (out_dir && *out_dir) tlab::WriteExperimentReports(r, out_dir);
    if (metrics_json) *metrics_json = CopyString(r.metrics.dump());
  });
}

tlab_status tlab_rnnt_loss(int num_frames, int num_labels, int vocab_size,
                           const double *logits, const int *labels,
                           const int *band_left, const int *band_right,
                           double *loss, double *grad) {
  return Guard([&] {
    Require(num_frames >= 1 && num_labels >= 0 && vocab_size >= 1,
            "tlab_rnnt_loss: bad dimensions");
    Require(logits != nullptr && loss != nullptr &&
                (num_labels == 0 || labels != nullptr),
            "tlab_rnnt_loss: null argument");
    Require((band_left == nullptr) == (band_right == nullptr),
            "tlab_rnnt_loss: give both band arrays or neither");
    tlab::LogitLattice lat = tlab::LogitLattice::Zeros(
        num_frames, std::vector<int>(labels, labels + num_labels), vocab_size);
    std::copy(logits, logits + lat.values.size(), lat.values.begin());
    tlab::AlignmentBand band =
        tlab::AlignmentBand::Full(num_frames, num_labels);
    if (band_left) {
      band.left.assign(band_left, band_left + num_labels + 1);
      band.right.assign(band_right, band_right + num_labels + 1);
    }
    tlab::ForwardResult fwd = tlab::RnntForward(lat, band);
    *loss = fwd.loss;
    if (grad) {
      tlab::LatticeGradient g = tlab::RnntGrad(lat, band, fwd.log_alpha);
      std::copy(g.values.begin(), g.values.end(), grad);
    }
  });
}

tlab_status tlab_werr(double baseline, double treatment, double *out) {
  return Guard([&] {
    Require(out != nullptr, "tlab_werr: null output");
    *out = tlab::Werr(baseline, treatment);
  });
}

}  // extern "C"
