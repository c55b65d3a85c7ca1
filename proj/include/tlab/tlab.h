// tlab/tlab.h

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

#ifndef TLAB_TLAB_H_
#define TLAB_TLAB_H_

/* C interface to the transducer lab. Objects are opaque handles released
 * with their *_free function. Every call returns a tlab_status; on failure
 * tlab_last_error() describes it until the next call on the same thread.
 * Strings returned through char** are heap-allocated and released with
 * tlab_free_string. Configurations are passed as JSON text; missing keys
 * take defaults and unknown keys are errors. */

#include <stddef.h>
#include <stdint.h>

#if defined(TLAB_BUILDING_LIBRARY)
#define TLAB_API __attribute__((visibility("default")))
#else
#define TLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tlab_status {
  TLAB_OK = 0,
  TLAB_ERROR_INVALID_ARGUMENT = 1,
  TLAB_ERROR_IO = 2,
  TLAB_ERROR_PARSE = 3,
  TLAB_ERROR_DIVERGED = 4,
  TLAB_ERROR_RUNTIME = 5
} tlab_status;

typedef struct tlab_corpus tlab_corpus;
typedef struct tlab_model tlab_model;

TLAB_API const char *tlab_version(void);
TLAB_API const char *tlab_last_error(void);
TLAB_API void tlab_free_string(char *s);

/* Corpora. The recipe names a language family member, a domain and a
 * sample size; resolved_recipe (optional) receives it with defaults. */
TLAB_API tlab_status tlab_corpus_generate(const char *recipe_json,
                                          tlab_corpus **out,
                                          char **resolved_recipe);
TLAB_API tlab_status tlab_corpus_load(const char *path, tlab_corpus **out);
TLAB_API tlab_status tlab_corpus_save(const tlab_corpus *corpus,
                                      const char *path);
/* {"language", "feature_dim", "num_phones", "num_utterances", "num_words"} */
TLAB_API tlab_status tlab_corpus_summary(const tlab_corpus *corpus,
                                         char **json_out);
TLAB_API void tlab_corpus_free(tlab_corpus *corpus);

/* Checkpoints. */
TLAB_API tlab_status tlab_model_load(const char *path, tlab_model **out);
TLAB_API tlab_status tlab_model_save(const tlab_model *model,
                                     const char *path);
/* {"model", "stage", "step", "config", "trace"} */
TLAB_API tlab_status tlab_model_summary(const tlab_model *model,
                                        char **json_out);
TLAB_API void tlab_model_free(tlab_model *model);

/* Training. "loss": "rnnt" trains with the alignment-restricted transducer
 * loss, optionally transplanting from `seed`; "minwer" fine-tunes `seed`,
 * which is then required. dev corpora feed the per-epoch dev loss. */
TLAB_API tlab_status tlab_train(const char *config_json,
                                const tlab_corpus *const *train,
                                size_t n_train,
                                const tlab_corpus *const *dev, size_t n_dev,
                                const tlab_model *seed, tlab_model **out,
                                char **resolved_config);

/* Beam search over every utterance; one JSON line per utterance:
 * {"id", "words", "tokens", "log_prob"}. */
TLAB_API tlab_status tlab_decode(const tlab_model *model,
                                 const tlab_corpus *corpus,
                                 const char *beam_json, char **hyps_jsonl);

/* Scores hypothesis lines ({"id", "words"}) against the reference corpus.
 * Rare words are those seen fewer than rare_threshold times in
 * `train_counts` (every word is rare when it is NULL). */
TLAB_API tlab_status tlab_score(const tlab_corpus *reference,
                                const char *hyps_jsonl,
                                const tlab_corpus *train_counts,
                                int rare_threshold, char **report_json);

/* Experiment presets: table1, table2_domains, table3_rare, zero_shot,
 * warmup_ablation. size is "full" or "smoke"; overrides_json may be NULL. */
TLAB_API tlab_status tlab_experiment_setup(const char *size,
                                           const char *overrides_json,
                                           char **setup_json);
TLAB_API tlab_status tlab_experiment_run(const char *preset,
                                         const char *setup_json,
                                         uint64_t seed, const char *out_dir,
                                         char **metrics_json);

/* Transducer loss on a T x (U+1) x (V+1) row-major logit lattice, blank
 * last. band_left/band_right (1-based frame windows, U+1 each) may both be
 * NULL for the full lattice. grad (same size as logits) may be NULL. */
TLAB_API tlab_status tlab_rnnt_loss(int num_frames, int num_labels,
                                    int vocab_size, const double *logits,
                                    const int *labels, const int *band_left,
                                    const int *band_right, double *loss,
                                    double *grad);

/* 100 * (baseline - treatment) / baseline. */
TLAB_API tlab_status tlab_werr(double baseline, double treatment,
                               double *out);

#ifdef __cplusplus
}
#endif

#endif  /* TLAB_TLAB_H_ */
