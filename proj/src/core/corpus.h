// core/corpus.h

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

#ifndef TLAB_CORE_CORPUS_H_
#define TLAB_CORE_CORPUS_H_

// Synthetic multilingual speech-like corpora. A language is a lexicon plus
// per-token emission means ("phonetics"); a domain is the emission noise,
// token durations and a channel offset. Every utterance records the frame
// at which each token starts, which stands in for a forced alignment.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "core/model.h"
#include "core/vocab.h"
#include "json.hpp"

namespace tlab {

inline constexpr int kCorpusFormatVersion = 1;

struct LexiconEntry {
  std::string word;
  std::vector<int> tokens;
};

struct LanguageSpec {
  std::string name;
  std::vector<int> token_inventory;  // phones plus the boundary token
  Matrix emission_means;             // vocab size x feature_dim
  std::vector<LexiconEntry> lexicon;  // in Zipf rank order
  double zipf_exponent = 1.0;
  std::uint64_t relatedness_seed = 0;

  Vocabulary vocab() const {
    return Vocabulary(static_cast<int>(token_inventory.size()) - 1);
  }
  void Validate() const;
};

struct DomainSpec {
  std::string name = "default";
  double noise_std = 0.5;
  int min_duration = 2;
  int max_duration = 3;
  Vector channel_offset;  // feature_dim; empty means zero

  void Validate() const;
  bool operator==(const DomainSpec &o) const;
};

struct Utterance {
  std::string id;
  Matrix features;  // T x feature_dim
  std::vector<std::string> words;
  std::vector<int> tokens;
  std::vector<int> emit_frames;  // 1-based start frame of each token

  int num_frames() const { return static_cast<int>(features.rows()); }
  bool operator==(const Utterance &o) const;
};

struct Corpus {
  std::string language;
  int feature_dim = 0;
  int num_phones = 0;
  std::vector<Utterance> utterances;

  Vocabulary vocab() const { return Vocabulary(num_phones); }
  std::map<std::string, int> WordCounts() const;
  bool operator==(const Corpus &o) const = default;
};

struct FamilyOptions {
  int num_phones = 9;  // vocabulary of 10 with the boundary token
  int feature_dim = 8;
  int lexicon_size = 60;
  int min_word_len = 2;
  int max_word_len = 4;
  double zipf_exponent = 1.0;
  double emission_scale = 1.0;
  std::string name_prefix = "lang";
};

// Languages share one token inventory. Emission means are
// r * base + sqrt(1 - r^2) * own, with base and own i.i.d. Gaussian, so
// r = 1 gives identical phonetics and r = 0 independent draws.
std::vector<LanguageSpec> MakeLanguageFamily(std::uint64_t base_seed,
                                             int n_languages,
                                             double relatedness,
                                             const FamilyOptions &options = {});

struct WordCountRange {
  int min_words = 1;
  int max_words = 3;
};

// Deterministic in (lang, domain, rng_seed); utterance i draws from its own
// stream derived from (rng_seed, i).
std::vector<Utterance> Synthesize(const LanguageSpec &lang,
                                  const DomainSpec &domain, int n_utts,
                                  std::uint64_t rng_seed,
                                  WordCountRange words = {});

Corpus MakeCorpus(const LanguageSpec &lang, std::vector<Utterance> utts);

// Noise grows by 0.25 * severity, the longest duration by
// round(severity), and the channel offset moves 0.5 * severity along its
// own direction (a fixed alternating direction when zero).
DomainSpec DomainShift(const DomainSpec &domain, double severity);

// Stream seed for item `index` of a run seeded with `seed`.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

// Everything needed to regenerate one corpus: the family it belongs to,
// which member, the domain and the sample.
struct CorpusRecipe {
  std::uint64_t family_seed = 1;
  int languages = 4;
  int language_index = 0;
  double relatedness = 0.8;
  FamilyOptions family;
  double noise_std = 0.5;
  int min_duration = 1;
  int max_duration = 3;
  double domain_shift = 0.0;
  int utts = 100;
  std::uint64_t seed = 1;
  WordCountRange words;
};

nlohmann::json CorpusRecipeToJson(const CorpusRecipe &r);
// Missing keys keep their defaults; unknown keys are rejected.
CorpusRecipe CorpusRecipeFromJson(const nlohmann::json &j);
Corpus BuildCorpus(const CorpusRecipe &r);

// Line-delimited JSON: a header object then one object per utterance with
// base64 little-endian float64 features.
void SaveCorpus(const Corpus &corpus, const std::string &path);
Corpus LoadCorpus(const std::string &path);
std::string SerializeCorpus(const Corpus &corpus);
Corpus ParseCorpus(const std::string &text);

}  // namespace tlab

#endif  // TLAB_CORE_CORPUS_H_
