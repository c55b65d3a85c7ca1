// core/corpus.cc

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
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "core/base64.h"
#include "core/error.h"
#include "core/json_util.h"
#include "json.hpp"

namespace tlab {

using nlohmann::json;

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a combined state.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void LanguageSpec::Validate() const {
  if (lexicon.empty()) ThrowInvalid("language " + name + ": empty lexicon");
  const int vocab_size = static_cast<int>(token_inventory.size());
  if (emission_means.rows() != vocab_size)
    ThrowInvalid("language " + name + ": emission table size mismatch");
  if (!emission_means.allFinite())
    ThrowInvalid("language " + name + ": non-finite emission means");
  for (const auto &e : lexicon)
    for (int t : e.tokens)
      if (t < 0 || t >= vocab_size - 1)
        ThrowInvalid("language " + name + ": lexicon token outside inventory");
}

void DomainSpec::Validate() const {
  if (noise_std < 0.0) ThrowInvalid("domain: noise_std must be >= 0");
  if (min_duration < 1 || max_duration < min_duration)
    ThrowInvalid("domain: need 1 <= min_duration <= max_duration");
}

bool DomainSpec::operator==(const DomainSpec &o) const {
  return name == o.name && noise_std == o.noise_std &&
         min_duration == o.min_duration && max_duration == o.max_duration &&
         channel_offset.size() == o.channel_offset.size() &&
         channel_offset == o.channel_offset;
}

bool Utterance::operator==(const Utterance &o) const {
  return id == o.id && features.rows() == o.features.rows() &&
         features.cols() == o.features.cols() && features == o.features &&
         words == o.words && tokens == o.tokens && emit_frames == o.emit_frames;
}

std::map<std::string, int> Corpus::WordCounts() const {
  std::map<std::string, int> counts;
  for (const auto &u : utterances)
    for (const auto &w : u.words) ++counts[w];
  return counts;
}

namespace {

Matrix GaussianMatrix(std::mt19937_64 &rng, int rows, int cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

}  // namespace

std::vector<LanguageSpec> MakeLanguageFamily(std::uint64_t base_seed,
                                             int n_languages,
                                             double relatedness,
                                             const FamilyOptions &opt) {
  if (n_languages < 1) ThrowInvalid("language family: need n >= 1");
  if (!(relatedness >= 0.0 && relatedness <= 1.0))
    ThrowInvalid("language family: relatedness must be in [0, 1]");
  if (opt.num_phones < 1 || opt.num_phones > 26 || opt.feature_dim < 1 ||
      opt.min_word_len < 1 || opt.max_word_len < opt.min_word_len ||
      opt.lexicon_size < 1)
    ThrowInvalid("language family: invalid options");
  const int vocab_size = opt.num_phones + 1;
  std::mt19937_64 base_rng(DeriveSeed(base_seed, 0));
  Matrix base = GaussianMatrix(base_rng, vocab_size, opt.feature_dim,
                               opt.emission_scale);
  const double own_weight = std::sqrt(1.0 - relatedness * relatedness);

  std::vector<LanguageSpec> langs;
  for (int i = 0; i < n_languages; ++i) {
    LanguageSpec lang;
    lang.name = opt.name_prefix + std::to_string(i);
    lang.relatedness_seed = DeriveSeed(base_seed, i + 1);
    lang.zipf_exponent = opt.zipf_exponent;
    for (int t = 0; t < vocab_size; ++t) lang.token_inventory.push_back(t);
    std::mt19937_64 rng(lang.relatedness_seed);
    Matrix own = GaussianMatrix(rng, vocab_size, opt.feature_dim,
                                opt.emission_scale);
    lang.emission_means = relatedness * base + own_weight * own;

    Vocabulary vocab(opt.num_phones);
    std::uniform_int_distribution<int> len_dist(opt.min_word_len,
                                                opt.max_word_len);
    std::uniform_int_distribution<int> phone_dist(0, opt.num_phones - 1);
    std::set<std::string> seen;
    int attempts = 0;
    while (static_cast<int>(lang.lexicon.size()) < opt.lexicon_size) {
      if (++attempts > 100 * opt.lexicon_size)
        ThrowInvalid("language family: cannot draw enough distinct words");
      LexiconEntry e;
      int len = len_dist(rng);
      for (int k = 0; k < len; ++k) e.tokens.push_back(phone_dist(rng));
      e.word = vocab.Spell(e.tokens);
      if (seen.insert(e.word).second) lang.lexicon.push_back(std::move(e));
    }
    langs.push_back(std::move(lang));
  }
  return langs;
}

std::vector<Utterance> Synthesize(const LanguageSpec &lang,
                                  const DomainSpec &domain, int n_utts,
                                  std::uint64_t rng_seed,
                                  WordCountRange words) {
  lang.Validate();
  domain.Validate();
  if (n_utts < 0) ThrowInvalid("synthesize: n_utts must be >= 0");
  if (words.min_words < 1 || words.max_words < words.min_words)
    ThrowInvalid("synthesize: invalid words-per-utterance range");
  const int feat_dim = static_cast<int>(lang.emission_means.cols());
  Vector offset = domain.channel_offset.size() == 0
                      ? Vector::Zero(feat_dim)
                      : domain.channel_offset;
  if (offset.size() != feat_dim)
    ThrowInvalid("synthesize: channel offset dimension mismatch");
  const int boundary = lang.vocab().boundary();

  std::vector<double> weights;
  for (std::size_t r = 0; r < lang.lexicon.size(); ++r)
    weights.push_back(std::pow(static_cast<double>(r + 1), -lang.zipf_exponent));

  std::vector<Utterance> out;
  for (int i = 0; i < n_utts; ++i) {
    std::mt19937_64 rng(DeriveSeed(rng_seed, static_cast<std::uint64_t>(i)));
    std::discrete_distribution<int> word_dist(weights.begin(), weights.end());
    std::uniform_int_distribution<int> count_dist(words.min_words,
                                                  words.max_words);
    std::uniform_int_distribution<int> dur_dist(domain.min_duration,
                                                domain.max_duration);
    std::normal_distribution<double> noise(0.0, 1.0);

    Utterance utt;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%06d", lang.name.c_str(), i);
    utt.id = id;
    int n_words = count_dist(rng);
    for (int w = 0; w < n_words; ++w) {
      const LexiconEntry &e = lang.lexicon[word_dist(rng)];
      if (w > 0) utt.tokens.push_back(boundary);
      utt.words.push_back(e.word);
      utt.tokens.insert(utt.tokens.end(), e.tokens.begin(), e.tokens.end());
    }
    std::vector<int> durations;
    int total = 0;
    for (std::size_t k = 0; k < utt.tokens.size(); ++k) {
      durations.push_back(dur_dist(rng));
      utt.emit_frames.push_back(total + 1);
      total += durations.back();
    }
    utt.features.resize(total, feat_dim);
    int frame = 0;
    for (std::size_t k = 0; k < utt.tokens.size(); ++k) {
      for (int d = 0; d < durations[k]; ++d, ++frame) {
        for (int f = 0; f < feat_dim; ++f) {
          double eps = domain.noise_std > 0.0 ? noise(rng) : 0.0;
          utt.features(frame, f) = lang.emission_means(utt.tokens[k], f) +
                                   offset[f] + domain.noise_std * eps;
        }
      }
    }
    out.push_back(std::move(utt));
  }
  return out;
}

Corpus MakeCorpus(const LanguageSpec &lang, std::vector<Utterance> utts) {
  Corpus c;
  c.language = lang.name;
  c.feature_dim = static_cast<int>(lang.emission_means.cols());
  c.num_phones = lang.vocab().num_phones();
  c.utterances = std::move(utts);
  return c;
}

DomainSpec DomainShift(const DomainSpec &domain, double severity) {
  if (severity < 0.0) ThrowInvalid("domain shift: severity must be >= 0");
  if (severity == 0.0) return domain;
  DomainSpec out = domain;
  out.noise_std = domain.noise_std + 0.25 * severity;
  out.max_duration =
      domain.max_duration + static_cast<int>(std::lround(severity));
  Vector dir;
  double norm = domain.channel_offset.norm();
  if (domain.channel_offset.size() > 0 && norm > 0.0) {
    dir = domain.channel_offset / norm;
  } else {
    Eigen::Index dim = domain.channel_offset.size() > 0
                           ? domain.channel_offset.size()
                           : 0;
    if (dim == 0) ThrowInvalid("domain shift: channel offset dimension unknown");
    dir = Vector(dim);
    for (Eigen::Index i = 0; i < dim; ++i) dir[i] = (i % 2 == 0) ? 1.0 : -1.0;
    dir /= dir.norm();
  }
  Vector base = domain.channel_offset.size() > 0
                    ? domain.channel_offset
                    : Vector::Zero(dir.size());
  out.channel_offset = base + 0.5 * severity * dir;
  out.name = domain.name + "+shift";
  return out;
}

json CorpusRecipeToJson(const CorpusRecipe &r) {
  return {{"family_seed", r.family_seed},
          {"languages", r.languages},
          {"language_index", r.language_index},
          {"relatedness", r.relatedness},
          {"name_prefix", r.family.name_prefix},
          {"num_phones", r.family.num_phones},
          {"feature_dim", r.family.feature_dim},
          {"lexicon_size", r.family.lexicon_size},
          {"min_word_len", r.family.min_word_len},
          {"max_word_len", r.family.max_word_len},
          {"zipf_exponent", r.family.zipf_exponent},
          {"emission_scale", r.family.emission_scale},
          {"noise_std", r.noise_std},
          {"min_duration", r.min_duration},
          {"max_duration", r.max_duration},
          {"domain_shift", r.domain_shift},
          {"utts", r.utts},
          {"seed", r.seed},
          {"min_words", r.words.min_words},
          {"max_words", r.words.max_words}};
}

CorpusRecipe CorpusRecipeFromJson(const json &j) {
  RejectUnknownKeys(
      j,
      {"family_seed", "languages", "language_index", "relatedness",
       "name_prefix", "num_phones", "feature_dim", "lexicon_size",
       "min_word_len", "max_word_len", "zipf_exponent", "emission_scale",
       "noise_std", "min_duration", "max_duration", "domain_shift", "utts",
       "seed", "min_words", "max_words"},
      "corpus recipe");
  CorpusRecipe r;
  try {
    r.family_seed = j.value("family_seed", r.family_seed);
    r.languages = j.value("languages", r.languages);
    r.language_index = j.value("language_index", r.language_index);
    r.relatedness = j.value("relatedness", r.relatedness);
    r.family.name_prefix = j.value("name_prefix", r.family.name_prefix);
    r.family.num_phones = j.value("num_phones", r.family.num_phones);
    r.family.feature_dim = j.value("feature_dim", r.family.feature_dim);
    r.family.lexicon_size = j.value("lexicon_size", r.family.lexicon_size);
    r.family.min_word_len = j.value("min_word_len", r.family.min_word_len);
    r.family.max_word_len = j.value("max_word_len", r.family.max_word_len);
    r.family.zipf_exponent = j.value("zipf_exponent", r.family.zipf_exponent);
    r.family.emission_scale =
        j.value("emission_scale", r.family.emission_scale);
    r.noise_std = j.value("noise_std", r.noise_std);
    r.min_duration = j.value("min_duration", r.min_duration);
    r.max_duration = j.value("max_duration", r.max_duration);
    r.domain_shift = j.value("domain_shift", r.domain_shift);
    r.utts = j.value("utts", r.utts);
    r.seed = j.value("seed", r.seed);
    r.words.min_words = j.value("min_words", r.words.min_words);
    r.words.max_words = j.value("max_words", r.words.max_words);
  } catch (const json::exception &e) {
    ThrowInvalid(std::string("corpus recipe: ") + e.what());
  }
  if (r.language_index < 0 || r.language_index >= r.languages)
    ThrowInvalid("corpus recipe: language_index must be in [0, languages)");
  if (r.utts < 0) ThrowInvalid("corpus recipe: utts must be >= 0");
  return r;
}

Corpus BuildCorpus(const CorpusRecipe &r) {
  if (r.language_index < 0 || r.language_index >= r.languages)
    ThrowInvalid("corpus recipe: language_index must be in [0, languages)");
  auto family = MakeLanguageFamily(r.family_seed, r.languages, r.relatedness,
                                   r.family);
  const LanguageSpec &lang = family[r.language_index];
  DomainSpec domain;
  domain.noise_std = r.noise_std;
  domain.min_duration = r.min_duration;
  domain.max_duration = r.max_duration;
  domain.channel_offset = Vector::Zero(r.family.feature_dim);
  domain = DomainShift(domain, r.domain_shift);
  return MakeCorpus(lang, Synthesize(lang, domain, r.utts, r.seed, r.words));
}

namespace {

[[noreturn]] void ParseFail(std::size_t line, const std::string &what) {
  throw Error(ErrorKind::kParse,
              "corpus line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string SerializeCorpus(const Corpus &corpus) {
  std::ostringstream os;
  json header = {{"format", "tlab-corpus"},
                 {"version", kCorpusFormatVersion},
                 {"language", corpus.language},
                 {"feature_dim", corpus.feature_dim},
                 {"num_phones", corpus.num_phones},
                 {"num_utterances", corpus.utterances.size()}};
  os << header.dump() << "\n";
  for (const auto &u : corpus.utterances) {
    // Row-major frames.
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(u.features.size()));
    for (Eigen::Index t = 0; t < u.features.rows(); ++t)
      for (Eigen::Index f = 0; f < u.features.cols(); ++f)
        flat.push_back(u.features(t, f));
    json rec = {{"id", u.id},
                {"num_frames", u.features.rows()},
                {"features", Base64Encode(PackDoublesLE(flat))},
                {"words", u.words},
                {"tokens", u.tokens},
                {"emit_frames", u.emit_frames}};
    os << rec.dump() << "\n";
  }
  return os.str();
}

Corpus ParseCorpus(const std::string &text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  Corpus c;
  bool have_header = false;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      ParseFail(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != "tlab-corpus")
          ParseFail(line_no, "not a tlab corpus file");
        int version = j.at("version").get<int>();
        if (version != kCorpusFormatVersion)
          ParseFail(line_no, "unsupported corpus version " +
                                 std::to_string(version));
        c.language = j.at("language").get<std::string>();
        c.feature_dim = j.at("feature_dim").get<int>();
        c.num_phones = j.at("num_phones").get<int>();
        expected = j.at("num_utterances").get<std::size_t>();
        have_header = true;
        continue;
      }
      Utterance u;
      u.id = j.at("id").get<std::string>();
      int frames = j.at("num_frames").get<int>();
      auto bytes = Base64Decode(j.at("features").get<std::string>());
      if (!bytes) ParseFail(line_no, "corrupted base64 feature payload");
      auto values = UnpackDoublesLE(*bytes);
      if (!values || frames < 0 ||
          values->size() != static_cast<std::size_t>(frames) * c.feature_dim)
        ParseFail(line_no, "feature payload size mismatch");
      u.features.resize(frames, c.feature_dim);
      for (int t = 0; t < frames; ++t)
        for (int f = 0; f < c.feature_dim; ++f)
          u.features(t, f) = (*values)[static_cast<std::size_t>(t) *
                                           c.feature_dim + f];
      u.words = j.at("words").get<std::vector<std::string>>();
      u.tokens = j.at("tokens").get<std::vector<int>>();
      u.emit_frames = j.at("emit_frames").get<std::vector<int>>();
      if (u.emit_frames.size() != u.tokens.size())
        ParseFail(line_no, "emit_frames / tokens length mismatch");
      for (std::size_t k = 0; k < u.tokens.size(); ++k) {
        if (u.tokens[k] < 0 || u.tokens[k] > c.num_phones)
          ParseFail(line_no, "token out of range");
        if (u.emit_frames[k] < 1 || u.emit_frames[k] > frames ||
            (k > 0 && u.emit_frames[k] < u.emit_frames[k - 1]))
          ParseFail(line_no, "emit_frames not monotone within [1, T]");
      }
      c.utterances.push_back(std::move(u));
    } catch (const json::exception &e) {
      ParseFail(line_no, std::string("bad field: ") + e.what());
    }
  }
  if (!have_header) ParseFail(line_no, "missing header");
  if (c.utterances.size() != expected)
    ParseFail(line_no, "expected " + std::to_string(expected) +
                           " utterances, found " +
                           std::to_string(c.utterances.size()));
  return c;
}

void SaveCorpus(const Corpus &corpus, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << SerializeCorpus(corpus);
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

Corpus LoadCorpus(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseCorpus(ss.str());
}

}  // namespace tlab
