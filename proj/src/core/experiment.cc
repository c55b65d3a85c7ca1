// core/experiment.cc

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

#include "core/experiment.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "core/error.h"
#include "core/json_util.h"

namespace tlab {

using nlohmann::json;

ExperimentSetup::ExperimentSetup() {
  model.feature_dim = feature_dim;
  model.vocab_size = num_phones + 1;
  model.encoder_hidden = 48;
  model.encoder_layers = 3;
  model.predictor_hidden = 16;
  model.joiner_hidden = 24;
  cold_schedule.warmup_steps = 100;
  cold_schedule.hold_steps = 200;
  cold_schedule.init_lr = 0.0;
  cold_schedule.base_lr = 0.1;
  cold_schedule.decay_factor = 0.9;
  cold_schedule.decay_interval = 100;
  seeded_schedule = cold_schedule;
  seeded_schedule.warmup_steps = 0;
  seeded_schedule.hold_steps = 0;
  minwer_schedule.base_lr = 0.01;
}

ExperimentSetup ExperimentSetup::Smoke() {
  ExperimentSetup s;
  s.num_phones = 6;
  s.feature_dim = 6;
  s.model.feature_dim = 6;
  s.model.vocab_size = 7;
  s.model.encoder_layers = 1;
  s.lexicon_size = 20;
  s.high_utts = 40;
  s.low_utts = 16;
  s.dev_utts = 6;
  s.test_utts = 8;
  s.model.encoder_hidden = 8;
  s.model.predictor_hidden = 6;
  s.model.joiner_hidden = 8;
  s.pretrain_epochs = 1;
  s.mono_epochs = 2;
  s.minwer_epochs = 1;
  s.cold_schedule.warmup_steps = 2;
  s.cold_schedule.hold_steps = 2;
  s.cold_schedule.decay_interval = 2;
  s.seeded_schedule.decay_interval = 2;
  s.train_beam = {2, 2, 3};
  s.eval_beam = {2, 1, 3};
  return s;
}

json ExperimentSetupToJson(const ExperimentSetup &s) {
  return {{"num_phones", s.num_phones},
          {"feature_dim", s.feature_dim},
          {"lexicon_size", s.lexicon_size},
          {"relatedness", s.relatedness},
          {"zipf_exponent", s.zipf_exponent},
          {"high_utts", s.high_utts},
          {"low_utts", s.low_utts},
          {"dev_utts", s.dev_utts},
          {"test_utts", s.test_utts},
          {"min_words", s.words.min_words},
          {"max_words", s.words.max_words},
          {"noise_std", s.noise_std},
          {"min_duration", s.min_duration},
          {"max_duration", s.max_duration},
          {"ood_severity", s.ood_severity},
          {"model", ModelConfigToJson(s.model)},
          {"pretrain_epochs", s.pretrain_epochs},
          {"mono_epochs", s.mono_epochs},
          {"minwer_epochs", s.minwer_epochs},
          {"batch_size", s.batch_size},
          {"cold_schedule", LrScheduleToJson(s.cold_schedule)},
          {"seeded_schedule", LrScheduleToJson(s.seeded_schedule)},
          {"minwer_schedule", LrScheduleToJson(s.minwer_schedule)},
          {"band_left", s.band_left},
          {"band_right", s.band_right},
          {"train_beam", BeamOptionsToJson(s.train_beam)},
          {"eval_beam", BeamOptionsToJson(s.eval_beam)},
          {"rare_threshold", s.rare_threshold}};
}

ExperimentSetup ExperimentSetupFromJson(const json &j,
                                        const ExperimentSetup &base) {
  RejectUnknownKeys(
      j,
      {"num_phones", "feature_dim", "lexicon_size", "relatedness",
       "zipf_exponent", "high_utts", "low_utts", "dev_utts", "test_utts",
       "min_words", "max_words", "noise_std", "min_duration", "max_duration",
       "ood_severity", "model", "pretrain_epochs", "mono_epochs",
       "minwer_epochs", "batch_size", "cold_schedule", "seeded_schedule",
       "minwer_schedule", "band_left", "band_right", "train_beam",
       "eval_beam", "rare_threshold"},
      "experiment setup");
  ExperimentSetup s = base;
  try {
    s.num_phones = j.value("num_phones", s.num_phones);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.lexicon_size = j.value("lexicon_size", s.lexicon_size);
    s.relatedness = j.value("relatedness", s.relatedness);
    s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
    s.high_utts = j.value("high_utts", s.high_utts);
    s.low_utts = j.value("low_utts", s.low_utts);
    s.dev_utts = j.value("dev_utts", s.dev_utts);
    s.test_utts = j.value("test_utts", s.test_utts);
    s.words.min_words = j.value("min_words", s.words.min_words);
    s.words.max_words = j.value("max_words", s.words.max_words);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.min_duration = j.value("min_duration", s.min_duration);
    s.max_duration = j.value("max_duration", s.max_duration);
    s.ood_severity = j.value("ood_severity", s.ood_severity);
    if (j.contains("model")) s.model = ModelConfigFromJson(j.at("model"));
    s.pretrain_epochs = j.value("pretrain_epochs", s.pretrain_epochs);
    s.mono_epochs = j.value("mono_epochs", s.mono_epochs);
    s.minwer_epochs = j.value("minwer_epochs", s.minwer_epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    if (j.contains("cold_schedule"))
      s.cold_schedule = LrScheduleFromJson(j.at("cold_schedule"), s.cold_schedule);
    if (j.contains("seeded_schedule"))
      s.seeded_schedule =
          LrScheduleFromJson(j.at("seeded_schedule"), s.seeded_schedule);
    if (j.contains("minwer_schedule"))
      s.minwer_schedule =
          LrScheduleFromJson(j.at("minwer_schedule"), s.minwer_schedule);
    s.band_left = j.value("band_left", s.band_left);
    s.band_right = j.value("band_right", s.band_right);
    if (j.contains("train_beam"))
      s.train_beam = BeamOptionsFromJson(j.at("train_beam"), s.train_beam);
    if (j.contains("eval_beam"))
      s.eval_beam = BeamOptionsFromJson(j.at("eval_beam"), s.eval_beam);
    s.rare_threshold = j.value("rare_threshold", s.rare_threshold);
  } catch (const json::exception &e) {
    ThrowInvalid(std::string("experiment setup: ") + e.what());
  }
  if (s.model.feature_dim != s.feature_dim ||
      s.model.vocab_size != s.num_phones + 1)
    ThrowInvalid("experiment setup: model dimensions do not match the corpus");
  if (s.high_utts < 1 || s.low_utts < 1 || s.dev_utts < 1 || s.test_utts < 1)
    ThrowInvalid("experiment setup: corpus sizes must be positive");
  return s;
}

const std::vector<std::string> &ExperimentPresets() {
  static const std::vector<std::string> presets{
      "table1", "table2_domains", "table3_rare", "zero_shot",
      "warmup_ablation"};
  return presets;
}

WerReport EvaluateModel(const ModelParams &params, const Corpus &test,
                        const RareWordSet &rare, const BeamOptions &beam,
                        std::vector<WordPair> *pairs) {
  Vocabulary vocab = test.vocab();
  std::vector<WordPair> local;
  for (const Utterance &u : test.utterances) {
    NBestList nb = BeamSearch(params, u.features, beam);
    local.push_back({u.words, vocab.Words(nb.front().tokens)});
  }
  WerReport r = WerBreakdown(local, rare);
  if (pairs) *pairs = std::move(local);
  return r;
}

json WerReportToJson(const WerReport &r) {
  auto opt = [](const std::optional<double> &v) {
    return v ? json(*v) : json(nullptr);
  };
  return {{"wer", r.wer},
          {"substitutions", r.substitutions},
          {"deletions", r.deletions},
          {"insertions", r.insertions},
          {"n_ref", r.n_ref},
          {"rare_wer", opt(r.rare_wer)},
          {"nonrare_wer", opt(r.nonrare_wer)},
          {"threshold", r.threshold},
          {"rare_errors", r.rare_errors},
          {"nonrare_errors", r.nonrare_errors},
          {"rare_ref", r.rare_ref},
          {"nonrare_ref", r.nonrare_ref}};
}

namespace {

// Stream tags for DeriveSeed; each purpose gets its own range.
enum : std::uint64_t {
  kFamilyStream = 1,
  kFarFamilyStream = 2,
  kCorpusStream = 1000,
  kModelStream = 2000,
  kOrderStream = 3000,
};

struct Split {
  Corpus train, dev, test;
};

class Lab {
 public:
  Lab(const ExperimentSetup &setup, std::uint64_t seed)
      : s_(setup), seed_(seed) {
    in_domain_.name = "in-domain";
    in_domain_.noise_std = s_.noise_std;
    in_domain_.min_duration = s_.min_duration;
    in_domain_.max_duration = s_.max_duration;
    in_domain_.channel_offset = Vector::Zero(s_.feature_dim);
    out_domain_ = DomainShift(in_domain_, s_.ood_severity);
    out_domain_.name = "out-of-domain";
  }

  const ExperimentSetup &setup() const { return s_; }
  const DomainSpec &in_domain() const { return in_domain_; }
  const DomainSpec &out_domain() const { return out_domain_; }

  std::vector<LanguageSpec> Family(int n, double relatedness,
                                   std::uint64_t stream,
                                   const std::string &prefix) const {
    FamilyOptions o;
    o.num_phones = s_.num_phones;
    o.feature_dim = s_.feature_dim;
    o.lexicon_size = s_.lexicon_size;
    o.zipf_exponent = s_.zipf_exponent;
    o.name_prefix = prefix;
    return MakeLanguageFamily(DeriveSeed(seed_, stream), n, relatedness, o);
  }

  // `stream` distinguishes corpora of the same language (e.g. domains).
  Split MakeSplit(const LanguageSpec &lang, const DomainSpec &domain,
                  int n_train, std::uint64_t stream) const {
    auto make = [&](int n, std::uint64_t part) {
      return MakeCorpus(lang, Synthesize(lang, domain, n,
                                         DeriveSeed(seed_, kCorpusStream +
                                                               stream * 4 + part),
                                         s_.words));
    };
    return {make(n_train, 0), make(s_.dev_utts, 1), make(s_.test_utts, 2)};
  }

  TrainConfig Config(const std::string &stage, const LrSchedule &schedule,
                     int epochs, std::uint64_t model_tag,
                     std::uint64_t order_tag) const {
    TrainConfig c;
    c.stage = stage;
    c.schedule = schedule;
    c.epochs = epochs;
    c.batch_size = s_.batch_size;
    c.model = s_.model;
    c.model.rng_seed = DeriveSeed(seed_, kModelStream + model_tag);
    c.rng_seed = DeriveSeed(seed_, kOrderStream + order_tag);
    c.band_left = s_.band_left;
    c.band_right = s_.band_right;
    c.beam = s_.train_beam;
    return c;
  }

  Checkpoint Pretrain(const std::vector<const Split *> &langs,
                      std::uint64_t tag) const {
    TrainData data;
    for (const Split *sp : langs) {
      data.train.push_back(&sp->train);
      data.dev.push_back(&sp->dev);
    }
    TrainConfig c = Config("multilingual", s_.cold_schedule, s_.pretrain_epochs,
                           tag, tag);
    return TrainRnnt(data, c, nullptr);
  }

  // Monolingual RNNT, cold or encoder-seeded. Cold and seeded runs with the
  // same tag share the initial predictor/joiner and the batch order.
  Checkpoint Mono(const Split &sp, const Checkpoint *seed,
                  const LrSchedule &schedule, std::uint64_t tag) const {
    TrainConfig c = Config(seed ? "seeded-rnnt" : "rnnt", schedule,
                           s_.mono_epochs, tag, tag);
    if (seed) c.transplant = TransplantMode::kEncoderOnly;
    return TrainRnnt({{&sp.train}, {&sp.dev}}, c, seed);
  }

  Checkpoint MinWer(const Split &sp, const Checkpoint &seed,
                    std::uint64_t tag) const {
    TrainConfig c = Config("minwer", s_.minwer_schedule, s_.minwer_epochs,
                           tag, tag + 500);
    c.loss = LossKind::kMinWer;
    c.transplant = TransplantMode::kFull;
    return FinetuneMinWer({{&sp.train}, {&sp.dev}}, c, seed);
  }

  WerReport Eval(const Checkpoint &ck, const Split &sp) const {
    RareWordSet rare = ClassifyRare(sp.train.WordCounts(), s_.rare_threshold);
    return EvaluateModel(ck.params, sp.test, rare, s_.eval_beam);
  }

 private:
  ExperimentSetup s_;
  std::uint64_t seed_;
  DomainSpec in_domain_;
  DomainSpec out_domain_;
};

// Four related languages: two high-resource, two low-resource targets.
struct Family4 {
  std::vector<LanguageSpec> langs;
  std::vector<Split> splits;
  std::vector<const Split *> all() const {
    std::vector<const Split *> out;
    for (const Split &sp : splits) out.push_back(&sp);
    return out;
  }
};

Family4 BuildFamily(const Lab &lab, const DomainSpec &domain,
                    std::uint64_t stream) {
  const ExperimentSetup &s = lab.setup();
  Family4 f;
  f.langs = lab.Family(4, s.relatedness, kFamilyStream, "lang");
  for (int i = 0; i < 4; ++i)
    f.splits.push_back(lab.MakeSplit(f.langs[i], domain,
                                     i < 2 ? s.high_utts : s.low_utts,
                                     stream * 8 + i));
  return f;
}

constexpr int kTargets[] = {2, 3};

json WerTable(const std::map<std::string, std::map<std::string, WerReport>> &m) {
  json j = json::object();
  for (const auto &[row, per_lang] : m)
    for (const auto &[lang, r] : per_lang) j[row][lang] = WerReportToJson(r);
  return j;
}

ReportRow Row(const std::string &label,
              const std::map<std::string, WerReport> &per_lang,
              const std::vector<std::string> &langs,
              std::optional<double> WerReport::*field = nullptr) {
  ReportRow row{label, {}};
  for (const auto &l : langs) {
    const WerReport &r = per_lang.at(l);
    row.wers.push_back(field ? r.*field : std::optional<double>(r.wer));
  }
  return row;
}

ExperimentResult Table1(const Lab &lab, std::uint64_t seed) {
  Family4 fam = BuildFamily(lab, lab.in_domain(), 0);
  Checkpoint b = lab.Pretrain(fam.all(), 1);
  const ExperimentSetup &s = lab.setup();

  std::map<std::string, std::map<std::string, WerReport>> wer;
  json traces;
  std::vector<std::string> cols;
  for (int t : kTargets) {
    const Split &sp = fam.splits[t];
    const std::string &name = fam.langs[t].name;
    cols.push_back(name);
    std::uint64_t tag = 10 + t;
    Checkpoint a = lab.Mono(sp, nullptr, s.cold_schedule, tag);
    Checkpoint c = lab.Mono(sp, &b, s.seeded_schedule, tag);
    Checkpoint d = lab.MinWer(sp, b, tag);
    Checkpoint e = lab.MinWer(sp, c, tag);
    wer["A"][name] = lab.Eval(a, sp);
    wer["B"][name] = lab.Eval(b, sp);
    wer["C"][name] = lab.Eval(c, sp);
    wer["D"][name] = lab.Eval(d, sp);
    wer["E"][name] = lab.Eval(e, sp);
    traces["A"][name] = a.trace;
    traces["C"][name] = c.trace;
    traces["D"][name] = d.trace;
    traces["E"][name] = e.trace;
  }
  ReportTable t;
  t.title = "Staged multilingual encoder pretraining (toy)";
  t.columns = cols;
  t.rows = {Row("A. Monolingual ASR (baseline)", wer["A"], cols),
            Row("B. Multilingual ASR (seed)", wer["B"], cols),
            Row("C. B seeded monolingual RNNT ASR", wer["C"], cols),
            Row("D. B seeded monolingual MinWER ASR", wer["D"], cols),
            Row("E. C seeded monolingual MinWER ASR", wer["E"], cols)};
  ExperimentResult r{"table1", seed, {t}, json::object()};
  r.metrics["wer"] = WerTable(wer);
  r.metrics["traces"] = traces;
  r.metrics["seed_trace"] = b.trace;
  return r;
}

// Baseline and seeded MinWER pipeline per domain block.
struct DomainRun {
  std::vector<std::string> cols;
  // block -> row -> language
  std::map<std::string,
           std::map<std::string, std::map<std::string, WerReport>>> wer;
};

DomainRun RunDomains(const Lab &lab) {
  const ExperimentSetup &s = lab.setup();
  Family4 target = BuildFamily(lab, lab.in_domain(), 0);
  // The out-of-domain seed sees the same languages through shifted
  // acoustics and different utterances.
  Family4 shifted = BuildFamily(lab, lab.out_domain(), 1);
  Checkpoint seed_in = lab.Pretrain(target.all(), 1);
  Checkpoint seed_out = lab.Pretrain(shifted.all(), 2);

  DomainRun run;
  for (int t : kTargets) run.cols.push_back(target.langs[t].name);
  const std::pair<const char *, const Checkpoint *> blocks[] = {
      {"in-domain", &seed_in}, {"out-of-domain", &seed_out}};
  for (std::size_t bi = 0; bi < 2; ++bi) {
    const auto &[block, seed] = blocks[bi];
    for (int t : kTargets) {
      const Split &sp = target.splits[t];
      const std::string &name = target.langs[t].name;
      // Each block trains its own cold-start baseline.
      std::uint64_t tag = 20 + 10 * bi + t;
      Checkpoint a = lab.Mono(sp, nullptr, s.cold_schedule, tag);
      Checkpoint c = lab.Mono(sp, seed, s.seeded_schedule, tag);
      Checkpoint e = lab.MinWer(sp, c, tag);
      run.wer[block]["baseline"][name] = lab.Eval(a, sp);
      run.wer[block]["seeded"][name] = lab.Eval(e, sp);
    }
  }
  return run;
}

std::string BlockTitle(const std::string &block) {
  return block == "in-domain"
             ? "In-domain pretraining | seed: family multilingual, target: family"
             : "Out-of-domain pretraining | seed: shifted-domain multilingual, "
               "target: family";
}

ExperimentResult Table2(const Lab &lab, std::uint64_t seed) {
  DomainRun run = RunDomains(lab);
  ExperimentResult r{"table2_domains", seed, {}, json::object()};
  for (const char *block : {"in-domain", "out-of-domain"}) {
    ReportTable t;
    t.title = BlockTitle(block);
    t.columns = run.cols;
    t.rows = {Row("A. Monolingual ASR (baseline)", run.wer[block]["baseline"],
                  run.cols),
              Row("Seeded monolingual MinWER ASR", run.wer[block]["seeded"],
                  run.cols)};
    r.tables.push_back(t);
    r.metrics["wer"][block] = WerTable(run.wer[block]);
    auto base = RowAverage(t.rows[0]), treat = RowAverage(t.rows[1]);
    r.metrics["werr"][block] =
        base && treat && *base > 0 ? json(Werr(*base, *treat)) : json(nullptr);
  }
  return r;
}

ExperimentResult Table3(const Lab &lab, std::uint64_t seed) {
  DomainRun run = RunDomains(lab);
  ExperimentResult r{"table3_rare", seed, {}, json::object()};
  for (const char *block : {"in-domain", "out-of-domain"}) {
    for (bool rare : {true, false}) {
      auto field = rare ? &WerReport::rare_wer : &WerReport::nonrare_wer;
      ReportTable t;
      t.title = BlockTitle(block) + (rare ? " | rare words" : " | non-rare words");
      t.columns = run.cols;
      t.rows = {Row("A. Monolingual ASR", run.wer[block]["baseline"], run.cols,
                    field),
                Row("Seeded monolingual MinWER ASR", run.wer[block]["seeded"],
                    run.cols, field)};
      r.tables.push_back(t);
    }
    r.metrics["wer"][block] = WerTable(run.wer[block]);
  }
  r.metrics["rare_threshold"] = lab.setup().rare_threshold;
  return r;
}

ExperimentResult ZeroShot(const Lab &lab, std::uint64_t seed) {
  const ExperimentSetup &s = lab.setup();
  Family4 fam = BuildFamily(lab, lab.in_domain(), 0);
  // Pretrain without the last family member; it and an unrelated language
  // are the zero-shot targets.
  Checkpoint b = lab.Pretrain({&fam.splits[0], &fam.splits[1], &fam.splits[2]}, 1);
  LanguageSpec far = lab.Family(1, 0.0, kFarFamilyStream, "far")[0];
  Split far_split = lab.MakeSplit(far, lab.in_domain(), s.low_utts, 40);
  const std::pair<const LanguageSpec *, const Split *> targets[] = {
      {&fam.langs[3], &fam.splits[3]}, {&far, &far_split}};

  std::map<std::string, std::map<std::string, WerReport>> wer;
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto &[lang, sp] = targets[i];
    cols.push_back(lang->name);
    std::uint64_t tag = 50 + i;
    Checkpoint a = lab.Mono(*sp, nullptr, s.cold_schedule, tag);
    Checkpoint c = lab.Mono(*sp, &b, s.seeded_schedule, tag);
    Checkpoint e = lab.MinWer(*sp, c, tag);
    wer["baseline"][lang->name] = lab.Eval(a, *sp);
    wer["seeded"][lang->name] = lab.Eval(e, *sp);
  }
  ReportTable t;
  t.title = "Zero-shot targets (related: " + cols[0] + ", unrelated: " +
            cols[1] + ")";
  t.columns = cols;
  t.rows = {Row("Monolingual ASR", wer["baseline"], cols),
            Row("Seeded monolingual MinWER ASR", wer["seeded"], cols)};
  t.cell_werr = true;
  ExperimentResult r{"zero_shot", seed, {t}, json::object()};
  r.metrics["wer"] = WerTable(wer);
  for (const auto &c : cols)
    r.metrics["werr"][c] =
        wer["baseline"][c].wer > 0
            ? json(Werr(wer["baseline"][c].wer, wer["seeded"][c].wer))
            : json(nullptr);
  r.metrics["related"] = cols[0];
  r.metrics["unrelated"] = cols[1];
  return r;
}

ExperimentResult WarmupAblation(const Lab &lab, std::uint64_t seed) {
  const ExperimentSetup &s = lab.setup();
  Family4 fam = BuildFamily(lab, lab.in_domain(), 0);
  Checkpoint b = lab.Pretrain(fam.all(), 1);
  const int t = kTargets[0];
  const Split &sp = fam.splits[t];
  const std::string &name = fam.langs[t].name;
  std::uint64_t tag = 60;
  Checkpoint cold = lab.Mono(sp, nullptr, s.cold_schedule, tag);
  Checkpoint tri = lab.Mono(sp, &b, s.cold_schedule, tag);
  Checkpoint zero = lab.Mono(sp, &b, s.seeded_schedule, tag);

  const double target = cold.trace.back().at("dev_loss").get<double>();
  const int cold_epochs = EpochsToReach(cold.trace, target);
  const int tri_epochs = EpochsToReach(tri.trace, target);
  const int zero_epochs = EpochsToReach(zero.trace, target);

  ReportTable tab;
  tab.title = "Warm-up/hold ablation on " + name + " (test WER)";
  tab.columns = {name};
  tab.rows = {{"Cold start, three-stage LR", {lab.Eval(cold, sp).wer}},
              {"Seeded, three-stage LR", {lab.Eval(tri, sp).wer}},
              {"Seeded, warm-up = hold = 0", {lab.Eval(zero, sp).wer}}};
  ExperimentResult r{"warmup_ablation", seed, {tab}, json::object()};
  r.metrics["language"] = name;
  r.metrics["dev_loss_target"] = target;
  r.metrics["epochs_to_target"] = {
      {"cold", cold_epochs}, {"seeded_three_stage", tri_epochs},
      {"seeded_no_warmup", zero_epochs}};
  r.metrics["traces"] = {{"cold", cold.trace},
                         {"seeded_three_stage", tri.trace},
                         {"seeded_no_warmup", zero.trace}};
  return r;
}

std::string EpochText(int e) { return e < 0 ? "not reached" : std::to_string(e); }

}  // namespace

ExperimentResult RunExperiment(const std::string &preset,
                               const ExperimentSetup &setup,
                               std::uint64_t seed) {
  Lab lab(setup, seed);
  ExperimentResult r;
  if (preset == "table1") {
    r = Table1(lab, seed);
  } else if (preset == "table2_domains") {
    r = Table2(lab, seed);
  } else if (preset == "table3_rare") {
    r = Table3(lab, seed);
  } else if (preset == "zero_shot") {
    r = ZeroShot(lab, seed);
  } else if (preset == "warmup_ablation") {
    r = WarmupAblation(lab, seed);
  } else {
    ThrowInvalid("unknown experiment preset \"" + preset + "\"");
  }
  r.metrics["preset"] = preset;
  r.metrics["seed"] = seed;
  r.metrics["setup"] = ExperimentSetupToJson(setup);
  return r;
}

void WriteExperimentReports(const ExperimentResult &result,
                            const std::string &out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string &ext, const std::string &text) {
    std::string path =
        (std::filesystem::path(out_dir) / (result.preset + ext)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + path);
    out << text;
    if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
  };
  std::string human = EmitReport(result.tables, ReportLayout::kHuman);
  if (result.preset == "warmup_ablation") {
    const json &e = result.metrics.at("epochs_to_target");
    human += "\nEpochs to reach dev loss " +
             FormatFixed(result.metrics.at("dev_loss_target").get<double>(), 4) +
             ": cold " + EpochText(e.at("cold").get<int>()) +
             ", seeded three-stage " +
             EpochText(e.at("seeded_three_stage").get<int>()) +
             ", seeded no warm-up " +
             EpochText(e.at("seeded_no_warmup").get<int>()) + "\n";
  }
  write(".txt", human);
  write(".tsv", EmitReport(result.tables, ReportLayout::kTsv));
  write(".json", result.metrics.dump(2) + "\n");
}

}  // namespace tlab
