// tools/tlab_main.cc

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

// Command-line front end. Every subcommand reads an optional JSON config
// file (--config), applies explicitly given flags on top of it, and writes
// a manifest holding the fully resolved config next to its output. Passing
// that manifest back as --config replays the run.
//
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tlab/tlab.h"

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Check(tlab_status status, const std::string &what) {
  if (status != TLAB_OK)
    throw RuntimeError(what + ": " + tlab_last_error());
}

// Owns a string returned by the library.
std::string Take(char *s) {
  std::string out = s ? s : "";
  tlab_free_string(s);
  return out;
}

using CorpusPtr = std::unique_ptr<tlab_corpus, void (*)(tlab_corpus *)>;
using ModelPtr = std::unique_ptr<tlab_model, void (*)(tlab_model *)>;

CorpusPtr LoadCorpus(const std::string &path) {
  tlab_corpus *c = nullptr;
  Check(tlab_corpus_load(path.c_str(), &c), "loading corpus " + path);
  return CorpusPtr(c, tlab_corpus_free);
}

ModelPtr LoadModel(const std::string &path) {
  tlab_model *m = nullptr;
  Check(tlab_model_load(path.c_str(), &m), "loading checkpoint " + path);
  return ModelPtr(m, tlab_model_free);
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw RuntimeError("cannot write " + path);
}

// A flag that, when given, overrides one key path of the config.
struct Override {
  CLI::Option *option;
  std::vector<std::string> path;
  std::function<json()> value;
};

class Command {
 public:
  Command(CLI::App *app, std::string name, const std::string &help)
      : name_(std::move(name)) {
    sub_ = app->add_subcommand(name_, help);
    sub_->add_option("--config", config_path_,
                     "JSON config file or manifest of an earlier run");
  }

  CLI::App *app() { return sub_; }
  const std::string &name() const { return name_; }

  template <typename T>
  CLI::Option *Flag(const std::string &flag, std::vector<std::string> path,
                    const std::string &help) {
    auto value = std::make_shared<T>();
    CLI::Option *opt = sub_->add_option(flag, *value, help);
    overrides_.push_back({opt, std::move(path), [value] { return json(*value); }});
    return opt;
  }

  // Config file contents (manifests contribute their "config"), with
  // explicit flags applied, checked against the allowed top-level keys.
  json Resolve(std::initializer_list<const char *> keys) const {
    json cfg = json::object();
    if (!config_path_.empty()) {
      try {
        cfg = json::parse(ReadFile(config_path_));
      } catch (const json::exception &e) {
        throw UsageError("config " + config_path_ + ": " + e.what());
      } catch (const RuntimeError &e) {
        throw UsageError(e.what());
      }
      if (!cfg.is_object())
        throw UsageError("config " + config_path_ + " is not a JSON object");
      if (cfg.contains("subcommand")) {
        if (cfg["subcommand"] != name_)
          throw UsageError("manifest " + config_path_ + " belongs to '" +
                           cfg["subcommand"].get<std::string>() + "'");
        json inner = cfg.value("config", json::object());
        cfg = inner;
      }
      if (cfg.contains("schema_version")) {
        if (cfg["schema_version"] != kSchemaVersion)
          throw UsageError("config " + config_path_ +
                           ": unsupported schema_version");
        cfg.erase("schema_version");
      }
    }
    for (const auto &[key, v] : cfg.items()) {
      bool known = false;
      for (const char *k : keys) known = known || key == k;
      if (!known) throw UsageError("config: unknown key '" + key + "'");
    }
    for (const Override &o : overrides_) {
      if (o.option->count() == 0) continue;
      json *node = &cfg;
      for (const std::string &p : o.path) {
        if (!node->is_object()) *node = json::object();
        node = &(*node)[p];
      }
      *node = o.value();
    }
    return cfg;
  }

  void WriteManifest(const std::string &path, const json &config,
                     const json &outputs) const {
    json m = {{"schema_version", kSchemaVersion},
              {"tlab_version", tlab_version()},
              {"subcommand", name_},
              {"config", config},
              {"outputs", outputs}};
    WriteFile(path, m.dump(2) + "\n");
  }

 private:
  std::string name_;
  CLI::App *sub_ = nullptr;
  std::string config_path_;
  std::vector<Override> overrides_;
};

std::string Require(const json &cfg, const char *key, const char *flag) {
  if (!cfg.contains(key) || !cfg[key].is_string() ||
      cfg[key].get<std::string>().empty())
    throw UsageError(std::string(flag) + " is required");
  return cfg[key].get<std::string>();
}

std::vector<std::string> PathList(const json &cfg, const char *key) {
  if (!cfg.contains(key)) return {};
  try {
    return cfg[key].get<std::vector<std::string>>();
  } catch (const json::exception &) {
    throw UsageError(std::string("config: '") + key +
                     "' must be a list of paths");
  }
}

// gen-corpus ---------------------------------------------------------------

struct GenCorpus {
  Command cmd;
  std::string out;

  explicit GenCorpus(CLI::App *app)
      : cmd(app, "gen-corpus", "Generate a synthetic corpus (JSONL)") {
    cmd.app()->add_option("--out", out, "output corpus path")->required();
    cmd.Flag<std::uint64_t>("--family-seed", {"recipe", "family_seed"},
                            "seed of the language family");
    cmd.Flag<int>("--languages", {"recipe", "languages"},
                  "number of languages in the family");
    cmd.Flag<int>("--language", {"recipe", "language_index"},
                  "index of the language to sample");
    cmd.Flag<double>("--relatedness", {"recipe", "relatedness"},
                     "phonetic relatedness in [0, 1]");
    cmd.Flag<int>("--utts", {"recipe", "utts"}, "number of utterances");
    cmd.Flag<std::uint64_t>("--seed", {"recipe", "seed"}, "sampling seed");
    cmd.Flag<double>("--domain-shift", {"recipe", "domain_shift"},
                     "domain shift severity (0 = in-domain)");
    cmd.Flag<double>("--noise-std", {"recipe", "noise_std"},
                     "feature noise standard deviation");
    cmd.Flag<int>("--num-phones", {"recipe", "num_phones"}, "phone inventory");
    cmd.Flag<int>("--feature-dim", {"recipe", "feature_dim"},
                  "feature dimension");
  }

  void Run() {
    json cfg = cmd.Resolve({"recipe"});
    std::string recipe = cfg.value("recipe", json::object()).dump();
    tlab_corpus *c = nullptr;
    char *resolved = nullptr;
    Check(tlab_corpus_generate(recipe.c_str(), &c, &resolved),
          "gen-corpus");
    CorpusPtr corpus(c, tlab_corpus_free);
    json config = {{"recipe", json::parse(Take(resolved))}};
    Check(tlab_corpus_save(corpus.get(), out.c_str()), "gen-corpus");
    char *summary = nullptr;
    Check(tlab_corpus_summary(corpus.get(), &summary), "gen-corpus");
    std::cout << Take(summary) << "\n";
    cmd.WriteManifest(out + ".manifest.json", config, {{"corpus", out}});
  }
};

// train / finetune-minwer ----------------------------------------------------

struct Train {
  Command cmd;
  bool minwer;
  std::string out;

  Train(CLI::App *app, bool minwer_stage)
      : cmd(app, minwer_stage ? "finetune-minwer" : "train",
            minwer_stage
                ? "Fine-tune a checkpoint with the expected-WER objective"
                : "Train with the alignment-restricted transducer loss"),
        minwer(minwer_stage) {
    cmd.app()->add_option("--out", out, "output checkpoint path")->required();
    cmd.Flag<std::vector<std::string>>("--train", {"train"},
                                       "training corpora (one per language)");
    cmd.Flag<std::vector<std::string>>("--dev", {"dev"},
                                       "dev corpora for the dev-loss trace");
    cmd.Flag<std::string>("--seed-checkpoint", {"training", "seed_checkpoint"},
                          "checkpoint to initialize from");
    cmd.Flag<std::string>("--transplant", {"training", "transplant"},
                          "encoder_only | full | none")
        ->check(CLI::IsMember({"encoder_only", "full", "none"}));
    cmd.Flag<int>("--epochs", {"training", "epochs"}, "number of epochs");
    cmd.Flag<int>("--batch-size", {"training", "batch_size"}, "batch size");
    cmd.Flag<double>("--base-lr", {"training", "schedule", "base_lr"},
                     "peak learning rate");
    cmd.Flag<int>("--warmup", {"training", "schedule", "warmup_steps"},
                  "warm-up steps");
    cmd.Flag<int>("--hold", {"training", "schedule", "hold_steps"},
                  "hold steps");
    cmd.Flag<std::uint64_t>("--rng-seed", {"training", "rng_seed"},
                            "batch-order seed");
    cmd.Flag<std::uint64_t>("--init-seed", {"training", "model", "rng_seed"},
                            "parameter initialization seed");
  }

  void Run() {
    json cfg = cmd.Resolve({"train", "dev", "training"});
    json training = cfg.value("training", json::object());
    if (!training.is_object()) throw UsageError("config: 'training' must be an object");
    if (training.contains("loss") &&
        training["loss"] != (minwer ? "minwer" : "rnnt"))
      throw UsageError("config: loss must be '" +
                       std::string(minwer ? "minwer" : "rnnt") + "' here");
    training["loss"] = minwer ? "minwer" : "rnnt";
    if (minwer && !training.contains("transplant")) training["transplant"] = "full";
    if (minwer && !training.contains("stage")) training["stage"] = "minwer";
    std::vector<std::string> train_paths = PathList(cfg, "train");
    std::vector<std::string> dev_paths = PathList(cfg, "dev");
    if (train_paths.empty()) throw UsageError("--train is required");
    std::string seed_path;
    if (training.contains("seed_checkpoint") &&
        training["seed_checkpoint"].is_string())
      seed_path = training["seed_checkpoint"].get<std::string>();
    if (minwer && seed_path.empty())
      throw UsageError("--seed-checkpoint is required");

    std::vector<CorpusPtr> owned;
    std::vector<const tlab_corpus *> train, dev;
    for (const auto &p : train_paths) {
      owned.push_back(LoadCorpus(p));
      train.push_back(owned.back().get());
    }
    for (const auto &p : dev_paths) {
      owned.push_back(LoadCorpus(p));
      dev.push_back(owned.back().get());
    }
    ModelPtr seed(nullptr, tlab_model_free);
    if (!seed_path.empty()) seed = LoadModel(seed_path);

    std::string text = training.dump();
    tlab_model *m = nullptr;
    char *resolved = nullptr;
    Check(tlab_train(text.c_str(), train.data(), train.size(), dev.data(),
                     dev.size(), seed.get(), &m, &resolved),
          cmd.name());
    ModelPtr model(m, tlab_model_free);
    Check(tlab_model_save(model.get(), out.c_str()), cmd.name());

    char *summary = nullptr;
    Check(tlab_model_summary(model.get(), &summary), cmd.name());
    json info = json::parse(Take(summary));
    for (const json &rec : info["trace"]) std::cout << rec.dump() << "\n";

    json config = {{"train", train_paths},
                   {"dev", dev_paths},
                   {"training", json::parse(Take(resolved))}};
    cmd.WriteManifest(out + ".manifest.json", config, {{"checkpoint", out}});
  }
};

// decode -------------------------------------------------------------------

struct Decode {
  Command cmd;
  std::string out;

  explicit Decode(CLI::App *app)
      : cmd(app, "decode", "Beam-search decode a corpus to JSONL hypotheses") {
    cmd.app()->add_option("--out", out, "output hypotheses path")->required();
    cmd.Flag<std::string>("--model", {"model"}, "checkpoint path");
    cmd.Flag<std::string>("--corpus", {"corpus"}, "corpus path");
    cmd.Flag<int>("--beam", {"beam", "beam"}, "beam width");
    cmd.Flag<int>("--nbest", {"beam", "n_best"}, "n-best size");
    cmd.Flag<int>("--max-symbols", {"beam", "max_symbols_per_frame"},
                  "label expansions per frame");
  }

  void Run() {
    json cfg = cmd.Resolve({"model", "corpus", "beam"});
    std::string model_path = Require(cfg, "model", "--model");
    std::string corpus_path = Require(cfg, "corpus", "--corpus");
    ModelPtr model = LoadModel(model_path);
    CorpusPtr corpus = LoadCorpus(corpus_path);
    json beam = cfg.value("beam", json::object());
    std::string text = beam.dump();
    char *hyps = nullptr;
    Check(tlab_decode(model.get(), corpus.get(), text.c_str(), &hyps),
          "decode");
    WriteFile(out, Take(hyps));
    cmd.WriteManifest(out + ".manifest.json",
                      {{"model", model_path},
                       {"corpus", corpus_path},
                       {"beam", beam}},
                      {{"hypotheses", out}});
  }
};

// evaluate -----------------------------------------------------------------

struct Evaluate {
  Command cmd;
  std::string out;

  explicit Evaluate(CLI::App *app)
      : cmd(app, "evaluate", "Score hypotheses: WER plus rare/non-rare split") {
    cmd.app()->add_option("--out", out, "output report path (JSON)")
        ->required();
    cmd.Flag<std::string>("--reference", {"reference"}, "reference corpus");
    cmd.Flag<std::string>("--hyps", {"hypotheses"}, "hypotheses JSONL");
    cmd.Flag<std::string>("--train-corpus", {"train_counts"},
                          "corpus whose word counts define rare words");
    cmd.Flag<int>("--rare-threshold", {"rare_threshold"},
                  "words seen fewer times than this are rare");
  }

  void Run() {
    json cfg = cmd.Resolve(
        {"reference", "hypotheses", "train_counts", "rare_threshold"});
    std::string ref_path = Require(cfg, "reference", "--reference");
    std::string hyp_path = Require(cfg, "hypotheses", "--hyps");
    if (!cfg.contains("rare_threshold")) cfg["rare_threshold"] = 5;
    if (!cfg.contains("train_counts")) cfg["train_counts"] = nullptr;
    CorpusPtr ref = LoadCorpus(ref_path);
    CorpusPtr counts(nullptr, tlab_corpus_free);
    if (cfg["train_counts"].is_string())
      counts = LoadCorpus(cfg["train_counts"].get<std::string>());
    std::string hyps = ReadFile(hyp_path);
    char *report = nullptr;
    Check(tlab_score(ref.get(), hyps.c_str(), counts.get(),
                     cfg["rare_threshold"].get<int>(), &report),
          "evaluate");
    json r = json::parse(Take(report));
    WriteFile(out, r.dump(2) + "\n");
    std::cout << r.dump() << "\n";
    cmd.WriteManifest(out + ".manifest.json", cfg, {{"report", out}});
  }
};

// experiment ---------------------------------------------------------------

struct Experiment {
  Command cmd;
  std::string out;

  explicit Experiment(CLI::App *app)
      : cmd(app, "experiment",
            "Run a preset study: table1, table2_domains, table3_rare, "
            "zero_shot, warmup_ablation") {
    cmd.app()->add_option("--out", out, "output directory")->required();
    cmd.Flag<std::string>("preset", {"preset"}, "preset name");
    cmd.Flag<std::uint64_t>("--seed", {"seed"}, "experiment seed");
    cmd.Flag<std::string>("--size", {"size"}, "full | smoke")
        ->check(CLI::IsMember({"full", "smoke"}));
  }

  void Run() {
    json cfg = cmd.Resolve({"preset", "seed", "size", "setup"});
    std::string preset = Require(cfg, "preset", "preset");
    std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    std::string size = cfg.value("size", std::string("full"));
    std::string overrides = cfg.value("setup", json::object()).dump();
    char *setup = nullptr;
    Check(tlab_experiment_setup(size.c_str(), overrides.c_str(), &setup),
          "experiment setup");
    std::string setup_text = Take(setup);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw RuntimeError("cannot create " + out + ": " + ec.message());
    char *metrics = nullptr;
    Check(tlab_experiment_run(preset.c_str(), setup_text.c_str(), seed,
                              out.c_str(), &metrics),
          "experiment " + preset);
    Take(metrics);
    std::cout << ReadFile(out + "/" + preset + ".txt");
    json config = {{"preset", preset},
                   {"seed", seed},
                   {"size", size},
                   {"setup", json::parse(setup_text)}};
    cmd.WriteManifest(out + "/manifest.json", config,
                      {{"report_text", preset + ".txt"},
                       {"report_tsv", preset + ".tsv"},
                       {"report_json", preset + ".json"}});
  }
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Toy neural-transducer lab"};
  app.set_version_flag("--version", std::string(tlab_version()));
  app.require_subcommand(1);
  GenCorpus gen(&app);
  Train train(&app, false);
  Train minwer(&app, true);
  Decode decode(&app);
  Evaluate evaluate(&app);
  Experiment experiment(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen.cmd.app()->parsed()) gen.Run();
    else if (train.cmd.app()->parsed()) train.Run();
    else if (minwer.cmd.app()->parsed()) minwer.Run();
    else if (decode.cmd.app()->parsed()) decode.Run();
    else if (evaluate.cmd.app()->parsed()) evaluate.Run();
    else if (experiment.cmd.app()->parsed()) experiment.Run();
  } catch (const UsageError &e) {
    std::cerr << "tlab: " << e.what() << "\n"
              << "Run with --help for usage.\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "tlab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
