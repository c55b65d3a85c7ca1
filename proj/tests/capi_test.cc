// tests/capi_test.cc

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

std::string Take(char *s) {
  std::string out = s ? s : "";
  tlab_free_string(s);
  return out;
}

tlab_corpus *Generate(const json &recipe) {
  tlab_corpus *c = nullptr;
  REQUIRE(tlab_corpus_generate(recipe.dump().c_str(), &c, nullptr) == TLAB_OK);
  return c;
}

json Small(int utts, int seed) {
  return {{"num_phones", 4}, {"feature_dim", 4}, {"lexicon_size", 12},
          {"utts", utts}, {"seed", seed}, {"max_words", 2}};
}

json SmallTrain(int epochs) {
  return {{"epochs", epochs},
          {"model",
           {{"feature_dim", 4}, {"vocab_size", 5}, {"encoder_hidden", 6},
            {"predictor_hidden", 4}, {"joiner_hidden", 5}}}};
}

}  // namespace

TEST_CASE("status codes and last error") {
  double out = 0.0;
  CHECK(tlab_werr(21.38, 13.64, &out) == TLAB_OK);
  CHECK(out == doctest::Approx(100.0 * (21.38 - 13.64) / 21.38));
  CHECK(std::string(tlab_last_error()).empty());

  CHECK(tlab_werr(0.0, 1.0, &out) == TLAB_ERROR_INVALID_ARGUMENT);
  CHECK_FALSE(std::string(tlab_last_error()).empty());
  CHECK(tlab_werr(1.0, 1.0, nullptr) == TLAB_ERROR_INVALID_ARGUMENT);

  tlab_corpus *c = nullptr;
  CHECK(tlab_corpus_generate("{not json", &c, nullptr) == TLAB_ERROR_PARSE);
  CHECK(c == nullptr);
  CHECK(tlab_corpus_generate("{\"bogus\": 1}", &c, nullptr) ==
        TLAB_ERROR_INVALID_ARGUMENT);
  CHECK(std::string(tlab_last_error()).find("bogus") != std::string::npos);
  CHECK(tlab_corpus_load("/nonexistent/x.jsonl", &c) == TLAB_ERROR_IO);
  char *s = nullptr;
  CHECK(tlab_experiment_setup("medium", nullptr, &s) ==
        TLAB_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("rnnt loss through the C interface") {
  // T = 2, U = 1, uniform over 3 outputs: two paths of three steps each.
  std::vector<double> logits(2 * 2 * 3, 0.0);
  int labels[] = {0};
  double loss = 0.0;
  std::vector<double> grad(logits.size());
  REQUIRE(tlab_rnnt_loss(2, 1, 2, logits.data(), labels, nullptr, nullptr,
                         &loss, grad.data()) == TLAB_OK);
  CHECK(loss == doctest::Approx(-std::log(2.0 / 27.0)).epsilon(1e-12));
  double total = 0.0;
  for (double g : grad) total += g;
  CHECK(std::abs(total) < 1e-12);  // softmax gradients sum to zero per cell

  // A band that excludes every path is rejected.
  int left[] = {2, 2}, right[] = {2, 1};
  CHECK(tlab_rnnt_loss(2, 1, 2, logits.data(), labels, left, right, &loss,
                       nullptr) != TLAB_OK);
  CHECK(tlab_rnnt_loss(2, 1, 2, logits.data(), labels, left, nullptr, &loss,
                       nullptr) == TLAB_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("corpus round trip and summary") {
  tlab_corpus *c = Generate(Small(7, 3));
  char *summary = nullptr;
  REQUIRE(tlab_corpus_summary(c, &summary) == TLAB_OK);
  json j = json::parse(Take(summary));
  CHECK(j["num_utterances"] == 7);
  CHECK(j["num_phones"] == 4);

  const std::string path = "capi_test_corpus.jsonl";
  REQUIRE(tlab_corpus_save(c, path.c_str()) == TLAB_OK);
  tlab_corpus *back = nullptr;
  REQUIRE(tlab_corpus_load(path.c_str(), &back) == TLAB_OK);
  REQUIRE(tlab_corpus_summary(back, &summary) == TLAB_OK);
  CHECK(json::parse(Take(summary)) == j);
  tlab_corpus_free(back);
  tlab_corpus_free(c);
  std::remove(path.c_str());

  char *resolved = nullptr;
  c = nullptr;
  REQUIRE(tlab_corpus_generate("{}", &c, &resolved) == TLAB_OK);
  json r = json::parse(Take(resolved));
  CHECK(r.contains("relatedness"));
  CHECK(r["utts"].get<int>() > 0);
  tlab_corpus_free(c);
}

TEST_CASE("train, fine-tune, decode and score") {
  tlab_corpus *train = Generate(Small(12, 1));
  tlab_corpus *dev = Generate(Small(4, 2));
  const tlab_corpus *train_list[] = {train};
  const tlab_corpus *dev_list[] = {dev};

  tlab_model *m = nullptr;
  char *resolved = nullptr;
  REQUIRE(tlab_train(SmallTrain(1).dump().c_str(), train_list, 1, dev_list, 1,
                     nullptr, &m, &resolved) == TLAB_OK);
  CHECK(json::parse(Take(resolved))["loss"] == "rnnt");

  json ft = SmallTrain(1);
  ft["loss"] = "minwer";
  ft["transplant"] = "full";
  tlab_model *f = nullptr;
  CHECK(tlab_train(ft.dump().c_str(), train_list, 1, dev_list, 1, nullptr, &f,
                   nullptr) == TLAB_ERROR_INVALID_ARGUMENT);
  REQUIRE(tlab_train(ft.dump().c_str(), train_list, 1, dev_list, 1, m, &f,
                     nullptr) == TLAB_OK);
  char *summary = nullptr;
  REQUIRE(tlab_model_summary(f, &summary) == TLAB_OK);
  json info = json::parse(Take(summary));
  CHECK(info["trace"].size() == 2);

  char *hyps = nullptr;
  REQUIRE(tlab_decode(f, dev, "{\"beam\": 3, \"n_best\": 2}", &hyps) ==
          TLAB_OK);
  std::string lines = Take(hyps);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 4);

  char *report = nullptr;
  REQUIRE(tlab_score(dev, lines.c_str(), train, 5, &report) == TLAB_OK);
  json r = json::parse(Take(report));
  CHECK(r["rare_errors"].get<int>() + r["nonrare_errors"].get<int>() ==
        r["substitutions"].get<int>() + r["deletions"].get<int>() +
            r["insertions"].get<int>());
  CHECK(r["rare_ref"].get<int>() + r["nonrare_ref"].get<int>() ==
        r["n_ref"].get<int>());

  // A missing hypothesis and a mismatched corpus are argument errors.
  std::string partial = lines.substr(lines.find('\n') + 1);
  CHECK(tlab_score(dev, partial.c_str(), nullptr, 5, &report) ==
        TLAB_ERROR_INVALID_ARGUMENT);
  CHECK(tlab_score(dev, "not json\n", nullptr, 5, &report) ==
        TLAB_ERROR_PARSE);
  tlab_corpus *other = Generate({{"utts", 2}});
  CHECK(tlab_decode(f, other, nullptr, &hyps) == TLAB_ERROR_INVALID_ARGUMENT);

  const std::string path = "capi_test_model.ckpt";
  REQUIRE(tlab_model_save(f, path.c_str()) == TLAB_OK);
  tlab_model *back = nullptr;
  REQUIRE(tlab_model_load(path.c_str(), &back) == TLAB_OK);
  REQUIRE(tlab_model_summary(back, &summary) == TLAB_OK);
  CHECK(json::parse(Take(summary)) == info);
  std::remove(path.c_str());

  tlab_model_free(back);
  tlab_corpus_free(other);
  tlab_model_free(f);
  tlab_model_free(m);
  tlab_corpus_free(dev);
  tlab_corpus_free(train);
}

TEST_CASE("experiment setup resolves overrides") {
  char *s = nullptr;
  REQUIRE(tlab_experiment_setup("smoke", "{\"mono_epochs\": 3}", &s) ==
          TLAB_OK);
  json j = json::parse(Take(s));
  CHECK(j["mono_epochs"] == 3);
  CHECK(tlab_experiment_setup("smoke", "{\"no_such_field\": 3}", &s) ==
        TLAB_ERROR_INVALID_ARGUMENT);
  CHECK(tlab_experiment_run("table9", j.dump().c_str(), 1, nullptr, &s) ==
        TLAB_ERROR_INVALID_ARGUMENT);
}
