// core/minwer.cc

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

#include "core/minwer.h"

#include <cmath>

#include "core/error.h"
#include "core/eval.h"

namespace tlab {

std::vector<double> Posteriors(const NBestList &nbest) {
  if (nbest.empty()) ThrowInvalid("posteriors: empty N-best list");
  std::vector<double> scores;
  for (const auto &h : nbest) scores.push_back(h.log_prob);
  double norm = LogSumExp(scores);
  std::vector<double> post;
  for (double s : scores) post.push_back(std::exp(s - norm));
  return post;
}

MinWerResult MinWerLoss(const NBestList &nbest,
                        const std::vector<std::string> &ref_words,
                        const Vocabulary &vocab) {
  if (nbest.empty()) ThrowInvalid("minwer: empty N-best list");
  MinWerResult r;
  r.posteriors = Posteriors(nbest);
  for (const auto &h : nbest) {
    double risk = AlignWords(ref_words, vocab.Words(h.tokens)).cost();
    r.table.risks.push_back(risk);
    r.table.mean_risk += risk;
  }
  r.table.mean_risk /= static_cast<double>(nbest.size());
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    r.expected_risk += r.posteriors[i] * r.table.risks[i];
    r.loss += r.posteriors[i] * (r.table.risks[i] - r.table.mean_risk);
  }
  return r;
}

std::vector<double> ScoreGradients(const std::vector<double> &posteriors,
                                   const RiskTable &table) {
  if (posteriors.size() != table.risks.size())
    ThrowInvalid("minwer: risk table does not match N-best list");
  double expected = 0.0;
  for (std::size_t i = 0; i < posteriors.size(); ++i)
    expected += posteriors[i] * table.risks[i];
  std::vector<double> g;
  for (std::size_t i = 0; i < posteriors.size(); ++i)
    g.push_back(posteriors[i] * (table.risks[i] - expected));
  return g;
}

std::vector<LatticeGradient> MinWerGrad(
    const NBestList &nbest, const MinWerResult &result,
    const std::vector<LogitLattice> &lattices,
    const std::vector<std::vector<double>> &alphas) {
  if (lattices.size() != nbest.size() || alphas.size() != nbest.size() ||
      result.table.risks.size() != nbest.size())
    ThrowInvalid("minwer: table/list misalignment");
  std::vector<double> score_grads =
      ScoreGradients(result.posteriors, result.table);
  std::vector<LatticeGradient> out;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    if (lattices[i].labels != nbest[i].tokens)
      ThrowInvalid("minwer: lattice labels do not match hypothesis");
    const LogitLattice &lat = lattices[i];
    LatticeGradient g = RnntGrad(
        lat, AlignmentBand::Full(lat.num_frames, lat.num_labels()), alphas[i]);
    // log_prob_i = -loss_i.
    for (double &v : g.values) v *= -score_grads[i];
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace tlab
