// core/minwer.h

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

#ifndef TLAB_CORE_MINWER_H_
#define TLAB_CORE_MINWER_H_

// Expected word-error risk over an N-best list and its gradient.

#include <string>
#include <vector>

#include "core/decode.h"
#include "core/lattice.h"
#include "core/vocab.h"

namespace tlab {

struct RiskTable {
  std::vector<double> risks;  // word edit distance per hypothesis
  double mean_risk = 0.0;
};

struct MinWerResult {
  double loss = 0.0;           // sum_i P_i (R_i - mean_risk)
  double expected_risk = 0.0;  // sum_i P_i R_i, the unbaselined objective
  std::vector<double> posteriors;
  RiskTable table;
};

// Softmax of hypothesis log-probabilities over the list.
std::vector<double> Posteriors(const NBestList &nbest);

MinWerResult MinWerLoss(const NBestList &nbest,
                        const std::vector<std::string> &ref_words,
                        const Vocabulary &vocab);

// d loss / d log_prob_i = P_i (R_i - sum_j P_j R_j). The baseline is a
// constant offset of the loss and drops out; these always sum to zero.
std::vector<double> ScoreGradients(const std::vector<double> &posteriors,
                                   const RiskTable &table);

// Per-hypothesis lattice gradients. lattices[i] / alphas[i] are the
// full-band lattice of hypothesis i and its forward variables.
std::vector<LatticeGradient> MinWerGrad(
    const NBestList &nbest, const MinWerResult &result,
    const std::vector<LogitLattice> &lattices,
    const std::vector<std::vector<double>> &alphas);

}  // namespace tlab

#endif  // TLAB_CORE_MINWER_H_
