// core/decode.h

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

#ifndef TLAB_CORE_DECODE_H_
#define TLAB_CORE_DECODE_H_

#include <vector>

#include "core/model.h"

namespace tlab {

struct Hypothesis {
  std::vector<int> tokens;  // no blanks
  double log_prob = 0.0;    // exact transducer log P(tokens | x)
};

// Sorted by descending log_prob, unique token sequences.
using NBestList = std::vector<Hypothesis>;

struct BeamOptions {
  int beam = 8;
  int n_best = 4;
  int max_symbols_per_frame = 5;
};

// Frame-synchronous argmax decoding. Ties go to the lowest index, so a
// label wins a tie against blank.
std::vector<int> GreedyDecode(const ModelParams &params, const Matrix &features,
                              int max_symbols_per_frame = 5);

// Exact log P(tokens | x) from the full-band lattice of `tokens`.
double ScoreSequence(const ModelParams &params, const EncoderCache &encoder,
                     const std::vector<int> &tokens);

// Frame-synchronous beam search. Within a frame, up to
// max_symbols_per_frame expansion rounds run; each round keeps the `beam`
// best one-token extensions (blank extensions finish the frame). Identical
// prefixes are merged with log-add. Surviving hypotheses are rescored with
// ScoreSequence and the best n_best returned. Beam 1 reproduces
// GreedyDecode.
NBestList BeamSearch(const ModelParams &params, const Matrix &features,
                     const BeamOptions &options);

// Descending score, then shorter, then lexicographically smaller.
bool HypothesisBefore(double score_a, const std::vector<int> &a,
                      double score_b, const std::vector<int> &b);

}  // namespace tlab

#endif  // TLAB_CORE_DECODE_H_
