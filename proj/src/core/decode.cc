// core/decode.cc

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

#include "core/decode.h"

#include <algorithm>
#include <map>

#include "core/error.h"

namespace tlab {

namespace {

Vector LogSoftmax(const Vector &logits) {
  double norm = LogSumExp(std::span<const double>(logits.data(),
                                                  logits.size()));
  return logits.array() - norm;
}

}  // namespace

bool HypothesisBefore(double score_a, const std::vector<int> &a,
                      double score_b, const std::vector<int> &b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<int> GreedyDecode(const ModelParams &params, const Matrix &features,
                              int max_symbols_per_frame) {
  EncoderCache enc = EncoderForward(features, params);
  Matrix enc_proj = ProjectEncoder(enc.output(), params);
  const int blank = params.config.vocab_size;
  std::vector<int> out;
  Vector state = PredictorInitialState(params);
  for (Eigen::Index t = 0; t < enc_proj.rows(); ++t) {
    for (int emitted = 0; emitted < max_symbols_per_frame; ++emitted) {
      Vector logits = JoinerLogits(enc_proj.row(t).transpose(), state, params);
      Eigen::Index best;
      logits.maxCoeff(&best);
      if (best == blank) break;
      out.push_back(static_cast<int>(best));
      state = PredictorStep(state, static_cast<int>(best), params);
    }
  }
  return out;
}

double ScoreSequence(const ModelParams &params, const EncoderCache &encoder,
                     const std::vector<int> &tokens) {
  PredictorCache pred = PredictorForward(tokens, params);
  LogitLattice lat = JoinerForward(encoder, pred, params, nullptr);
  return -RnntForward(lat).loss;
}

namespace {

struct BeamHyp {
  std::vector<int> tokens;
  double score = 0.0;
  Vector state;
};

struct Candidate {
  std::size_t parent;
  int token;  // blank == vocab_size
  double score;
};

// Keyed merge of hypotheses by token sequence.
void MergeInto(std::map<std::vector<int>, BeamHyp> &pool, BeamHyp hyp) {
  auto it = pool.find(hyp.tokens);
  if (it == pool.end()) {
    pool.emplace(hyp.tokens, std::move(hyp));
  } else {
    it->second.score = LogAdd(it->second.score, hyp.score);
  }
}

std::vector<BeamHyp> TopK(std::map<std::vector<int>, BeamHyp> &pool,
                          std::size_t k) {
  std::vector<BeamHyp> out;
  for (auto &[key, hyp] : pool) out.push_back(std::move(hyp));
  std::sort(out.begin(), out.end(), [](const BeamHyp &a, const BeamHyp &b) {
    return HypothesisBefore(a.score, a.tokens, b.score, b.tokens);
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace

NBestList BeamSearch(const ModelParams &params, const Matrix &features,
                     const BeamOptions &options) {
  if (options.n_best < 1 || options.beam < options.n_best)
    ThrowInvalid("beam search: need beam >= n_best >= 1");
  if (options.max_symbols_per_frame < 0)
    ThrowInvalid("beam search: max_symbols_per_frame must be >= 0");
  EncoderCache enc = EncoderForward(features, params);
  Matrix enc_proj = ProjectEncoder(enc.output(), params);
  const int blank = params.config.vocab_size;
  const std::size_t beam = static_cast<std::size_t>(options.beam);

  std::vector<BeamHyp> hyps(1);
  hyps[0].state = PredictorInitialState(params);

  for (Eigen::Index t = 0; t < enc_proj.rows(); ++t) {
    const Vector enc_row = enc_proj.row(t).transpose();
    std::map<std::vector<int>, BeamHyp> finished;
    std::vector<BeamHyp> frontier = std::move(hyps);
    for (int round = 0; !frontier.empty(); ++round) {
      const bool allow_labels = round < options.max_symbols_per_frame;
      std::vector<Candidate> cands;
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        Vector logp = LogSoftmax(JoinerLogits(enc_row, frontier[i].state, params));
        cands.push_back({i, blank, frontier[i].score + logp[blank]});
        if (allow_labels)
          for (int k = 0; k < blank; ++k)
            cands.push_back({i, k, frontier[i].score + logp[k]});
      }
      // Frontier is kept sorted, so parent index order is the hypothesis
      // tie-break; within a parent, lower token index (blank last) wins.
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Candidate &a, const Candidate &b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.parent != b.parent) return a.parent < b.parent;
                         return a.token < b.token;
                       });
      if (cands.size() > beam) cands.resize(beam);

      std::map<std::vector<int>, BeamHyp> next;
      for (const Candidate &c : cands) {
        const BeamHyp &parent = frontier[c.parent];
        BeamHyp h;
        h.tokens = parent.tokens;
        h.score = c.score;
        if (c.token == blank) {
          h.state = parent.state;
          MergeInto(finished, std::move(h));
        } else {
          h.tokens.push_back(c.token);
          h.state = PredictorStep(parent.state, c.token, params);
          MergeInto(next, std::move(h));
        }
      }
      frontier = TopK(next, beam);
    }
    hyps = TopK(finished, beam);
  }

  NBestList out;
  for (const BeamHyp &h : hyps)
    out.push_back({h.tokens, ScoreSequence(params, enc, h.tokens)});
  std::sort(out.begin(), out.end(), [](const Hypothesis &a, const Hypothesis &b) {
    return HypothesisBefore(a.log_prob, a.tokens, b.log_prob, b.tokens);
  });
  if (out.size() > static_cast<std::size_t>(options.n_best))
    out.resize(options.n_best);
  return out;
}

}  // namespace tlab
