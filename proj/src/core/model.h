// core/model.h

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

#ifndef TLAB_CORE_MODEL_H_
#define TLAB_CORE_MODEL_H_

// A tiny transducer: stacked tanh recurrent encoder, embedding + tanh
// recurrent predictor and a one-hidden-layer additive joiner. Forward
// passes keep caches; backward passes are written out by hand.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/lattice.h"

namespace tlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ModelConfig {
  int feature_dim = 8;
  int encoder_hidden = 32;
  int encoder_layers = 1;
  int predictor_hidden = 16;
  int joiner_hidden = 24;
  int vocab_size = 10;  // non-blank; blank is index vocab_size
  std::uint64_t rng_seed = 1;

  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

// Named leaves, iterated in name order.
class ParamTree {
 public:
  Matrix &operator[](const std::string &name) { return leaves_[name]; }
  const Matrix &at(const std::string &name) const;
  bool contains(const std::string &name) const {
    return leaves_.count(name) != 0;
  }
  std::size_t size() const { return leaves_.size(); }
  auto begin() { return leaves_.begin(); }
  auto end() { return leaves_.end(); }
  auto begin() const { return leaves_.begin(); }
  auto end() const { return leaves_.end(); }

  bool SameShape(const ParamTree &other) const;
  ParamTree ZerosLike() const;
  bool operator==(const ParamTree &other) const;

 private:
  std::map<std::string, Matrix> leaves_;
};

struct ModelParams {
  ModelConfig config;
  ParamTree encoder;
  ParamTree predictor;
  ParamTree joiner;

  // Visits encoder, predictor, joiner leaves in that order with a
  // "subtree.leaf" qualified name.
  void ForEach(const std::function<void(const std::string &, const Matrix &)>
                   &fn) const;
  void ForEach(const std::function<void(const std::string &, Matrix &)> &fn);
  bool operator==(const ModelParams &other) const;
};

struct GradientTree {
  ParamTree encoder;
  ParamTree predictor;
  ParamTree joiner;

  static GradientTree ZerosLike(const ModelParams &params);
  void ForEach(const std::function<void(const std::string &, Matrix &)> &fn);
  void ForEach(const std::function<void(const std::string &, const Matrix &)>
                   &fn) const;
  void Add(const GradientTree &other, double scale = 1.0);
  double SquaredNorm() const;
};

// Leaf shapes implied by a config: qualified name -> (rows, cols).
std::map<std::string, std::pair<int, int>> ParamShapes(const ModelConfig &c);

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero; deterministic
// in config.rng_seed.
ModelParams InitParams(const ModelConfig &config);

// ---- encoder ----
struct EncoderCache {
  std::vector<Matrix> inputs;   // per layer, T x in_dim
  std::vector<Matrix> outputs;  // per layer, T x H
  const Matrix &output() const { return outputs.back(); }
};
// features: T x feature_dim.
EncoderCache EncoderForward(const Matrix &features, const ModelParams &params);

// ---- predictor ----
struct PredictorCache {
  std::vector<int> labels;
  Matrix outputs;  // (U + 1) x P; row 0 is the start-of-sequence state
};
PredictorCache PredictorForward(const std::vector<int> &labels,
                                const ModelParams &params);
// One recurrence step from `state` after consuming `label`.
Vector PredictorStep(const Vector &state, int label, const ModelParams &params);
Vector PredictorInitialState(const ModelParams &params);

// ---- joiner ----
struct JoinerCache {
  Matrix enc_proj;   // T x J, W_enc h_enc[t]
  Matrix pred_proj;  // (U + 1) x J, W_pred h_pre[u]
  Matrix hidden;     // J x (T * (U + 1)); column t * (U + 1) + u
  std::vector<char> computed;  // cells actually evaluated
};
// Computes every cell, or only cells inside `band` when given (others stay 0).
LogitLattice JoinerForward(const EncoderCache &enc, const PredictorCache &pred,
                           const ModelParams &params, JoinerCache *cache,
                           const AlignmentBand *band = nullptr);
// Logits for one cell given projected encoder row and predictor state.
Vector JoinerLogits(const Vector &enc_proj_row, const Vector &pred_state,
                    const ModelParams &params);
Matrix ProjectEncoder(const Matrix &h_enc, const ModelParams &params);

// ---- backward ----
// Accumulate into grads; return gradients w.r.t. the module inputs.
void JoinerBackward(const LatticeGradient &lattice_grad,
                    const EncoderCache &enc, const PredictorCache &pred,
                    const JoinerCache &cache, const ModelParams &params,
                    GradientTree *grads, Matrix *d_enc, Matrix *d_pred);
void PredictorBackward(const Matrix &d_pred, const PredictorCache &cache,
                       const ModelParams &params, GradientTree *grads);
void EncoderBackward(const Matrix &d_enc, const EncoderCache &cache,
                     const ModelParams &params, GradientTree *grads);

struct TransducerPass {
  EncoderCache encoder;
  PredictorCache predictor;
  JoinerCache joiner;
  LogitLattice lattice;
};
TransducerPass ModelForward(const Matrix &features,
                            const std::vector<int> &labels,
                            const ModelParams &params,
                            const AlignmentBand *band = nullptr);
// Full chain rule for one lattice.
GradientTree ModelBackward(const LatticeGradient &lattice_grad,
                           const TransducerPass &pass,
                           const ModelParams &params);

// result.encoder = seed.encoder; predictor and joiner from target.
// Throws "incompatible encoder architecture" on shape mismatch.
ModelParams TransplantEncoder(const ModelParams &seed,
                              const ModelParams &target);

}  // namespace tlab

#endif  // TLAB_CORE_MODEL_H_
