// core/model.cc

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

#include "core/model.h"

#include <cmath>
#include <random>

#include "core/error.h"

namespace tlab {

void ModelConfig::Validate() const {
  if (feature_dim < 1 || encoder_hidden < 1 || encoder_layers < 1 ||
      predictor_hidden < 1 || joiner_hidden < 1 || vocab_size < 1)
    ThrowInvalid("model config: all dimensions must be >= 1");
}

const Matrix &ParamTree::at(const std::string &name) const {
  auto it = leaves_.find(name);
  if (it == leaves_.end()) ThrowInvalid("missing parameter leaf " + name);
  return it->second;
}

bool ParamTree::SameShape(const ParamTree &other) const {
  if (leaves_.size() != other.leaves_.size()) return false;
  auto it = other.leaves_.begin();
  for (const auto &[name, m] : leaves_) {
    if (it->first != name || it->second.rows() != m.rows() ||
        it->second.cols() != m.cols())
      return false;
    ++it;
  }
  return true;
}

ParamTree ParamTree::ZerosLike() const {
  ParamTree out;
  for (const auto &[name, m] : leaves_)
    out.leaves_[name] = Matrix::Zero(m.rows(), m.cols());
  return out;
}

bool ParamTree::operator==(const ParamTree &other) const {
  if (!SameShape(other)) return false;
  auto it = other.leaves_.begin();
  for (const auto &[name, m] : leaves_) {
    if (m != it->second) return false;
    ++it;
  }
  return true;
}

namespace {

template <typename Tree, typename Fn>
void VisitTrees(Tree &enc, Tree &pred, Tree &join, Fn &&fn) {
  for (auto &[name, m] : enc) fn("encoder." + name, m);
  for (auto &[name, m] : pred) fn("predictor." + name, m);
  for (auto &[name, m] : join) fn("joiner." + name, m);
}

std::string LayerName(int layer, const char *leaf) {
  return "l" + std::to_string(layer) + "." + leaf;
}

}  // namespace

void ModelParams::ForEach(
    const std::function<void(const std::string &, const Matrix &)> &fn) const {
  VisitTrees(encoder, predictor, joiner, fn);
}

void ModelParams::ForEach(
    const std::function<void(const std::string &, Matrix &)> &fn) {
  VisitTrees(encoder, predictor, joiner, fn);
}

bool ModelParams::operator==(const ModelParams &other) const {
  return config == other.config && encoder == other.encoder &&
         predictor == other.predictor && joiner == other.joiner;
}

GradientTree GradientTree::ZerosLike(const ModelParams &params) {
  return {params.encoder.ZerosLike(), params.predictor.ZerosLike(),
          params.joiner.ZerosLike()};
}

void GradientTree::ForEach(
    const std::function<void(const std::string &, Matrix &)> &fn) {
  VisitTrees(encoder, predictor, joiner, fn);
}

void GradientTree::ForEach(
    const std::function<void(const std::string &, const Matrix &)> &fn) const {
  VisitTrees(encoder, predictor, joiner, fn);
}

void GradientTree::Add(const GradientTree &other, double scale) {
  auto add = [scale](ParamTree &dst, const ParamTree &src) {
    for (auto &[name, m] : dst) m += scale * src.at(name);
  };
  add(encoder, other.encoder);
  add(predictor, other.predictor);
  add(joiner, other.joiner);
}

double GradientTree::SquaredNorm() const {
  double sum = 0.0;
  ForEach([&](const std::string &, const Matrix &m) { sum += m.squaredNorm(); });
  return sum;
}

std::map<std::string, std::pair<int, int>> ParamShapes(const ModelConfig &c) {
  std::map<std::string, std::pair<int, int>> shapes;
  int in_dim = c.feature_dim;
  for (int l = 0; l < c.encoder_layers; ++l) {
    shapes["encoder." + LayerName(l, "w_in")] = {c.encoder_hidden, in_dim};
    shapes["encoder." + LayerName(l, "w_rec")] = {c.encoder_hidden,
                                                 c.encoder_hidden};
    shapes["encoder." + LayerName(l, "b")] = {c.encoder_hidden, 1};
    in_dim = c.encoder_hidden;
  }
  shapes["predictor.embed"] = {c.predictor_hidden, c.vocab_size};
  shapes["predictor.w_rec"] = {c.predictor_hidden, c.predictor_hidden};
  shapes["predictor.b"] = {c.predictor_hidden, 1};
  shapes["joiner.w_enc"] = {c.joiner_hidden, c.encoder_hidden};
  shapes["joiner.w_pred"] = {c.joiner_hidden, c.predictor_hidden};
  shapes["joiner.b"] = {c.joiner_hidden, 1};
  shapes["joiner.w_out"] = {c.vocab_size + 1, c.joiner_hidden};
  shapes["joiner.b_out"] = {c.vocab_size + 1, 1};
  return shapes;
}

ModelParams InitParams(const ModelConfig &config) {
  config.Validate();
  ModelParams p;
  p.config = config;
  std::mt19937_64 rng(config.rng_seed);
  for (const auto &[qualified, shape] : ParamShapes(config)) {
    auto dot = qualified.find('.');
    std::string subtree = qualified.substr(0, dot);
    std::string leaf = qualified.substr(dot + 1);
    ParamTree &tree = subtree == "encoder"     ? p.encoder
                      : subtree == "predictor" ? p.predictor
                                               : p.joiner;
    Matrix m = Matrix::Zero(shape.first, shape.second);
    bool is_bias = shape.second == 1;
    if (!is_bias) {
      double scale = 1.0 / std::sqrt(static_cast<double>(shape.second));
      std::uniform_real_distribution<double> dist(-scale, scale);
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    }
    tree[leaf] = std::move(m);
  }
  return p;
}

EncoderCache EncoderForward(const Matrix &features, const ModelParams &params) {
  const ModelConfig &c = params.config;
  if (features.cols() != c.feature_dim)
    ThrowInvalid("encoder: feature dim " + std::to_string(features.cols()) +
                 " != " + std::to_string(c.feature_dim));
  const Eigen::Index T = features.rows();
  EncoderCache cache;
  Matrix input = features;
  for (int l = 0; l < c.encoder_layers; ++l) {
    const Matrix &w_in = params.encoder.at(LayerName(l, "w_in"));
    const Matrix &w_rec = params.encoder.at(LayerName(l, "w_rec"));
    const Matrix &b = params.encoder.at(LayerName(l, "b"));
    // Input projection for all frames at once: T x H.
    Matrix out = input * w_in.transpose();
    Vector prev = Vector::Zero(c.encoder_hidden);
    for (Eigen::Index t = 0; t < T; ++t) {
      Vector pre = out.row(t).transpose() + w_rec * prev + b.col(0);
      prev = pre.array().tanh();
      out.row(t) = prev.transpose();
    }
    cache.inputs.push_back(std::move(input));
    cache.outputs.push_back(out);
    input = std::move(out);
  }
  return cache;
}

Vector PredictorInitialState(const ModelParams &params) {
  return params.predictor.at("b").col(0).array().tanh();
}

Vector PredictorStep(const Vector &state, int label, const ModelParams &params) {
  const Matrix &embed = params.predictor.at("embed");
  if (label < 0 || label >= embed.cols())
    ThrowInvalid("predictor: label " + std::to_string(label) +
                 " out of range");
  Vector pre = embed.col(label) + params.predictor.at("w_rec") * state +
               params.predictor.at("b").col(0);
  return pre.array().tanh();
}

PredictorCache PredictorForward(const std::vector<int> &labels,
                                const ModelParams &params) {
  PredictorCache cache;
  cache.labels = labels;
  cache.outputs.resize(static_cast<Eigen::Index>(labels.size()) + 1,
                       params.config.predictor_hidden);
  Vector state = PredictorInitialState(params);
  cache.outputs.row(0) = state.transpose();
  for (std::size_t u = 0; u < labels.size(); ++u) {
    state = PredictorStep(state, labels[u], params);
    cache.outputs.row(u + 1) = state.transpose();
  }
  return cache;
}

Matrix ProjectEncoder(const Matrix &h_enc, const ModelParams &params) {
  return h_enc * params.joiner.at("w_enc").transpose();
}

Vector JoinerLogits(const Vector &enc_proj_row, const Vector &pred_state,
                    const ModelParams &params) {
  Vector z = (enc_proj_row + params.joiner.at("w_pred") * pred_state +
              params.joiner.at("b").col(0))
                 .array()
                 .tanh();
  return params.joiner.at("w_out") * z + params.joiner.at("b_out").col(0);
}

LogitLattice JoinerForward(const EncoderCache &enc, const PredictorCache &pred,
                           const ModelParams &params, JoinerCache *cache,
                           const AlignmentBand *band) {
  const ModelConfig &c = params.config;
  const Matrix &h_enc = enc.output();
  if (h_enc.cols() != c.encoder_hidden ||
      pred.outputs.cols() != c.predictor_hidden)
    ThrowInvalid("joiner: hidden dimension mismatch");
  const int T = static_cast<int>(h_enc.rows());
  const int U = static_cast<int>(pred.labels.size());
  if (band) ValidateBand(*band, T, U);

  JoinerCache local;
  JoinerCache &jc = cache ? *cache : local;
  jc.enc_proj = ProjectEncoder(h_enc, params);
  jc.pred_proj = pred.outputs * params.joiner.at("w_pred").transpose();
  jc.hidden = Matrix::Zero(c.joiner_hidden,
                           static_cast<Eigen::Index>(T) * (U + 1));
  jc.computed.assign(static_cast<std::size_t>(T) * (U + 1), 0);

  LogitLattice lat = LogitLattice::Zeros(T, pred.labels, c.vocab_size);
  const Matrix &w_out = params.joiner.at("w_out");
  const auto b = params.joiner.at("b").col(0);
  const auto b_out = params.joiner.at("b_out").col(0);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (band && !band->Contains(t, u)) continue;
      const Eigen::Index col = static_cast<Eigen::Index>(t) * (U + 1) + u;
      Vector z = (jc.enc_proj.row(t).transpose() +
                  jc.pred_proj.row(u).transpose() + b)
                     .array()
                     .tanh();
      Vector logits = w_out * z + b_out;
      jc.hidden.col(col) = z;
      jc.computed[col] = 1;
      auto cell = lat.Cell(t, u);
      for (int k = 0; k < lat.width(); ++k) cell[k] = logits[k];
    }
  }
  return lat;
}

void JoinerBackward(const LatticeGradient &lattice_grad,
                    const EncoderCache &enc, const PredictorCache &pred,
                    const JoinerCache &cache, const ModelParams &params,
                    GradientTree *grads, Matrix *d_enc, Matrix *d_pred) {
  const ModelConfig &c = params.config;
  const int T = static_cast<int>(enc.output().rows());
  const int U = static_cast<int>(pred.labels.size());
  if (lattice_grad.num_frames != T || lattice_grad.num_labels != U ||
      lattice_grad.vocab_size != c.vocab_size ||
      cache.computed.size() != static_cast<std::size_t>(T) * (U + 1))
    ThrowInvalid("model backward: cache does not match lattice gradient");

  const Matrix &w_out = params.joiner.at("w_out");
  Matrix &g_w_out = grads->joiner["w_out"];
  Matrix &g_b_out = grads->joiner["b_out"];
  Matrix &g_b = grads->joiner["b"];
  Matrix d_enc_proj = Matrix::Zero(T, c.joiner_hidden);
  Matrix d_pred_proj = Matrix::Zero(U + 1, c.joiner_hidden);

  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const Eigen::Index col = static_cast<Eigen::Index>(t) * (U + 1) + u;
      auto cell = lattice_grad.Cell(t, u);
      bool any = false;
      for (double v : cell) any |= v != 0.0;
      if (!any) continue;
      if (!cache.computed[col])
        ThrowInvalid("model backward: gradient on a cell that was not computed");
      Eigen::Map<const Vector> g(cell.data(), c.vocab_size + 1);
      const auto z = cache.hidden.col(col);
      g_w_out.noalias() += g * z.transpose();
      g_b_out.col(0) += g;
      Vector da = (w_out.transpose() * g).array() * (1.0 - z.array().square());
      g_b.col(0) += da;
      d_enc_proj.row(t) += da.transpose();
      d_pred_proj.row(u) += da.transpose();
    }
  }
  grads->joiner["w_enc"].noalias() += d_enc_proj.transpose() * enc.output();
  grads->joiner["w_pred"].noalias() += d_pred_proj.transpose() * pred.outputs;
  *d_enc = d_enc_proj * params.joiner.at("w_enc");
  *d_pred = d_pred_proj * params.joiner.at("w_pred");
}

void PredictorBackward(const Matrix &d_pred, const PredictorCache &cache,
                       const ModelParams &params, GradientTree *grads) {
  const int U = static_cast<int>(cache.labels.size());
  if (d_pred.rows() != U + 1 || d_pred.cols() != cache.outputs.cols())
    ThrowInvalid("predictor backward: shape mismatch");
  const Matrix &w_rec = params.predictor.at("w_rec");
  Matrix &g_embed = grads->predictor["embed"];
  Matrix &g_w_rec = grads->predictor["w_rec"];
  Matrix &g_b = grads->predictor["b"];
  Vector carry = Vector::Zero(cache.outputs.cols());
  for (int u = U; u >= 0; --u) {
    Vector g_u = cache.outputs.row(u).transpose();
    Vector d_pre = (d_pred.row(u).transpose() + carry).array() *
                   (1.0 - g_u.array().square());
    g_b.col(0) += d_pre;
    if (u > 0) {
      g_embed.col(cache.labels[u - 1]) += d_pre;
      g_w_rec.noalias() += d_pre * cache.outputs.row(u - 1);
      carry = w_rec.transpose() * d_pre;
    }
  }
}

void EncoderBackward(const Matrix &d_enc, const EncoderCache &cache,
                     const ModelParams &params, GradientTree *grads) {
  const int layers = params.config.encoder_layers;
  if (static_cast<int>(cache.outputs.size()) != layers ||
      d_enc.rows() != cache.output().rows() ||
      d_enc.cols() != cache.output().cols())
    ThrowInvalid("encoder backward: cache mismatch");
  Matrix d_out = d_enc;
  for (int l = layers - 1; l >= 0; --l) {
    const Matrix &w_in = params.encoder.at(LayerName(l, "w_in"));
    const Matrix &w_rec = params.encoder.at(LayerName(l, "w_rec"));
    Matrix &g_w_in = grads->encoder[LayerName(l, "w_in")];
    Matrix &g_w_rec = grads->encoder[LayerName(l, "w_rec")];
    Matrix &g_b = grads->encoder[LayerName(l, "b")];
    const Matrix &out = cache.outputs[l];
    const Matrix &in = cache.inputs[l];
    const Eigen::Index T = out.rows();
    Matrix d_pre_all(T, out.cols());
    Vector carry = Vector::Zero(out.cols());
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      Vector h = out.row(t).transpose();
      Vector d_pre = (d_out.row(t).transpose() + carry).array() *
                     (1.0 - h.array().square());
      d_pre_all.row(t) = d_pre.transpose();
      if (t > 0) g_w_rec.noalias() += d_pre * out.row(t - 1);
      carry = w_rec.transpose() * d_pre;
    }
    g_b.col(0) += d_pre_all.colwise().sum().transpose();
    g_w_in.noalias() += d_pre_all.transpose() * in;
    if (l > 0) d_out = d_pre_all * w_in;
  }
}

TransducerPass ModelForward(const Matrix &features,
                            const std::vector<int> &labels,
                            const ModelParams &params,
                            const AlignmentBand *band) {
  TransducerPass pass;
  pass.encoder = EncoderForward(features, params);
  pass.predictor = PredictorForward(labels, params);
  pass.lattice = JoinerForward(pass.encoder, pass.predictor, params,
                               &pass.joiner, band);
  return pass;
}

GradientTree ModelBackward(const LatticeGradient &lattice_grad,
                           const TransducerPass &pass,
                           const ModelParams &params) {
  GradientTree grads = GradientTree::ZerosLike(params);
  Matrix d_enc, d_pred;
  JoinerBackward(lattice_grad, pass.encoder, pass.predictor, pass.joiner,
                 params, &grads, &d_enc, &d_pred);
  PredictorBackward(d_pred, pass.predictor, params, &grads);
  EncoderBackward(d_enc, pass.encoder, params, &grads);
  return grads;
}

ModelParams TransplantEncoder(const ModelParams &seed,
                              const ModelParams &target) {
  if (!seed.encoder.SameShape(target.encoder))
    ThrowInvalid("incompatible encoder architecture");
  ModelParams out = target;
  out.encoder = seed.encoder;
  return out;
}

}  // namespace tlab
