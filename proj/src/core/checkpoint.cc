// core/checkpoint.cc

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

#include "core/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.h"

namespace tlab {

using nlohmann::json;

json ModelConfigToJson(const ModelConfig &c) {
  return {{"feature_dim", c.feature_dim},
          {"encoder_hidden", c.encoder_hidden},
          {"encoder_layers", c.encoder_layers},
          {"predictor_hidden", c.predictor_hidden},
          {"joiner_hidden", c.joiner_hidden},
          {"vocab_size", c.vocab_size},
          {"rng_seed", c.rng_seed}};
}

ModelConfig ModelConfigFromJson(const json &j) {
  ModelConfig c;
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.predictor_hidden = j.value("predictor_hidden", c.predictor_hidden);
  c.joiner_hidden = j.value("joiner_hidden", c.joiner_hidden);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.Validate();
  return c;
}

namespace {

constexpr char kMagic[8] = {'T', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};

void PutU32(std::string &out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>(v >> (8 * b)));
}

void PutF64(std::string &out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>(bits >> (8 * b)));
}

class Reader {
 public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}
  void Need(std::size_t n) {
    if (pos_ + n > bytes_.size())
      throw Error(ErrorKind::kParse, "checkpoint truncated");
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + b]))
           << (8 * b);
    pos_ += 4;
    return v;
  }
  double F64() {
    Need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + b]))
           << (8 * b);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::string &bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Checkpoint &ckpt) {
  std::string out(kMagic, kMagic + 8);
  PutU32(out, kCheckpointVersion);
  json header = {{"model", ModelConfigToJson(ckpt.params.config)},
                 {"stage", ckpt.stage},
                 {"step", ckpt.step},
                 {"config", ckpt.config},
                 {"trace", ckpt.trace}};
  std::string h = header.dump();
  PutU32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  std::uint32_t count = 0;
  ckpt.params.ForEach([&](const std::string &, const Matrix &) { ++count; });
  PutU32(out, count);
  ckpt.params.ForEach([&](const std::string &name, const Matrix &m) {
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<std::uint32_t>(m.rows()));
    PutU32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) PutF64(out, m(r, c));
  });
  return out;
}

Checkpoint ParseCheckpoint(const std::string &bytes) {
  Reader in(bytes);
  if (in.Bytes(8) != std::string(kMagic, kMagic + 8))
    throw Error(ErrorKind::kParse, "not a tlab checkpoint");
  std::uint32_t version = in.U32();
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::kParse,
                "unsupported checkpoint version " + std::to_string(version));
  json header;
  try {
    header = json::parse(in.Bytes(in.U32()));
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kParse, std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.params.config = ModelConfigFromJson(header.at("model"));
  ckpt.stage = header.value("stage", "init");
  ckpt.step = header.value("step", std::int64_t{0});
  ckpt.config = header.value("config", json::object());
  ckpt.trace = header.value("trace", json::array());

  auto shapes = ParamShapes(ckpt.params.config);
  std::uint32_t count = in.U32();
  if (count != shapes.size())
    throw Error(ErrorKind::kParse, "checkpoint leaf count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.Bytes(in.U32());
    std::uint32_t rows = in.U32(), cols = in.U32();
    auto it = shapes.find(name);
    if (it == shapes.end() || it->second.first != static_cast<int>(rows) ||
        it->second.second != static_cast<int>(cols))
      throw Error(ErrorKind::kParse, "checkpoint leaf " + name +
                                         " does not match the model config");
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = in.F64();
    auto dot = name.find('.');
    std::string subtree = name.substr(0, dot), leaf = name.substr(dot + 1);
    ParamTree &tree = subtree == "encoder"     ? ckpt.params.encoder
                      : subtree == "predictor" ? ckpt.params.predictor
                                               : ckpt.params.joiner;
    tree[leaf] = std::move(m);
  }
  if (!in.AtEnd()) throw Error(ErrorKind::kParse, "trailing checkpoint bytes");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  std::string bytes = SerializeCheckpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseCheckpoint(ss.str());
}

}  // namespace tlab
