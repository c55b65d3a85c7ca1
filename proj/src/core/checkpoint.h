// core/checkpoint.h

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

#ifndef TLAB_CORE_CHECKPOINT_H_
#define TLAB_CORE_CHECKPOINT_H_

// Checkpoint container (all integers little-endian):
//
//   char[8]  magic "TLABCKPT"
//   u32      format version (1)
//   u32      header length H
//   u8[H]    UTF-8 JSON header: model config, stage, step, config echo, trace
//   u32      leaf count N
//   N times: u32 name length, name bytes ("encoder.l0.w_in", ...),
//            u32 rows, u32 cols, rows * cols float64 in row-major order
//
// Leaves are written in ModelParams::ForEach order.

#include <cstdint>
#include <string>

#include "core/model.h"
#include "json.hpp"

namespace tlab {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::string stage = "init";
  std::int64_t step = 0;
  nlohmann::json config = nlohmann::json::object();  // config echo
  nlohmann::json trace = nlohmann::json::array();    // per-epoch records

  bool operator==(const Checkpoint &o) const {
    return params == o.params && stage == o.stage && step == o.step &&
           config == o.config && trace == o.trace;
  }
};

nlohmann::json ModelConfigToJson(const ModelConfig &c);
ModelConfig ModelConfigFromJson(const nlohmann::json &j);

std::string SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint ParseCheckpoint(const std::string &bytes);
void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);

}  // namespace tlab

#endif  // TLAB_CORE_CHECKPOINT_H_
