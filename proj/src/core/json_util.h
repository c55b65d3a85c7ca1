// core/json_util.h

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

#ifndef TLAB_CORE_JSON_UTIL_H_
#define TLAB_CORE_JSON_UTIL_H_

#include <initializer_list>
#include <string>

#include "core/error.h"
#include "json.hpp"

namespace tlab {

inline void RejectUnknownKeys(const nlohmann::json &j,
                              std::initializer_list<const char *> keys,
                              const std::string &where) {
  if (!j.is_object()) ThrowInvalid(where + " must be an object");
  for (const auto &[k, v] : j.items()) {
    bool known = false;
    for (const char *allowed : keys) known |= k == allowed;
    if (!known) ThrowInvalid(where + ": unknown key \"" + k + "\"");
  }
}

}  // namespace tlab

#endif  // TLAB_CORE_JSON_UTIL_H_
