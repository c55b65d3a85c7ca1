// core/base64.h

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

#ifndef TLAB_CORE_BASE64_H_
#define TLAB_CORE_BASE64_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tlab {

std::string Base64Encode(std::span<const std::uint8_t> bytes);
// nullopt on any malformed input.
std::optional<std::vector<std::uint8_t>> Base64Decode(const std::string &text);

// Doubles as little-endian IEEE-754 binary64.
std::vector<std::uint8_t> PackDoublesLE(std::span<const double> values);
std::optional<std::vector<double>> UnpackDoublesLE(
    std::span<const std::uint8_t> bytes);

}  // namespace tlab

#endif  // TLAB_CORE_BASE64_H_
