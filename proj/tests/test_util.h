// tests/test_util.h

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

#ifndef TLAB_TESTS_TEST_UTIL_H_
#define TLAB_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>
#include <vector>

#include "core/lattice.h"
#include "core/model.h"

namespace tlab::testing {

inline LogitLattice RandomLattice(std::mt19937_64 &rng, int T, int U, int V,
                                  double scale = 2.0) {
  std::uniform_int_distribution<int> label(0, V - 1);
  std::vector<int> labels;
  for (int u = 0; u < U; ++u) labels.push_back(label(rng));
  LogitLattice lat = LogitLattice::Zeros(T, labels, V);
  std::normal_distribution<double> n(0.0, scale);
  for (double &v : lat.values) v = n(rng);
  return lat;
}

// Uniformly messy valid band: each row starts inside the previous row and
// ends no earlier than the previous row.
inline AlignmentBand RandomBand(std::mt19937_64 &rng, int T, int U) {
  AlignmentBand band;
  band.left.assign(U + 1, 1);
  band.right.assign(U + 1, T);
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  band.right[0] = pick(1, T);
  for (int u = 1; u <= U; ++u) {
    band.left[u] = pick(band.left[u - 1], band.right[u - 1]);
    band.right[u] = pick(std::max(band.left[u], band.right[u - 1]), T);
  }
  band.right[U] = T;
  return band;
}

inline double RelErr(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

}  // namespace tlab::testing

#endif  // TLAB_TESTS_TEST_UTIL_H_
