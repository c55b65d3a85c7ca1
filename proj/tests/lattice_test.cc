// tests/lattice_test.cc

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

#include "core/lattice.h"

#include <cmath>
#include <random>

#include "core/error.h"
#include "doctest.h"
#include "test_util.h"

using namespace tlab;
using tlab::testing::RandomBand;
using tlab::testing::RandomLattice;

namespace {

std::int64_t Binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("LogSumExp basics") {
  std::vector<double> two_zeros{0.0, 0.0};
  CHECK(LogSumExp(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  std::vector<double> single{-3.25};
  CHECK(LogSumExp(single) == -3.25);
  std::vector<double> big{1000.0, 1000.0};
  // Shifted-arithmetic oracle: 1000 + log(exp(0) + exp(0)).
  CHECK(LogSumExp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  std::vector<double> zeros{kLogZero, kLogZero};
  CHECK(LogSumExp(zeros) == kLogZero);
  CHECK_THROWS_AS(LogSumExp(std::vector<double>{}), Error);
}

TEST_CASE("LogSumExp is shift equivariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> xs(1 + trial % 6);
    for (double &x : xs) x = n(rng);
    double c = n(rng) * 10;
    std::vector<double> shifted = xs;
    for (double &x : shifted) x += c;
    CHECK(std::fabs(LogSumExp(shifted) - (LogSumExp(xs) + c)) < 1e-12);
  }
}

TEST_CASE("uniform two-frame one-label lattice") {
  // Alignments: (label@1, blank, blank) and (blank, label@2, blank); each
  // has probability (1/3)^3.
  LogitLattice lat = LogitLattice::Zeros(2, {0}, 2);
  AlignmentBand full = AlignmentBand::Full(2, 1);
  CHECK(BruteForcePathCount(2, 1, full) == 2);
  double expected = -std::log(2.0 / 27.0);
  CHECK(RnntForward(lat).loss == doctest::Approx(expected).epsilon(1e-14));
  CHECK(BruteForceLoss(lat, full) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("single frame, no labels") {
  LogitLattice lat = LogitLattice::Zeros(1, {}, 3);
  lat.values = {0.3, -1.0, 2.0, 0.5};
  double norm = std::log(std::exp(0.3) + std::exp(-1.0) + std::exp(2.0) +
                         std::exp(0.5));
  CHECK(RnntForward(lat).loss == doctest::Approx(norm - 0.5).epsilon(1e-14));
}

TEST_CASE("single-path gradient by hand") {
  LogitLattice lat = LogitLattice::Zeros(1, {}, 1);
  auto fwd = RnntForward(lat);
  LatticeGradient g = RnntGrad(lat, AlignmentBand::Full(1, 0), fwd.log_alpha);
  CHECK(g.values[1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g.values[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("full-band path count is C(T+U-1, U)") {
  for (int T = 1; T <= 6; ++T)
    for (int U = 0; U <= 5; ++U)
      CHECK(BruteForcePathCount(T, U, AlignmentBand::Full(T, U)) ==
            Binomial(T + U - 1, U));
}

TEST_CASE("forward matches enumeration on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    int T = 1 + trial % 4, U = (trial / 4) % 4, V = 1 + (trial / 16) % 3;
    LogitLattice lat = RandomLattice(rng, T, U, V);
    AlignmentBand band = trial % 2 ? RandomBand(rng, T, U)
                                   : AlignmentBand::Full(T, U);
    double dp = RnntForward(lat, band).loss;
    double bf = BruteForceLoss(lat, band);
    CHECK(std::fabs(dp - bf) < 1e-9);
  }
}

TEST_CASE("restriction never lowers the loss; full band is identical") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    int T = 1 + trial % 5, U = trial % 4, V = 2;
    LogitLattice lat = RandomLattice(rng, T, U, V);
    double full = RnntForward(lat).loss;
    double restricted = RnntForward(lat, RandomBand(rng, T, U)).loss;
    CHECK(restricted >= full - 1e-12);
    CHECK(RnntForward(lat, AlignmentBand::Full(T, U)).loss == full);
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(13);
  const double h = 1e-5;
  for (int trial = 0; trial < 40; ++trial) {
    int T = 1 + trial % 4, U = trial % 3, V = 1 + trial % 3;
    LogitLattice lat = RandomLattice(rng, T, U, V, 1.0);
    AlignmentBand band = trial % 2 ? RandomBand(rng, T, U)
                                   : AlignmentBand::Full(T, U);
    auto fwd = RnntForward(lat, band);
    LatticeGradient g = RnntGrad(lat, band, fwd.log_alpha);
    for (std::size_t i = 0; i < lat.values.size(); ++i) {
      LogitLattice plus = lat, minus = lat;
      plus.values[i] += h;
      minus.values[i] -= h;
      double fd = (RnntForward(plus, band).loss - RnntForward(minus, band).loss) /
                  (2 * h);
      if (std::fabs(g.values[i]) > 1e-8)
        CHECK(tlab::testing::RelErr(g.values[i], fd) < 1e-4);
      else
        CHECK(std::fabs(fd) < 1e-7);
    }
  }
}

TEST_CASE("gradient is exactly zero outside the band") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    int T = 2 + trial % 5, U = 1 + trial % 3;
    LogitLattice lat = RandomLattice(rng, T, U, 3);
    AlignmentBand band = RandomBand(rng, T, U);
    auto fwd = RnntForward(lat, band);
    LatticeGradient g = RnntGrad(lat, band, fwd.log_alpha);
    for (int t = 0; t < T; ++t)
      for (int u = 0; u <= U; ++u)
        if (!band.Contains(t, u))
          for (double v : g.Cell(t, u)) CHECK(v == 0.0);
  }
}

TEST_CASE("band validation") {
  LogitLattice lat = LogitLattice::Zeros(3, {0}, 2);
  AlignmentBand gap;
  gap.left = {1, 3};
  gap.right = {2, 3};  // row 0 ends before row 1 starts
  CHECK_THROWS_WITH(RnntForward(lat, gap), "infeasible alignment band");
  AlignmentBand wrong_size = AlignmentBand::Full(3, 2);
  CHECK_THROWS_WITH(RnntForward(lat, wrong_size), "infeasible alignment band");
  CHECK_THROWS(RnntGrad(lat, AlignmentBand::Full(3, 1), std::vector<double>(2)));
}

TEST_CASE("brute force size guard") {
  LogitLattice lat = LogitLattice::Zeros(10, std::vector<int>(5, 0), 1);
  CHECK_THROWS_AS(BruteForceLoss(lat, AlignmentBand::Full(10, 5)), Error);
}

TEST_CASE("band from alignment") {
  SUBCASE("slack of T gives the full band") {
    std::vector<int> emit{2, 3, 3, 5};
    AlignmentBand b = BandFromAlignment(emit, 6, 6, 6);
    CHECK(b.left == AlignmentBand::Full(6, 4).left);
    CHECK(b.right == AlignmentBand::Full(6, 4).right);
  }
  SUBCASE("hand trace: one label at frame 2, zero slack, T = 3") {
    std::vector<int> emit{2};
    AlignmentBand b = BandFromAlignment(emit, 0, 0, 3);
    CHECK(b.left == std::vector<int>{1, 2});
    CHECK(b.right == std::vector<int>{2, 3});
    // Only the reference alignment survives.
    CHECK(BruteForcePathCount(3, 1, b) == 1);
  }
  SUBCASE("non-monotonic input rejected") {
    std::vector<int> emit{3, 2};
    CHECK_THROWS_AS(BandFromAlignment(emit, 1, 1, 4), Error);
  }
  SUBCASE("random alignments yield valid bands containing the reference") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 500; ++trial) {
      int T = 1 + static_cast<int>(rng() % 12);
      int U = static_cast<int>(rng() % 6);
      std::vector<int> emit;
      for (int u = 0; u < U; ++u)
        emit.push_back(1 + static_cast<int>(rng() % T));
      std::sort(emit.begin(), emit.end());
      int bl = static_cast<int>(rng() % 3), br = static_cast<int>(rng() % 3);
      AlignmentBand b = BandFromAlignment(emit, bl, br, T);
      CHECK_NOTHROW(ValidateBand(b, T, U));
      for (int u = 0; u < U; ++u) {
        // Reference emission of label u + 1 is admissible.
        CHECK(b.Contains(emit[u] - 1, u));
        CHECK(b.Contains(emit[u] - 1, u + 1));
      }
    }
  }
}
