// core/lattice.h

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

#ifndef TLAB_CORE_LATTICE_H_
#define TLAB_CORE_LATTICE_H_

// Log-semiring transducer lattice: loss, occupancy gradients and an
// enumeration oracle, optionally restricted to a per-label time band.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tlab {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Stable log(exp(a) + exp(b)).
double LogAdd(double a, double b);

// log sum_i exp(xs[i]); -inf when every element is -inf. xs must be non-empty.
double LogSumExp(std::span<const double> xs);

// Joiner scores for every (frame, label-index) cell. Cell (t, u) holds
// vocab_size + 1 raw logits; the last index is blank.
struct LogitLattice {
  int num_frames = 0;  // T
  int vocab_size = 0;  // V, non-blank
  std::vector<int> labels;  // U target labels, each in [0, V)
  std::vector<double> values;  // T * (U + 1) * (V + 1), row-major

  static LogitLattice Zeros(int num_frames, std::vector<int> labels,
                            int vocab_size);

  int num_labels() const { return static_cast<int>(labels.size()); }
  int blank() const { return vocab_size; }
  int width() const { return vocab_size + 1; }
  std::size_t Offset(int t, int u) const {
    return (static_cast<std::size_t>(t) * (labels.size() + 1) + u) * width();
  }
  std::span<double> Cell(int t, int u) {
    return {values.data() + Offset(t, u), static_cast<std::size_t>(width())};
  }
  std::span<const double> Cell(int t, int u) const {
    return {values.data() + Offset(t, u), static_cast<std::size_t>(width())};
  }

  // Throws on shape or range violations and non-finite values.
  void Validate() const;
};

// Same layout as LogitLattice::values; d loss / d logit.
struct LatticeGradient {
  int num_frames = 0;
  int num_labels = 0;
  int vocab_size = 0;
  std::vector<double> values;

  std::size_t Offset(int t, int u) const {
    return (static_cast<std::size_t>(t) * (num_labels + 1) + u) *
           (vocab_size + 1);
  }
  std::span<const double> Cell(int t, int u) const {
    return {values.data() + Offset(t, u),
            static_cast<std::size_t>(vocab_size + 1)};
  }
};

// Admissible frames (1-based, inclusive) for each lattice row u, i.e. the
// frames during which exactly u labels have been emitted. Emitting label
// u + 1 at frame t needs t inside both row u and row u + 1.
struct AlignmentBand {
  std::vector<int> left;
  std::vector<int> right;

  static AlignmentBand Full(int num_frames, int num_labels);

  // t is 0-based here.
  bool Contains(int t, int u) const {
    return t + 1 >= left[u] && t + 1 <= right[u];
  }
};

// Throws "infeasible alignment band" unless at least one complete path
// survives: sizes U + 1, 1 <= left <= right <= T, both nondecreasing,
// left[0] == 1, right[U] == T and left[u + 1] <= right[u].
void ValidateBand(const AlignmentBand &band, int num_frames, int num_labels);

struct ForwardResult {
  double loss = 0.0;  // -log P(y | x) over band-admissible alignments
  std::vector<double> log_alpha;  // T * (U + 1)
};

ForwardResult RnntForward(const LogitLattice &lattice,
                          const AlignmentBand &band);
// Unrestricted loss; same code path with the full band.
ForwardResult RnntForward(const LogitLattice &lattice);

// Analytic d loss / d logits. log_alpha must come from RnntForward on the
// same lattice and band. Cells outside the band get exactly zero.
LatticeGradient RnntGrad(const LogitLattice &lattice,
                         const AlignmentBand &band,
                         std::span<const double> log_alpha);

// Test oracle: explicit enumeration of every admissible alignment with
// probabilities computed directly (no log-semiring recursion).
// Requires T + U <= 14.
double BruteForceLoss(const LogitLattice &lattice, const AlignmentBand &band);
std::int64_t BruteForcePathCount(int num_frames, int num_labels,
                                 const AlignmentBand &band);

// Band around a reference alignment. emit_frames[i] is the 1-based frame
// at which label i + 1 is emitted; label i + 1 may move to
// [emit - b_left, emit + b_right] clipped to [1, T].
AlignmentBand BandFromAlignment(std::span<const int> emit_frames, int b_left,
                                int b_right, int num_frames);

}  // namespace tlab

#endif  // TLAB_CORE_LATTICE_H_
