// core/lattice.cc

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

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.h"

namespace tlab {

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kLogZero) return kLogZero;
  return a + std::log1p(std::exp(b - a));
}

double LogSumExp(std::span<const double> xs) {
  if (xs.empty()) ThrowInvalid("LogSumExp: empty input");
  double max_val = *std::max_element(xs.begin(), xs.end());
  if (max_val == kLogZero) return kLogZero;
  if (std::isinf(max_val)) return max_val;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max_val);
  return max_val + std::log(sum);
}

LogitLattice LogitLattice::Zeros(int num_frames, std::vector<int> labels,
                                 int vocab_size) {
  LogitLattice lat;
  lat.num_frames = num_frames;
  lat.vocab_size = vocab_size;
  lat.labels = std::move(labels);
  lat.values.assign(static_cast<std::size_t>(num_frames) *
                        (lat.labels.size() + 1) * (vocab_size + 1),
                    0.0);
  return lat;
}

void LogitLattice::Validate() const {
  if (num_frames < 1) ThrowInvalid("lattice: need at least one frame");
  if (vocab_size < 1) ThrowInvalid("lattice: vocab_size must be >= 1");
  if (values.size() != static_cast<std::size_t>(num_frames) *
                           (labels.size() + 1) * (vocab_size + 1))
    ThrowInvalid("lattice: value count does not match T x (U+1) x (V+1)");
  for (int y : labels)
    if (y < 0 || y >= vocab_size)
      ThrowInvalid("lattice: label " + std::to_string(y) + " out of range");
  for (double v : values)
    if (!std::isfinite(v)) ThrowInvalid("lattice: non-finite logit");
}

AlignmentBand AlignmentBand::Full(int num_frames, int num_labels) {
  AlignmentBand band;
  band.left.assign(num_labels + 1, 1);
  band.right.assign(num_labels + 1, num_frames);
  return band;
}

void ValidateBand(const AlignmentBand &band, int num_frames, int num_labels) {
  auto fail = [] { ThrowInvalid("infeasible alignment band"); };
  const std::size_t n = static_cast<std::size_t>(num_labels) + 1;
  if (band.left.size() != n || band.right.size() != n) fail();
  for (std::size_t u = 0; u < n; ++u) {
    if (band.left[u] < 1 || band.left[u] > band.right[u] ||
        band.right[u] > num_frames)
      fail();
    if (u + 1 < n) {
      if (band.left[u + 1] < band.left[u] || band.right[u + 1] < band.right[u])
        fail();
      if (band.left[u + 1] > band.right[u]) fail();
    }
  }
  if (band.left.front() != 1 || band.right.back() != num_frames) fail();
}

namespace {

// Log-softmax of the two transitions leaving each in-band cell.
struct TransitionScores {
  std::vector<double> blank;  // T * (U + 1)
  std::vector<double> label;  // T * (U + 1); -inf on the last row
};

TransitionScores ComputeTransitions(const LogitLattice &lat,
                                    const AlignmentBand &band) {
  const int T = lat.num_frames, U = lat.num_labels();
  TransitionScores s;
  s.blank.assign(static_cast<std::size_t>(T) * (U + 1), kLogZero);
  s.label.assign(static_cast<std::size_t>(T) * (U + 1), kLogZero);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!band.Contains(t, u)) continue;
      auto cell = lat.Cell(t, u);
      double norm = LogSumExp(cell);
      std::size_t i = static_cast<std::size_t>(t) * (U + 1) + u;
      s.blank[i] = cell[lat.blank()] - norm;
      if (u < U) s.label[i] = cell[lat.labels[u]] - norm;
    }
  }
  return s;
}

}  // namespace

ForwardResult RnntForward(const LogitLattice &lattice,
                          const AlignmentBand &band) {
  lattice.Validate();
  const int T = lattice.num_frames, U = lattice.num_labels();
  ValidateBand(band, T, U);
  TransitionScores s = ComputeTransitions(lattice, band);
  auto idx = [U](int t, int u) {
    return static_cast<std::size_t>(t) * (U + 1) + u;
  };

  ForwardResult out;
  out.log_alpha.assign(static_cast<std::size_t>(T) * (U + 1), kLogZero);
  auto &alpha = out.log_alpha;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!band.Contains(t, u)) continue;
      if (t == 0 && u == 0) {
        alpha[0] = 0.0;
        continue;
      }
      double no_emit = kLogZero, emit = kLogZero;
      if (t > 0 && band.Contains(t - 1, u))
        no_emit = alpha[idx(t - 1, u)] + s.blank[idx(t - 1, u)];
      if (u > 0 && band.Contains(t, u - 1))
        emit = alpha[idx(t, u - 1)] + s.label[idx(t, u - 1)];
      alpha[idx(t, u)] = LogAdd(no_emit, emit);
    }
  }
  double log_like = alpha[idx(T - 1, U)] + s.blank[idx(T - 1, U)];
  out.loss = -log_like;
  return out;
}

ForwardResult RnntForward(const LogitLattice &lattice) {
  return RnntForward(lattice,
                     AlignmentBand::Full(lattice.num_frames,
                                         lattice.num_labels()));
}

LatticeGradient RnntGrad(const LogitLattice &lattice,
                         const AlignmentBand &band,
                         std::span<const double> log_alpha) {
  lattice.Validate();
  const int T = lattice.num_frames, U = lattice.num_labels();
  ValidateBand(band, T, U);
  if (log_alpha.size() != static_cast<std::size_t>(T) * (U + 1))
    ThrowInvalid("RnntGrad: alpha shape does not match lattice");
  TransitionScores s = ComputeTransitions(lattice, band);
  auto idx = [U](int t, int u) {
    return static_cast<std::size_t>(t) * (U + 1) + u;
  };

  std::vector<double> beta(static_cast<std::size_t>(T) * (U + 1), kLogZero);
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (!band.Contains(t, u)) continue;
      if (t == T - 1 && u == U) {
        beta[idx(t, u)] = s.blank[idx(t, u)];
        continue;
      }
      double no_emit = kLogZero, emit = kLogZero;
      if (t + 1 < T && band.Contains(t + 1, u))
        no_emit = beta[idx(t + 1, u)] + s.blank[idx(t, u)];
      if (u < U && band.Contains(t, u + 1))
        emit = beta[idx(t, u + 1)] + s.label[idx(t, u)];
      beta[idx(t, u)] = LogAdd(no_emit, emit);
    }
  }
  const double log_like = log_alpha[idx(T - 1, U)] + s.blank[idx(T - 1, U)];

  LatticeGradient grad;
  grad.num_frames = T;
  grad.num_labels = U;
  grad.vocab_size = lattice.vocab_size;
  grad.values.assign(lattice.values.size(), 0.0);
  const int width = lattice.width();
  std::vector<double> prob(width);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (!band.Contains(t, u)) continue;
      const double a = log_alpha[idx(t, u)];
      if (a == kLogZero) continue;
      double next_blank = kLogZero;
      if (t == T - 1 && u == U)
        next_blank = 0.0;
      else if (t + 1 < T && band.Contains(t + 1, u))
        next_blank = beta[idx(t + 1, u)];
      double next_label = kLogZero;
      if (u < U && band.Contains(t, u + 1)) next_label = beta[idx(t, u + 1)];

      double post_blank =
          std::exp(a + s.blank[idx(t, u)] + next_blank - log_like);
      double post_label =
          u < U ? std::exp(a + s.label[idx(t, u)] + next_label - log_like)
                : 0.0;
      double occupancy = post_blank + post_label;
      if (occupancy == 0.0) continue;

      auto cell = lattice.Cell(t, u);
      double norm = LogSumExp(cell);
      double *g = grad.values.data() + lattice.Offset(t, u);
      for (int k = 0; k < width; ++k) g[k] = std::exp(cell[k] - norm) * occupancy;
      g[lattice.blank()] -= post_blank;
      if (u < U) g[lattice.labels[u]] -= post_label;
    }
  }
  return grad;
}

namespace {

struct Enumerator {
  const LogitLattice &lat;
  const AlignmentBand &band;
  std::vector<long double> probs;  // per-cell softmax, full lattice
  long double total = 0.0L;
  std::int64_t paths = 0;
  bool score = true;

  long double Prob(int t, int u, int k) const {
    return probs[lat.Offset(t, u) + k];
  }

  void Walk(int t, int u, long double p) {
    const int T = lat.num_frames, U = lat.num_labels();
    // Blank: consume frame t.
    if (t == T - 1 && u == U) {
      ++paths;
      if (score) total += p * Prob(t, u, lat.blank());
    } else if (t + 1 < T && band.Contains(t + 1, u)) {
      Walk(t + 1, u, score ? p * Prob(t, u, lat.blank()) : p);
    }
    // Label: stay on frame t.
    if (u < U && band.Contains(t, u + 1))
      Walk(t, u + 1, score ? p * Prob(t, u, lat.labels[u]) : p);
  }
};

}  // namespace

double BruteForceLoss(const LogitLattice &lattice, const AlignmentBand &band) {
  lattice.Validate();
  const int T = lattice.num_frames, U = lattice.num_labels();
  if (T + U > 14) ThrowInvalid("BruteForceLoss: T + U exceeds 14");
  ValidateBand(band, T, U);
  Enumerator e{lattice, band, {}, 0.0L, 0, true};
  e.probs.resize(lattice.values.size());
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      auto cell = lattice.Cell(t, u);
      long double z = 0.0L;
      for (double v : cell) z += std::exp(static_cast<long double>(v));
      for (int k = 0; k < lattice.width(); ++k)
        e.probs[lattice.Offset(t, u) + k] =
            std::exp(static_cast<long double>(cell[k])) / z;
    }
  }
  e.Walk(0, 0, 1.0L);
  return static_cast<double>(-std::log(e.total));
}

std::int64_t BruteForcePathCount(int num_frames, int num_labels,
                                 const AlignmentBand &band) {
  if (num_frames + num_labels > 14)
    ThrowInvalid("BruteForcePathCount: T + U exceeds 14");
  ValidateBand(band, num_frames, num_labels);
  LogitLattice lat =
      LogitLattice::Zeros(num_frames, std::vector<int>(num_labels, 0), 1);
  Enumerator e{lat, band, {}, 0.0L, 0, false};
  e.Walk(0, 0, 1.0L);
  return e.paths;
}

AlignmentBand BandFromAlignment(std::span<const int> emit_frames, int b_left,
                                int b_right, int num_frames) {
  if (num_frames < 1) ThrowInvalid("BandFromAlignment: T must be >= 1");
  if (b_left < 0 || b_right < 0)
    ThrowInvalid("BandFromAlignment: slack must be non-negative");
  for (std::size_t i = 0; i < emit_frames.size(); ++i) {
    if (emit_frames[i] < 1 || emit_frames[i] > num_frames)
      ThrowInvalid("BandFromAlignment: emit frame outside [1, T]");
    if (i > 0 && emit_frames[i] < emit_frames[i - 1])
      ThrowInvalid("BandFromAlignment: non-monotonic emit_frames");
  }
  const int U = static_cast<int>(emit_frames.size());
  AlignmentBand band;
  band.left.assign(U + 1, 1);
  band.right.assign(U + 1, num_frames);
  for (int u = 1; u <= U; ++u)
    band.left[u] = std::max(1, emit_frames[u - 1] - b_left);
  for (int u = 0; u < U; ++u)
    band.right[u] = std::min(num_frames, emit_frames[u] + b_right);

  // Minimal widening so every row is non-empty, monotone and overlaps the next.
  for (int u = 1; u <= U; ++u)
    band.left[u] = std::max(band.left[u], band.left[u - 1]);
  for (int u = U - 1; u >= 0; --u) {
    band.right[u] = std::max(band.right[u], band.left[u + 1]);
    band.right[u] = std::max(band.right[u], band.left[u]);
  }
  for (int u = 1; u <= U; ++u)
    band.right[u] = std::max(band.right[u], band.right[u - 1]);
  return band;
}

}  // namespace tlab
