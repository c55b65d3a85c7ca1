// core/eval.cc

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

#include "core/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.h"

namespace tlab {

int AlignmentOps::Count(EditOp op) const {
  return static_cast<int>(std::count_if(
      ops.begin(), ops.end(), [op](const AlignedPair &p) { return p.op == op; }));
}

AlignmentOps AlignWords(const std::vector<std::string> &ref,
                        const std::vector<std::string> &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<int> d((n + 1) * w);
  auto at = [&d, w](std::size_t i, std::size_t j) -> int & {
    return d[i * w + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                           at(i - 1, j) + 1, at(i, j - 1) + 1});

  AlignmentOps out;
  out.ops.reserve(n + m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      out.ops.push_back({EditOp::kMatch, int(i - 1), int(j - 1)});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      out.ops.push_back({EditOp::kSubstitute, int(i - 1), int(j - 1)});
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      out.ops.push_back({EditOp::kDelete, int(i - 1), -1});
      --i;
    } else {
      out.ops.push_back({EditOp::kInsert, -1, int(j - 1)});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

namespace {

void Accumulate(const AlignmentOps &a, WerReport *r) {
  r->substitutions += a.Count(EditOp::kSubstitute);
  r->deletions += a.Count(EditOp::kDelete);
  r->insertions += a.Count(EditOp::kInsert);
}

}  // namespace

WerReport CorpusWer(const std::vector<WordPair> &pairs) {
  WerReport r;
  for (const auto &p : pairs) {
    Accumulate(AlignWords(p.ref, p.hyp), &r);
    r.n_ref += static_cast<int>(p.ref.size());
  }
  if (r.n_ref == 0) ThrowInvalid("corpus WER: zero reference words");
  r.wer = 100.0 * r.errors() / r.n_ref;
  return r;
}

RareWordSet::RareWordSet(std::map<std::string, int> train_counts,
                         int threshold)
    : counts_(std::move(train_counts)), threshold_(threshold) {
  if (threshold < 1) ThrowInvalid("rare threshold must be >= 1");
}

bool RareWordSet::contains(const std::string &word) const {
  auto it = counts_.find(word);
  return it == counts_.end() || it->second < threshold_;
}

RareWordSet ClassifyRare(const std::map<std::string, int> &train_word_counts,
                         int threshold) {
  return RareWordSet(train_word_counts, threshold);
}

WerReport WerBreakdown(const std::vector<WordPair> &pairs,
                       const RareWordSet &rare) {
  WerReport r = CorpusWer(pairs);
  r.threshold = rare.threshold();
  for (const auto &p : pairs) {
    std::vector<bool> is_rare;
    for (const auto &w : p.ref) {
      is_rare.push_back(rare.contains(w));
      (is_rare.back() ? r.rare_ref : r.nonrare_ref) += 1;
    }
    AlignmentOps a = AlignWords(p.ref, p.hyp);
    int last_ref = -1;
    for (std::size_t k = 0; k < a.ops.size(); ++k) {
      const AlignedPair &op = a.ops[k];
      if (op.ref_index >= 0) last_ref = op.ref_index;
      if (op.op == EditOp::kMatch) continue;
      int owner = op.ref_index;
      if (op.op == EditOp::kInsert) {
        owner = last_ref;
        if (owner < 0 && !p.ref.empty()) {
          for (std::size_t q = k + 1; q < a.ops.size(); ++q)
            if (a.ops[q].ref_index >= 0) {
              owner = a.ops[q].ref_index;
              break;
            }
        }
      }
      bool rare_owner = owner >= 0 && is_rare[owner];
      (rare_owner ? r.rare_errors : r.nonrare_errors) += 1;
    }
  }
  if (r.rare_ref > 0) r.rare_wer = 100.0 * r.rare_errors / r.rare_ref;
  if (r.nonrare_ref > 0)
    r.nonrare_wer = 100.0 * r.nonrare_errors / r.nonrare_ref;
  return r;
}

double Werr(double baseline_wer, double treatment_wer) {
  if (baseline_wer <= 0.0) ThrowInvalid("WERR: baseline WER must be > 0");
  return 100.0 * (baseline_wer - treatment_wer) / baseline_wer;
}

std::string FormatFixed(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  double scaled = value * scale;
  double floor_v = std::floor(scaled);
  double frac = scaled - floor_v;
  double rounded;
  if (std::fabs(frac - 0.5) < 1e-7) {
    rounded = std::fmod(floor_v, 2.0) == 0.0 ? floor_v : floor_v + 1.0;
  } else {
    rounded = std::round(scaled);
  }
  if (rounded == 0.0) rounded = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded / scale);
  return buf;
}

double TruncateTenths(double value) {
  // The epsilon absorbs binary noise such as 36.2 stored as 36.19999...
  double t = std::floor(std::fabs(value) * 10.0 + 1e-7) / 10.0;
  return value < 0.0 ? -t : t;
}

std::string FormatWerr(double werr) {
  double t = TruncateTenths(werr);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", std::fabs(t));
  return std::string(buf) + "%" + (werr >= 0.0 ? "↓" : "↑");
}

std::optional<double> RowAverage(const ReportRow &row) {
  if (row.wers.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto &w : row.wers) {
    if (!w) return std::nullopt;
    sum += *w;
  }
  return sum / static_cast<double>(row.wers.size());
}

namespace {

std::string Cell(const std::optional<double> &v) {
  return v ? FormatFixed(*v, 2) : "n/a";
}

std::string WerrCell(const std::optional<double> &base,
                     const std::optional<double> &value) {
  if (!base || !value || *base <= 0.0) return "n/a";
  return FormatWerr(Werr(*base, *value));
}

}  // namespace

std::string EmitReport(const std::vector<ReportTable> &tables,
                       ReportLayout layout) {
  std::ostringstream os;
  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    const ReportTable &tab = tables[ti];
    std::vector<std::string> header{"Model"};
    for (const auto &c : tab.columns) header.push_back(c);
    header.push_back("Avg");
    if (tab.baseline_row >= 0) header.push_back("WERR");

    std::vector<std::vector<std::string>> body;
    std::optional<double> base;
    if (tab.baseline_row >= 0 &&
        tab.baseline_row < static_cast<int>(tab.rows.size()))
      base = RowAverage(tab.rows[tab.baseline_row]);
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      const ReportRow &row = tab.rows[r];
      std::vector<std::string> line{row.label};
      for (std::size_t c = 0; c < row.wers.size(); ++c) {
        std::string cell = Cell(row.wers[c]);
        bool is_base = static_cast<int>(r) == tab.baseline_row;
        if (tab.cell_werr && !is_base && tab.baseline_row >= 0 &&
            tab.baseline_row < static_cast<int>(tab.rows.size()) &&
            c < tab.rows[tab.baseline_row].wers.size())
          cell += " (" + WerrCell(tab.rows[tab.baseline_row].wers[c],
                                  row.wers[c]) + ")";
        line.push_back(std::move(cell));
      }
      auto avg = RowAverage(row);
      line.push_back(Cell(avg));
      if (tab.baseline_row >= 0)
        line.push_back(static_cast<int>(r) == tab.baseline_row
                           ? "-"
                           : WerrCell(base, avg));
      body.push_back(std::move(line));
    }

    if (layout == ReportLayout::kTsv) {
      os << "# " << tab.title << "\n";
      auto emit = [&os](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
          os << (i ? "\t" : "") << cells[i];
        os << "\n";
      };
      emit(header);
      for (const auto &line : body) emit(line);
    } else {
      // Display width: count code points so the arrows line up.
      auto width = [](const std::string &s) {
        std::size_t n = 0;
        for (unsigned char c : s) n += (c & 0xC0) != 0x80;
        return n;
      };
      std::vector<std::size_t> widths(header.size(), 0);
      auto grow = [&](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
          widths[i] = std::max(widths[i], width(cells[i]));
      };
      grow(header);
      for (const auto &line : body) grow(line);
      auto emit = [&](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          os << (i ? " | " : "") << cells[i];
          if (i + 1 < cells.size())
            os << std::string(widths[i] - width(cells[i]), ' ');
        }
        os << "\n";
      };
      os << tab.title << "\n";
      emit(header);
      std::size_t total = 0;
      for (auto w : widths) total += w;
      os << std::string(total + 3 * (widths.size() - 1), '-') << "\n";
      for (const auto &line : body) emit(line);
    }
    if (ti + 1 < tables.size()) os << "\n";
  }
  return os.str();
}

}  // namespace tlab
