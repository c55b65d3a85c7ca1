// core/eval.h

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

#ifndef TLAB_CORE_EVAL_H_
#define TLAB_CORE_EVAL_H_

// Word error rate: Levenshtein alignment, corpus WER, rare/non-rare
// attribution, relative reductions and table emission.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tlab {

enum class EditOp { kMatch, kSubstitute, kDelete, kInsert };

struct AlignedPair {
  EditOp op;
  int ref_index;  // -1 for insertions
  int hyp_index;  // -1 for deletions
};

struct AlignmentOps {
  std::vector<AlignedPair> ops;
  int Count(EditOp op) const;
  int cost() const {
    return Count(EditOp::kSubstitute) + Count(EditOp::kDelete) +
           Count(EditOp::kInsert);
  }
};

// Minimal-cost alignment; at equal cost the backtrace prefers
// match > substitute > delete > insert.
AlignmentOps AlignWords(const std::vector<std::string> &ref,
                        const std::vector<std::string> &hyp);

struct WordPair {
  std::vector<std::string> ref;
  std::vector<std::string> hyp;
};

struct WerReport {
  double wer = 0.0;  // percent
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int n_ref = 0;
  // Filled by WerBreakdown; nullopt means the class had no reference words.
  std::optional<double> rare_wer;
  std::optional<double> nonrare_wer;
  int threshold = 0;
  int rare_errors = 0;
  int nonrare_errors = 0;
  int rare_ref = 0;
  int nonrare_ref = 0;

  int errors() const { return substitutions + deletions + insertions; }
};

// Micro-averaged: total errors over total reference words.
WerReport CorpusWer(const std::vector<WordPair> &pairs);

// A word is rare iff its training count is below the threshold; words
// never seen in training are rare.
class RareWordSet {
 public:
  RareWordSet(std::map<std::string, int> train_counts, int threshold);
  bool contains(const std::string &word) const;
  int threshold() const { return threshold_; }

 private:
  std::map<std::string, int> counts_;
  int threshold_;
};

RareWordSet ClassifyRare(const std::map<std::string, int> &train_word_counts,
                         int threshold);

// Substitutions and deletions count against the reference word's class;
// insertions against the preceding aligned reference word, or the following
// one at utterance start (non-rare when the reference is empty).
WerReport WerBreakdown(const std::vector<WordPair> &pairs,
                       const RareWordSet &rare);

// 100 * (baseline - treatment) / baseline.
double Werr(double baseline_wer, double treatment_wer);

// WERR as reported in tables: one decimal, truncated toward zero (the
// published tables show 42.88 as 42.8 and 6.97 as 6.9), with a ↓ marker for
// reductions and ↑ for regressions.
double TruncateTenths(double value);
std::string FormatWerr(double werr);

// Decimal rounding with ties to even, robust to binary representation
// noise (21.385 prints as 21.38).
std::string FormatFixed(double value, int decimals);

struct ReportRow {
  std::string label;
  std::vector<std::optional<double>> wers;  // one per column
};

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
  int baseline_row = 0;  // WERR reference; -1 disables the WERR column
  // Also print each cell's WERR against the baseline row's cell.
  bool cell_werr = false;
};

enum class ReportLayout { kHuman, kTsv };

// Adds an average column (mean of the language columns) and WERR of each
// row's average against the baseline row average.
std::string EmitReport(const std::vector<ReportTable> &tables,
                       ReportLayout layout);

std::optional<double> RowAverage(const ReportRow &row);

}  // namespace tlab

#endif  // TLAB_CORE_EVAL_H_
