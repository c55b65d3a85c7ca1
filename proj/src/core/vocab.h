// core/vocab.h

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

#ifndef TLAB_CORE_VOCAB_H_
#define TLAB_CORE_VOCAB_H_

#include <string>
#include <vector>

namespace tlab {

// Character-level token inventory. Tokens [0, num_phones) spell letters
// 'a', 'b', ...; token num_phones is the word boundary. The transducer
// blank is not part of this inventory.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(int num_phones) : num_phones_(num_phones) {}

  int num_phones() const { return num_phones_; }
  int boundary() const { return num_phones_; }
  int size() const { return num_phones_ + 1; }

  char Letter(int token) const {
    return token == boundary() ? ' ' : static_cast<char>('a' + token);
  }

  std::string Spell(const std::vector<int> &tokens) const {
    std::string s;
    for (int t : tokens) s.push_back(Letter(t));
    return s;
  }

  // Splits on boundary tokens; empty words (repeated boundaries) dropped.
  std::vector<std::string> Words(const std::vector<int> &tokens) const {
    std::vector<std::string> words;
    std::string cur;
    for (int t : tokens) {
      if (t == boundary()) {
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(Letter(t));
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
  }

  std::vector<int> Tokens(const std::string &word) const {
    std::vector<int> out;
    for (char c : word) out.push_back(c - 'a');
    return out;
  }

 private:
  int num_phones_ = 0;
};

}  // namespace tlab

#endif  // TLAB_CORE_VOCAB_H_
