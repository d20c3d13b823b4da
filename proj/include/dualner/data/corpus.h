// dualner/data/corpus.h

// Copyright 2026  The DualNER Authors
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

#ifndef DUALNER_DATA_CORPUS_H_
#define DUALNER_DATA_CORPUS_H_

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualner/labels/label_algebra.h"

namespace dualner {

struct Sentence {
  std::vector<std::string> tokens;
  std::string language;
  std::optional<LabelSequence> labels;

  bool operator==(const Sentence &) const = default;
};

enum class Split { kTrain, kDev, kTest };
enum class Role { kSourceLabeled, kTargetUnlabeled };

const char *SplitName(Split s);
const char *RoleName(Role r);

struct Corpus {
  std::vector<Sentence> sentences;
  Split split = Split::kTrain;
  Role role = Role::kSourceLabeled;
  /// Language given to sentences without a "# lang=" header. The writer
  /// omits the header for sentences in this language.
  std::string default_language;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::size_t num_tokens() const;
  /// True when every sentence carries labels.
  bool fully_labeled() const;
  /// Copy with all labels dropped (role becomes target-unlabeled).
  Corpus Unlabeled() const;

  bool operator==(const Corpus &) const = default;
};

/// Column format: `token<TAB>label` per line (label optional), blank line
/// between sentences, optional `# lang=XX` line opening a sentence.
/// Throws IoError if unreadable, ParseError (with line) on malformed input
/// or labels outside `tagset`.
Corpus ParseColumnText(const std::string &text, const TagSet &tagset,
                       const std::string &default_language = "");
Corpus ParseColumnFile(const std::string &path, const TagSet &tagset,
                       const std::string &default_language = "");
std::string FormatColumnText(const Corpus &corpus, const TagSet &tagset);
void WriteColumnFile(const Corpus &corpus, const TagSet &tagset, const std::string &path);

/// Start/end column format: `token<TAB>start<TAB>end` over the span alphabet.
/// Parsing pairs the endpoints with PairSpans.
Corpus ParseSpanColumnFile(const std::string &path, const TagSet &tagset,
                           const std::string &default_language = "");
void WriteSpanColumnFile(const Corpus &corpus, const TagSet &tagset, const std::string &path);

/// Concatenation of corpora (for the pooled multi-language dev set).
Corpus Concatenate(const std::vector<Corpus> &parts);

/// Token id map; id 0 is padding, id 1 is unknown.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  Vocabulary();
  /// Tokens numbered in order of first occurrence.
  static Vocabulary Build(const std::vector<const Corpus *> &corpora);
  static Vocabulary FromTokens(std::vector<std::string> tokens);

  int Id(const std::string &token) const;
  const std::string &Token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  void Add(const std::string &token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace dualner

#endif  // DUALNER_DATA_CORPUS_H_
