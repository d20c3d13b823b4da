// data/corpus.cc

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

#include "dualner/data/corpus.h"

#include <fstream>
#include <sstream>
#include <string_view>

#include "dualner/util/error.h"

namespace dualner {

const char *SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

const char *RoleName(Role r) {
  return r == Role::kSourceLabeled ? "source-labeled" : "target-unlabeled";
}

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto &s : sentences) n += s.tokens.size();
  return n;
}

bool Corpus::fully_labeled() const {
  for (const auto &s : sentences)
    if (!s.labels) return false;
  return true;
}

Corpus Corpus::Unlabeled() const {
  Corpus out = *this;
  out.role = Role::kTargetUnlabeled;
  for (auto &s : out.sentences) s.labels.reset();
  return out;
}

namespace {

std::string ReadAll(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteAll(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> cols;
  while (true) {
    const std::size_t t = line.find('\t');
    cols.push_back(line.substr(0, t));
    if (t == std::string_view::npos) break;
    line.remove_prefix(t + 1);
  }
  return cols;
}

constexpr std::string_view kLangPrefix = "# lang=";

// Shared reader; `columns` is 2 for BIO2 files and 3 for start/end files.
// Each token line yields its label columns as raw strings.
template <typename OnToken, typename OnClose>
void ReadColumns(const std::string &text, int columns, OnToken on_token, OnClose on_close,
                 std::string *language, const std::string &default_language) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool open = false;
  bool pending_header = false;
  *language = default_language;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pending_header) throw ParseError("language header without tokens", line_no);
      if (open) on_close();
      open = false;
      *language = default_language;
      continue;
    }
    if (!open && !pending_header && line.substr(0, kLangPrefix.size()) == kLangPrefix) {
      std::string_view lang = line.substr(kLangPrefix.size());
      if (lang.empty() || lang.find_first_of(" \t") != std::string_view::npos)
        throw ParseError("malformed language header", line_no);
      *language = std::string(lang);
      pending_header = true;
      continue;
    }
    auto cols = SplitTabs(line);
    if (cols.size() != 1 && static_cast<int>(cols.size()) != columns)
      throw ParseError("expected " + std::to_string(columns) + " tab-separated columns", line_no);
    if (cols[0].empty() || cols[0].find(' ') != std::string_view::npos)
      throw ParseError("malformed token", line_no);
    for (std::size_t c = 1; c < cols.size(); ++c)
      if (cols[c].empty()) throw ParseError("empty label column", line_no);
    on_token(cols, line_no, open);
    open = true;
    pending_header = false;
  }
  if (pending_header) throw ParseError("language header without tokens", line_no);
  if (open) on_close();
}

}  // namespace

Corpus ParseColumnText(const std::string &text, const TagSet &tagset,
                       const std::string &default_language) {
  Corpus corpus;
  corpus.default_language = default_language;
  Sentence current;
  bool labeled = false;
  std::string language;
  auto on_token = [&](const std::vector<std::string_view> &cols, std::size_t line_no, bool open) {
    const bool has_label = cols.size() == 2;
    if (!open) {
      current = Sentence{};
      current.language = language;
      labeled = has_label;
      if (labeled) current.labels.emplace();
    } else if (has_label != labeled) {
      throw ParseError("sentence mixes labeled and unlabeled tokens", line_no);
    }
    current.tokens.emplace_back(cols[0]);
    if (has_label) {
      auto l = tagset.ParseSequenceLabel(cols[1]);
      if (!l) throw ParseError("label '" + std::string(cols[1]) + "' not in tag set", line_no);
      current.labels->push_back(*l);
    }
  };
  auto on_close = [&] { corpus.sentences.push_back(std::move(current)); };
  ReadColumns(text, 2, on_token, on_close, &language, default_language);
  corpus.role = corpus.fully_labeled() && !corpus.empty() ? Role::kSourceLabeled
                                                          : Role::kTargetUnlabeled;
  if (corpus.empty()) corpus.role = Role::kSourceLabeled;
  return corpus;
}

Corpus ParseColumnFile(const std::string &path, const TagSet &tagset,
                       const std::string &default_language) {
  try {
    return ParseColumnText(ReadAll(path), tagset, default_language);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

std::string FormatColumnText(const Corpus &corpus, const TagSet &tagset) {
  std::string out;
  for (const auto &s : corpus.sentences) {
    if (s.language != corpus.default_language) out += std::string(kLangPrefix) + s.language + "\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      if (s.labels) out += "\t" + tagset.SequenceLabelName((*s.labels)[i]);
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

void WriteColumnFile(const Corpus &corpus, const TagSet &tagset, const std::string &path) {
  WriteAll(path, FormatColumnText(corpus, tagset));
}

Corpus ParseSpanColumnFile(const std::string &path, const TagSet &tagset,
                           const std::string &default_language) {
  Corpus corpus;
  corpus.default_language = default_language;
  Sentence current;
  std::vector<int> starts, ends;
  std::string language;
  auto on_token = [&](const std::vector<std::string_view> &cols, std::size_t line_no, bool open) {
    if (cols.size() != 3) throw ParseError("expected token, start and end columns", line_no);
    if (!open) {
      current = Sentence{};
      current.language = language;
      starts.clear();
      ends.clear();
    }
    current.tokens.emplace_back(cols[0]);
    auto s = tagset.ParseSpanLabel(cols[1]);
    auto e = tagset.ParseSpanLabel(cols[2]);
    if (!s || !e) throw ParseError("span label not in tag set", line_no);
    starts.push_back(*s);
    ends.push_back(*e);
  };
  auto on_close = [&] {
    current.labels = Bio2FromSpans(PairSpans(starts, ends), static_cast<int>(starts.size()));
    corpus.sentences.push_back(std::move(current));
  };
  try {
    ReadColumns(ReadAll(path), 3, on_token, on_close, &language, default_language);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
  return corpus;
}

void WriteSpanColumnFile(const Corpus &corpus, const TagSet &tagset, const std::string &path) {
  std::string out;
  for (const auto &s : corpus.sentences) {
    if (!s.labels) throw ContractError("span column output needs labeled sentences");
    const SpanLabelPair pair = ExtractSpanLabels(*s.labels, tagset);
    if (s.language != corpus.default_language) out += std::string(kLangPrefix) + s.language + "\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i] + "\t" + tagset.SpanLabelName(pair.start[i]) + "\t" +
             tagset.SpanLabelName(pair.end[i]) + "\n";
    }
    out += "\n";
  }
  WriteAll(path, out);
}

Corpus Concatenate(const std::vector<Corpus> &parts) {
  Corpus out;
  if (!parts.empty()) {
    out.split = parts.front().split;
    out.role = parts.front().role;
    out.default_language = parts.front().default_language;
  }
  for (const auto &p : parts) {
    for (auto s : p.sentences) {
      if (s.language.empty()) s.language = p.default_language;
      out.sentences.push_back(std::move(s));
    }
  }
  return out;
}

Vocabulary::Vocabulary() {
  Add("<pad>");
  Add("<unk>");
}

void Vocabulary::Add(const std::string &token) {
  if (ids_.count(token)) return;
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocabulary Vocabulary::Build(const std::vector<const Corpus *> &corpora) {
  Vocabulary v;
  for (const Corpus *c : corpora)
    for (const auto &s : c->sentences)
      for (const auto &t : s.tokens) v.Add(t);
  return v;
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>")
    throw FormatError("vocabulary must start with <pad> and <unk>");
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.ids_.count(tokens[i])) throw FormatError("duplicate vocabulary token " + tokens[i]);
    v.Add(tokens[i]);
  }
  return v;
}

int Vocabulary::Id(const std::string &token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknown : it->second;
}

}  // namespace dualner
