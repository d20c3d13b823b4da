// model/checkpoint.cc

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

#include "dualner/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dualner/util/error.h"

namespace dualner {

namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

class Writer {
 public:
  void U32(std::uint32_t v) { Raw(&v, 4); }
  void F64(double v) { Raw(&v, 8); }
  void Str(const std::string &s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(const void *p, std::size_t n) { out_.append(static_cast<const char *>(p), n); }
  std::string &bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string &s) : s_(s) {}
  void Raw(void *p, std::size_t n) {
    if (s_.size() - pos_ < n) throw FormatError("checkpoint truncated");
    std::memcpy(p, s_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t U32() {
    std::uint32_t v;
    Raw(&v, 4);
    return v;
  }
  double F64() {
    double v;
    Raw(&v, 8);
    return v;
  }
  std::string Str() {
    const std::uint32_t n = U32();
    if (s_.size() - pos_ < n) throw FormatError("checkpoint truncated");
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  const std::string &s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const ModelParams<float> &params) {
  Writer w;
  w.Raw("DNER", 4);
  w.U32(kCheckpointVersion);
  w.U32(params.tagset.num_classes());
  for (const auto &c : params.tagset.classes()) w.Str(c);
  const EncoderConfig &c = params.config;
  for (int v : {c.vocab_size, c.d_model, c.layers, c.heads, c.ffn, c.max_len})
    w.U32(static_cast<std::uint32_t>(v));
  w.F64(c.dropout);
  w.F64(c.word_dropout);
  w.U32(params.vocab.size());
  for (const auto &t : params.vocab.tokens()) w.Str(t);
  const auto all = params.All();
  w.U32(static_cast<std::uint32_t>(all.size()));
  for (const Parameter<float> *p : all) {
    w.Str(p->name);
    w.U32(static_cast<std::uint32_t>(p->value.rank()));
    for (int d : p->value.shape()) w.U32(static_cast<std::uint32_t>(d));
    w.Raw(p->value.data(), p->value.size() * sizeof(float));
  }
  return std::move(w.bytes());
}

ModelParams<float> DeserializeCheckpoint(const std::string &bytes) {
  Reader r(bytes);
  char magic[4];
  r.Raw(magic, 4);
  if (std::memcmp(magic, "DNER", 4) != 0) throw FormatError("bad checkpoint magic");
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t nc = r.U32();
  if (nc > 4096) throw FormatError("implausible class count");
  std::vector<std::string> classes;
  for (std::uint32_t i = 0; i < nc; ++i) classes.push_back(r.Str());
  EncoderConfig cfg;
  cfg.vocab_size = static_cast<int>(r.U32());
  cfg.d_model = static_cast<int>(r.U32());
  cfg.layers = static_cast<int>(r.U32());
  cfg.heads = static_cast<int>(r.U32());
  cfg.ffn = static_cast<int>(r.U32());
  cfg.max_len = static_cast<int>(r.U32());
  cfg.dropout = r.F64();
  cfg.word_dropout = r.F64();
  std::vector<std::string> tokens(r.U32());
  if (tokens.size() != static_cast<std::size_t>(cfg.vocab_size))
    throw FormatError("vocabulary size does not match config");
  for (auto &t : tokens) t = r.Str();

  ModelParams<float> p;
  try {
    cfg.Validate();
    // Shape template; values are overwritten below.
    p = InitModel<float>(cfg, TagSet(classes), Vocabulary::FromTokens(std::move(tokens)), 0);
  } catch (const FormatError &) {
    throw;
  } catch (const Error &e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }
  auto all = p.All();
  if (r.U32() != all.size()) throw FormatError("tensor count mismatch");
  for (Parameter<float> *param : all) {
    if (r.Str() != param->name) throw FormatError("unexpected tensor " + param->name);
    const std::uint32_t rank = r.U32();
    if (rank != static_cast<std::uint32_t>(param->value.rank()))
      throw FormatError("rank mismatch for " + param->name);
    for (int d : param->value.shape())
      if (r.U32() != static_cast<std::uint32_t>(d)) throw FormatError("shape mismatch for " + param->name);
    r.Raw(param->value.storage().data(), param->value.size() * sizeof(float));
    param->ZeroGrad();
  }
  if (!r.done()) throw FormatError("trailing bytes in checkpoint");
  return p;
}

void SaveCheckpoint(const ModelParams<float> &params, const std::string &path) {
  const std::string bytes = SerializeCheckpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

ModelParams<float> LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

bool IdenticalParams(const ModelParams<float> &a, const ModelParams<float> &b) {
  return SerializeCheckpoint(a) == SerializeCheckpoint(b);
}

std::uint64_t ParamsDigest(const ModelParams<float> &params) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const Parameter<float> *p : params.All()) {
    const auto *bytes = reinterpret_cast<const unsigned char *>(p->value.data());
    for (std::size_t i = 0; i < p->value.size() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

}  // namespace dualner
