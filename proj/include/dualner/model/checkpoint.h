// dualner/model/checkpoint.h

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

#ifndef DUALNER_MODEL_CHECKPOINT_H_
#define DUALNER_MODEL_CHECKPOINT_H_

#include <string>

#include "dualner/model/model.h"

namespace dualner {

// Binary layout, little-endian throughout:
//   "DNER" u32 version
//   u32 num_classes, then per class: u32 length, bytes
//   u32 vocab_size d_model layers heads ffn max_len,
//   f64 dropout word_dropout
//   u32 num_tokens, then per token: u32 length, bytes
//   u32 num_tensors, then per tensor:
//     u32 name length, name, u32 rank, u32 dims[rank], f32 data[...]
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const ModelParams<float> &params);
/// Throws FormatError on bad magic, unknown version, truncation or tensors
/// that do not match the embedded config.
ModelParams<float> DeserializeCheckpoint(const std::string &bytes);

/// Throws IoError when the file cannot be written or read.
void SaveCheckpoint(const ModelParams<float> &params, const std::string &path);
ModelParams<float> LoadCheckpoint(const std::string &path);

/// Bitwise equality of config, tag set, vocabulary and every tensor value.
bool IdenticalParams(const ModelParams<float> &a, const ModelParams<float> &b);

/// FNV-1a over the raw bytes of every tensor value.
std::uint64_t ParamsDigest(const ModelParams<float> &params);

}  // namespace dualner

#endif  // DUALNER_MODEL_CHECKPOINT_H_
