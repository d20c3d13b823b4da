// dualner/util/key_value.h

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

#ifndef DUALNER_UTIL_KEY_VALUE_H_
#define DUALNER_UTIL_KEY_VALUE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dualner {

/// Flat `key=value` settings. Blank lines and lines starting with '#' are
/// ignored. Keys are kept sorted so serialization is deterministic.
class KeyValues {
 public:
  static KeyValues Parse(std::string_view text);
  /// Throws IoError when the file cannot be read, ParseError on bad lines.
  static KeyValues ReadFile(const std::string &path);

  void Set(const std::string &key, const std::string &value) { values_[key] = value; }
  bool Has(const std::string &key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string> &values() const { return values_; }

  /// Typed lookups; ConfigError on malformed values.
  std::string GetString(const std::string &key, const std::string &fallback) const;
  double GetDouble(const std::string &key, double fallback) const;
  long long GetInt(const std::string &key, long long fallback) const;
  std::uint64_t GetUint64(const std::string &key, std::uint64_t fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void RejectUnknown(const std::vector<std::string> &known) const;

  std::string Serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> SplitList(std::string_view text, char sep = ',');
std::string JoinList(const std::vector<std::string> &items, char sep = ',');
/// Shortest round-trippable decimal form.
std::string FormatDouble(double v);

}  // namespace dualner

#endif  // DUALNER_UTIL_KEY_VALUE_H_
