/*
 * Copyright 2026 The geoact authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "geoact/common.hpp"

namespace geoact {

// Effective run configuration, echoed verbatim into every output artifact.
// Keys are sorted, so equal configurations hash and serialize identically.
class RunConfig {
 public:
  using Value = std::variant<std::string, double, int64_t, bool>;

  void set(const std::string& key, std::string v);
  void set(const std::string& key, const char* v);
  void set(const std::string& key, double v);
  void set(const std::string& key, int64_t v);
  void set(const std::string& key, int v) { set(key, int64_t{v}); }
  void set(const std::string& key, uint64_t v);
  void set(const std::string& key, bool v);

  std::string to_json() const;
  uint64_t hash() const;          // FNV-1a of the canonical serialization
  std::string hash_hex() const;
  void write(const std::string& path) const;

 private:
  std::map<std::string, Value> values_;
};

}  // namespace geoact
