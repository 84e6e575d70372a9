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

#include "geoact/runconfig.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace geoact {

void RunConfig::set(const std::string& key, std::string v) {
  values_[key] = std::move(v);
}
void RunConfig::set(const std::string& key, const char* v) {
  values_[key] = std::string(v);
}
void RunConfig::set(const std::string& key, double v) { values_[key] = v; }
void RunConfig::set(const std::string& key, int64_t v) { values_[key] = v; }
void RunConfig::set(const std::string& key, uint64_t v) {
  values_[key] = static_cast<int64_t>(v);
}
void RunConfig::set(const std::string& key, bool v) { values_[key] = v; }

std::string RunConfig::to_json() const {
  nlohmann::json j;
  for (const auto& [key, value] : values_) {
    std::visit([&](const auto& v) { j[key] = v; }, value);
  }
  return j.dump(2) + "\n";
}

uint64_t RunConfig::hash() const { return fnv1a64(to_json()); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash()));
  return buf;
}

void RunConfig::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write run config: " + path);
  out << to_json();
  if (!out) throw IoError("failed writing run config: " + path);
}

}  // namespace geoact
