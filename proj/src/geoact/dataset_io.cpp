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

#include "geoact/dataset_io.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <streambuf>

#include <nlohmann/json.hpp>

namespace geoact {

namespace {

using json = nlohmann::json;

class GzStreambuf : public std::streambuf {
 public:
  explicit GzStreambuf(const std::string& path)
      : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) throw IoError("cannot open gzip file: " + path);
    setg(buf_.data(), buf_.data(), buf_.data());
  }
  ~GzStreambuf() override {
    if (file_ != nullptr) gzclose(file_);
  }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    int n = gzread(file_, buf_.data(), static_cast<unsigned>(buf_.size()));
    if (n <= 0) return traits_type::eof();
    setg(buf_.data(), buf_.data(), buf_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  std::array<char, 1 << 16> buf_;
};

class GzIstream : public std::istream {
 public:
  explicit GzIstream(const std::string& path)
      : std::istream(nullptr), buf_(path) {
    rdbuf(&buf_);
  }

 private:
  GzStreambuf buf_;
};

bool is_gzip(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (is_gzip(path)) return std::make_unique<GzIstream>(path);
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw IoError("cannot open file: " + path);
  return in;
}

std::string dataset_summary_json(const Dataset& d, uint64_t config_hash,
                                 double earth_radius_km) {
  json j;
  j["city"] = d.city;
  j["checkins"] = d.summary.checkins;
  j["venues"] = d.summary.venues;
  j["users"] = d.summary.users;
  j["config_hash"] = hash_hex(config_hash);
  j["earth_radius_km"] = earth_radius_km;
  return j.dump(2) + "\n";
}

void write_dataset(const Dataset& d, const std::string& path,
                   uint64_t config_hash, double earth_radius_km) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  json meta;
  meta["city"] = d.city;
  meta["anon_family"] = std::string(family_token(d.anon_family));
  meta["anon_resolution"] = d.anon_resolution;
  meta["earth_radius_km"] = earth_radius_km;
  meta["config_hash"] = hash_hex(config_hash);
  meta["test_fraction"] = d.test_fraction;
  meta["split_seed"] = d.split_seed;
  meta["checkins"] = d.summary.checkins;
  meta["venues"] = d.summary.venues;
  meta["users"] = d.summary.users;

  out << "dataset.v1\n" << meta.dump() << "\n";
  const bool has_split = !d.is_test.empty();
  std::string cell_prefix(family_token(d.anon_family));
  cell_prefix += ':' + std::to_string(d.anon_resolution) + ':';
  for (size_t i = 0; i < d.records.size(); ++i) {
    const CheckIn& r = d.records[i];
    out << d.users[r.user] << '\t' << d.venues[r.venue] << '\t' << cell_prefix
        << r.cell_code << '\t' << r.local_epoch << '\t'
        << activity_names()[static_cast<size_t>(r.activity)] << '\t'
        << (has_split && d.is_test[i] ? "test" : "train") << '\n';
  }
  if (!out) throw IoError("failed writing dataset: " + path);

  std::ofstream side(path + ".summary.json", std::ios::binary);
  if (!side) throw IoError("cannot write summary sidecar for: " + path);
  side << dataset_summary_json(d, config_hash, earth_radius_km);
}

Dataset read_dataset(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(*in, line) || line != "dataset.v1")
    throw ParseError("not a dataset.v1 file: " + path);
  if (!std::getline(*in, line))
    throw ParseError("dataset missing meta line: " + path);
  json meta = json::parse(line, nullptr, false);
  if (meta.is_discarded())
    throw ParseError("dataset meta line is not valid JSON: " + path);

  Dataset d;
  d.city = meta.at("city").get<std::string>();
  d.anon_family = family_from_token(meta.at("anon_family").get<std::string>());
  d.anon_resolution = meta.at("anon_resolution").get<int>();
  d.test_fraction = meta.value("test_fraction", 0.0);
  d.split_seed = meta.value("split_seed", uint64_t{0});

  std::unordered_map<std::string, uint32_t> user_idx, venue_idx;
  size_t lineno = 2;
  bool any_split = false;
  while (std::getline(*in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<std::string_view, 6> cols;
    size_t start = 0, n = 0;
    std::string_view sv = line;
    while (n < 6) {
      size_t pos = sv.find('\t', start);
      if (pos == std::string_view::npos) {
        cols[n++] = sv.substr(start);
        start = sv.size() + 1;
        break;
      }
      cols[n++] = sv.substr(start, pos - start);
      start = pos + 1;
    }
    if (n != 6 || start <= sv.size())
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": expected 6 columns");
    CheckIn r;
    auto [uit, uin] = user_idx.emplace(std::string(cols[0]),
                                       static_cast<uint32_t>(d.users.size()));
    if (uin) d.users.emplace_back(cols[0]);
    r.user = uit->second;
    auto [vit, vin] = venue_idx.emplace(std::string(cols[1]),
                                        static_cast<uint32_t>(d.venues.size()));
    if (vin) d.venues.emplace_back(cols[1]);
    r.venue = vit->second;
    CellId cell = CellId::parse(cols[2]);
    if (cell.family != d.anon_family || cell.resolution != d.anon_resolution)
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": cell does not match dataset anonymization grid");
    r.cell_code = std::move(cell.code);
    try {
      r.local_epoch = std::stoll(std::string(cols[3]));
    } catch (...) {
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": bad local_epoch");
    }
    int act = activity_index(cols[4]);
    if (act < 0)
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": unknown activity '" + std::string(cols[4]) + "'");
    r.activity = static_cast<int8_t>(act);
    if (cols[5] == "test") {
      d.is_test.push_back(1);
      any_split = true;
    } else if (cols[5] == "train") {
      d.is_test.push_back(0);
    } else {
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": bad split flag");
    }
    d.records.push_back(std::move(r));
  }
  if (!any_split && d.test_fraction == 0.0) d.is_test.clear();
  d.summary = d.recount();
  return d;
}

}  // namespace geoact
