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

#include <iosfwd>
#include <memory>
#include <string>

#include "geoact/ingest.hpp"

namespace geoact {

// Opens a plain or gzip-compressed text file (detected by magic bytes) as a
// line-oriented istream.
std::unique_ptr<std::istream> open_input(const std::string& path);

// dataset.v1: a version line, one JSON meta line, then one tab-separated
// record per line (user, venue, cell, local_epoch, activity, split).
// Records carry no raw coordinates. A Table-1-style JSON summary sidecar is
// written next to the dataset file as <path>.summary.json.
void write_dataset(const Dataset& d, const std::string& path,
                   uint64_t config_hash, double earth_radius_km);
Dataset read_dataset(const std::string& path);

std::string dataset_summary_json(const Dataset& d, uint64_t config_hash,
                                 double earth_radius_km);

}  // namespace geoact
