// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Files a run leaves behind for plotting. summary.csv has one row per
// repetition; latency_hist.csv is only written for latency runs.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "shuffle/harness/result.h"

namespace shuffle::harness {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSummaryHeader = "kind,rep,instances,rate,bracket_lo,bracket_hi,p50,p95,p99,status";

// Empty cells for absent values; "inf" for an unbounded bracket. Status cells
// are quoted when they contain a comma or quote.
std::string summary_csv(const RunResult& result);

// Creates dir if needed. Identical results give byte-identical files.
// Throws ExportError on I/O failure.
void export_results(const RunResult& result, const std::filesystem::path& dir);

RunResult load_result(const std::filesystem::path& result_json);

}  // namespace shuffle::harness
