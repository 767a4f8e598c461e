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

#include "shuffle/harness/export.h"

#include <fstream>
#include <sstream>

#include "shuffle/core/text.h"

namespace shuffle::harness {
namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExportError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw ExportError("failed writing " + path.string());
}

}  // namespace

std::string summary_csv(const RunResult& result) {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  const auto kind = std::string(to_string(result.kind));
  for (const auto& v : result.reps) {
    out << kind << ',' << v.rep << ',' << v.instances << ',';
    if (v.rate) out << format_double(*v.rate);
    out << ',';
    if (v.bracket) out << v.bracket->lo;
    out << ',';
    if (v.bracket) out << (v.bracket->hi ? std::to_string(*v.bracket->hi) : "inf");
    out << ',';
    if (v.latency) out << v.latency->p50.to_string() << ',' << v.latency->p95.to_string() << ',' << v.latency->p99.to_string();
    else out << ",,";
    out << ',' << csv_cell(v.status) << '\n';
  }
  return out.str();
}

void export_results(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ExportError("cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "result.json", nlohmann::json(result).dump(2) + "\n");
  write_file(dir / "summary.csv", summary_csv(result));
  if (result.histogram) {
    std::ostringstream hist;
    metrics::write_histogram_csv(hist, *result.histogram);
    write_file(dir / "latency_hist.csv", hist.str());
  }
}

RunResult load_result(const std::filesystem::path& result_json) {
  std::ifstream in(result_json, std::ios::binary);
  if (!in) throw ExportError("cannot open " + result_json.string());
  try {
    return nlohmann::json::parse(in).get<RunResult>();
  } catch (const nlohmann::json::exception& e) {
    throw ExportError(result_json.string() + ": " + e.what());
  }
}

}  // namespace shuffle::harness
