#pragma once

// CSV result table and JSON summary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oedsel/harness/experiment.hpp"

namespace oedsel {

inline constexpr const char* kCsvHeader =
    "trial,selector,k,design,mi_value,mi_stderr,wall_time_ms,op_mults,op_factorizations,op_model_evals";

/// Shortest round-trip form is not required; 17 significant digits always are.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_line(const ResultRow& r) {
  std::string s;
  s += std::to_string(r.trial);
  s += ',';
  s += r.selector;
  s += ',';
  s += std::to_string(r.k);
  s += ',';
  s += r.design.to_string();
  s += ',';
  s += format_double(r.mi_value);
  s += ',';
  s += format_double(r.mi_stderr);
  s += ',';
  s += format_double(r.wall_time_ms);
  s += ',';
  s += std::to_string(r.ops.mults);
  s += ',';
  s += std::to_string(r.ops.factorizations);
  s += ',';
  s += std::to_string(r.ops.model_evals);
  return s;
}

/// "results.csv" -> "results.json"; a path already ending in .json gets ".summary.json".
inline std::filesystem::path summary_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  if (p.extension() == ".json") return p.replace_extension(".summary.json");
  return p.replace_extension(".json");
}

inline nlohmann::json summary_json(const std::vector<SummaryCell>& cells,
                                   const std::vector<TrialFailure>& failures = {}) {
  nlohmann::json j;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    j["cells"].push_back({{"selector", c.selector},
                          {"k", c.k},
                          {"trials", c.count},
                          {"mean", c.mean},
                          {"stderr", c.std_error},
                          {"occupied_cells", c.occupied}});
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& f : failures) {
    j["failures"].push_back({{"trial", f.trial}, {"selector", f.selector}, {"message", f.message}});
  }
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string text = kCsvHeader;
  text += '\n';
  for (const auto& r : rows) {
    text += csv_line(r);
    text += '\n';
  }
  return text;
}

/// Writes the CSV at `path` and the summary next to it. Returns the summary path.
inline std::filesystem::path emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                                          const std::vector<TrialFailure>& failures = {}) {
  write_text(path, results_csv(rows));
  const auto json_path = summary_path(path);
  write_text(json_path, summary_json(summarize(rows), failures).dump(2) + "\n");
  return json_path;
}

}  // namespace oedsel
