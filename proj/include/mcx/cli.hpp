#pragma once

// Batch front end: JSON configuration with environment overrides, analysis
// dispatch, and byte-stable reports.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcx/checks.hpp"
#include "mcx/errors.hpp"

namespace mcx {

using Json = nlohmann::ordered_json;

// Schema violation; `path` is the JSON pointer of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error("config error at " + (path.empty() ? std::string("/") : path) + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Analysis { curvature, reach, barrier, verify, subharmonicity, metric, omega_d, convex_classify };

const char* to_string(Analysis a) noexcept;
// Throws ConfigError for unknown names.
Analysis parse_analysis(const std::string& name);
std::vector<std::string> analysis_names();

enum class ReportFormat { json_lines, csv_summary };

struct Report {
  Analysis analysis = Analysis::curvature;
  std::uint64_t seed = 1;
  Json config;                          // effective configuration, without "workers"
  std::vector<CheckRecord> records;
  std::string error;                    // message of a pipeline failure, if any
  bool pass() const { return all_pass(records); }
};

// Parses a JSON document; ConfigError on syntax errors.
Json parse_config(const std::string& text);

// Applies MCX_<KEY>[__<KEY>...]=VALUE entries: keys are lowercased, "__"
// separates nesting levels, VALUE is parsed as JSON and kept as a string
// otherwise. Entries without the prefix are ignored.
void apply_env_overrides(Json& config, const std::vector<std::string>& environment);

// Runs one analysis. Schema violations throw ConfigError; failures of the
// pipeline itself become a failed "precondition" or "pipeline" record.
Report run_analysis(Analysis analysis, const Json& config, int workers = 1);

// JSON lines: {"header": ...}, one line per record with keys name, location,
// value, threshold, pass, then {"summary": ...}. Floats use 17 significant
// digits; non-finite values are written as the strings "inf", "-inf", "nan".
std::string emit(const Report& report, ReportFormat format);

// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& bytes);

// Full command line: mcx <analysis> --config PATH [--seed N] [--out PATH]
// [--format json-lines|csv-summary] [--workers N]. Returns the exit code:
// 0 all checks pass, 1 some check or the pipeline failed, 2 usage or schema error.
int cli_main(int argc, const char* const* argv, const std::vector<std::string>& environment);

}  // namespace mcx
