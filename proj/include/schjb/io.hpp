#pragma once

#include <string>
#include <utility>
#include <vector>

#include "schjb/config.hpp"
#include "schjb/solver.hpp"

namespace schjb {

/// Raised when an output or input file cannot be used; the message has the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Provenance written as a leading comment into every output file.
struct Provenance {
  std::string config_hash;
  std::string tool_version = kToolVersion;

  static Provenance of(const RunConfig& cfg) { return {cfg.hash_hex(), kToolVersion}; }
};

/// Plain table with string cells; numbers are formatted by the caller.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const CsvTable& table, const std::string& path, const Provenance& prov);
CsvTable read_csv(const std::string& path);

/// Columns x0..x{d-1}, value, policy_index, node_class in dense node order.
void write_value_csv(const ValueFunction& value, const Policy* policy, const std::string& path, const Provenance& prov);

struct ValueCsv {
  std::vector<std::vector<double>> coords;
  std::vector<double> values;
  std::vector<long> policy;  // -1 where the file has no policy
  std::vector<std::string> node_class;
};

ValueCsv read_value_csv(const std::string& path);

/// Structured text report: free-form body lines followed by a
/// machine-readable `[summary]` block of `key = value` pairs.
struct Report {
  std::string title;
  std::vector<std::string> body;
  std::vector<std::pair<std::string, std::string>> summary;

  void line(std::string s) { body.push_back(std::move(s)); }
  void set(std::string key, std::string value) { summary.emplace_back(std::move(key), std::move(value)); }
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  std::string render(const Provenance& prov) const;
};

void write_report(const Report& report, const std::string& path, const Provenance& prov);

/// Reads back the summary block of a report file.
std::vector<std::pair<std::string, std::string>> read_report_summary(const std::string& path);

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& dir);

}  // namespace schjb
