#include "schjb/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace schjb {

namespace {

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) ensure_directory(parent.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  // strtod rather than stod: stod rejects subnormals that %.17g happily writes.
  char* end = nullptr;
  const double v = s.empty() ? 0.0 : std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IoError(path + ": malformed number '" + s + "'");
  return v;
}

}  // namespace

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_csv(const CsvTable& table, const std::string& path, const Provenance& prov) {
  auto out = open_out(path);
  out << "# config_hash=" << prov.config_hash << " tool_version=" << prov.tool_version << "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  close_checked(out, path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      t.header = split(line, ',');
      have_header = true;
    } else {
      t.rows.push_back(split(line, ','));
      if (t.rows.back().size() != t.header.size()) throw IoError(path + ": row width does not match the header");
    }
  }
  if (!have_header) throw IoError(path + ": missing header row");
  return t;
}

void write_value_csv(const ValueFunction& value, const Policy* policy, const std::string& path,
                     const Provenance& prov) {
  const Grid& g = *value.grid;
  if (policy) require_same_grid(*policy->grid, g);
  CsvTable t;
  for (int i = 0; i < g.dimension(); ++i) t.header.push_back("x" + std::to_string(i));
  t.header.insert(t.header.end(), {"value", "policy_index", "node_class"});
  t.rows.reserve(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    std::vector<std::string> row;
    const Vector x = g.position(n);
    for (int i = 0; i < g.dimension(); ++i) row.push_back(format_double(x[i]));
    row.push_back(format_double(value[n]));
    row.push_back(policy ? std::to_string(policy->control[n]) : "-1");
    row.push_back(to_string(g.node_class(n)));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path, prov);
}

ValueCsv read_value_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto cols = t.header.size();
  if (cols < 4 || t.header[cols - 3] != "value" || t.header[cols - 2] != "policy_index" ||
      t.header[cols - 1] != "node_class") {
    throw IoError(path + ": not a value CSV");
  }
  const std::size_t d = cols - 3;
  ValueCsv v;
  for (const auto& row : t.rows) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = to_double(row[i], path);
    v.coords.push_back(std::move(x));
    v.values.push_back(to_double(row[d], path));
    v.policy.push_back(std::stol(row[d + 1]));
    v.node_class.push_back(row[d + 2]);
  }
  return v;
}

std::string Report::render(const Provenance& prov) const {
  std::ostringstream os;
  os << "# " << title << "\n";
  os << "# config_hash=" << prov.config_hash << " tool_version=" << prov.tool_version << "\n";
  for (const auto& l : body) os << l << "\n";
  os << "[summary]\n";
  for (const auto& [k, v] : summary) os << k << " = " << v << "\n";
  os << "[/summary]\n";
  return os.str();
}

void write_report(const Report& report, const std::string& path, const Provenance& prov) {
  auto out = open_out(path);
  out << report.render(prov);
  close_checked(out, path);
}

std::vector<std::pair<std::string, std::string>> read_report_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line == "[summary]") {
      inside = true;
    } else if (line == "[/summary]") {
      inside = false;
    } else if (inside) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
  }
  return out;
}

}  // namespace schjb
