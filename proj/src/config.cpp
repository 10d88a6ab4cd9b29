#include "schjb/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace schjb {

namespace {

const std::vector<std::string> kSections{"problem", "domain", "grid", "solver", "sim", "verify", "output"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

std::optional<double> parse_number(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Throws std::invalid_argument with a short reason; callers add the location.
ParamValue parse_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::invalid_argument("missing value");
  if (v.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != '"'; ++i) {
      if (v[i] == '\\' && i + 1 < v.size()) ++i;
      out += v[i];
    }
    if (i >= v.size()) throw std::invalid_argument("unterminated string");
    if (i + 1 != v.size()) throw std::invalid_argument("text after closing quote");
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') throw std::invalid_argument("list must close on the same line");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    std::vector<std::string> items;
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].empty() && i + 1 == items.size() && i > 0) break;  // trailing comma
      const auto d = parse_number(items[i]);
      if (!d) throw std::invalid_argument("lists may only hold numbers");
      out.push_back(*d);
    }
    return out;
  }
  if (const auto d = parse_number(v)) return *d;
  throw std::invalid_argument("cannot parse value '" + v + "'");
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

ParamMap values_of(const ConfigSection& section, const std::set<std::string>& skip = {}) {
  ParamMap out;
  for (const auto& [k, e] : section) {
    if (!skip.count(k)) out.emplace(k, e.value);
  }
  return out;
}

std::string render(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return format_double(*d);
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const std::string* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  std::string out = "[";
  const auto& l = std::get<std::vector<double>>(v);
  for (std::size_t i = 0; i < l.size(); ++i) out += (i ? ", " : "") + format_double(l[i]);
  return out + "]";
}

std::string render_list(const std::vector<double>& l) { return render(ParamValue(l)); }

std::uint64_t parse_seed(const ConfigEntry& e) {
  std::string lit = trim(e.literal);
  if (!lit.empty() && lit.front() == '"') lit = std::get<std::string>(e.value);
  if (lit.empty() || lit.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("sim.seed must be a nonnegative integer");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(lit.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError("sim.seed does not fit in 64 bits");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ConfigTable parse_config_table(const std::string& text, const std::string& origin) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail("malformed section name");
      if (table.count(section)) fail("duplicate section [" + section + "]");
      table[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail("malformed key '" + key + "'");
    if (section.empty()) fail("key '" + key + "' appears before any [section]");
    auto& sec = table[section];
    if (sec.count(key)) fail("duplicate key \"" + section + "." + key + "\"");
    try {
      sec[key] = ConfigEntry{parse_value(s.substr(eq + 1)), trim(s.substr(eq + 1))};
    } catch (const std::invalid_argument& e) {
      fail(section + "." + key + ": " + e.what());
    }
  }
  return table;
}

void apply_override(ConfigTable& table, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string raw = trim(assignment.substr(eq + 1));
  if (!valid_key(section) || !valid_key(key)) throw ConfigError("override '" + assignment + "' has a malformed key");
  ParamValue value;
  try {
    value = parse_value(raw);
  } catch (const std::invalid_argument&) {
    if (raw.empty()) throw ConfigError("override '" + assignment + "' has no value");
    value = raw;  // bare word
  }
  table[section][key] = ConfigEntry{value, raw};
}

RunConfig build_config(const ConfigTable& table) {
  for (const auto& [name, sec] : table) {
    if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  static const ConfigSection kEmpty;
  auto section = [&](const std::string& name) -> const ConfigSection& {
    auto it = table.find(name);
    return it == table.end() ? kEmpty : it->second;
  };

  RunConfig cfg;

  // problem + domain
  const auto& prob = section("problem");
  auto name_it = prob.find("name");
  if (name_it == prob.end()) throw ConfigError("problem.name is required");
  if (const auto* s = std::get_if<std::string>(&name_it->second.value)) {
    cfg.problem_name = *s;
  } else {
    throw ConfigError("problem.name must be a string");
  }
  cfg.problem_params = values_of(prob, {"name"});
  if (table.count("domain")) {
    const auto& dom = section("domain");
    auto kind = dom.find("kind");
    if (kind == dom.end()) throw ConfigError("domain.kind is required");
    const auto* s = std::get_if<std::string>(&kind->second.value);
    if (!s) throw ConfigError("domain.kind must be a string");
    cfg.domain = DomainSpec{*s, values_of(dom, {"kind"})};
  }
  const ProblemInstance inst = [&] {
    try {
      return make_problem(cfg.problem_name, cfg.problem_params, cfg.domain);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
  }();
  const int d = inst.problem.dimension;

  {
    const ParamMap m = values_of(section("grid"));
    ParamReader g(m, "grid");
    cfg.h = g.positive("h", inst.preferred_h.value_or(0.05));
    if (g.has("band")) cfg.band = g.positive("band", cfg.h);
    g.finish();
  }
  {
    const ParamMap m = values_of(section("solver"));
    ParamReader s(m, "solver");
    cfg.method = s.text("method", cfg.method);
    if (cfg.method != "policy" && cfg.method != "value") {
      throw ConfigError("solver.method must be \"policy\" or \"value\"");
    }
    cfg.tol = s.positive("tol", cfg.tol);
    cfg.max_iter = static_cast<std::size_t>(s.integer("max_iter", static_cast<long long>(cfg.max_iter), 1'000'000'000));
    cfg.tol_sigma = s.nonnegative("tol_sigma", cfg.tol_sigma);
    s.finish();
  }
  {
    const auto& raw = section("sim");
    const ParamMap m = values_of(raw, {"seed"});
    ParamReader s(m, "sim");
    cfg.sim.dt = s.positive("dt", cfg.sim.dt);
    cfg.sim.horizon = s.positive("horizon", cfg.sim.horizon);
    cfg.sim.n_paths = static_cast<std::size_t>(s.integer("n_paths", static_cast<long long>(cfg.sim.n_paths), 100'000'000));
    if (auto it = raw.find("seed"); it != raw.end()) cfg.sim.seed = parse_seed(it->second);
    const std::string proj = s.text("projection", "project");
    if (proj == "project") {
      cfg.sim.projection = ProjectionMode::kProject;
    } else if (proj == "resample") {
      cfg.sim.projection = ProjectionMode::kResample;
    } else {
      throw ConfigError("sim.projection must be \"project\" or \"resample\"");
    }
    if (s.has("x0")) {
      const auto x = s.list("x0", {});
      if (static_cast<int>(x.size()) != d) throw ConfigError("sim.x0 must have " + std::to_string(d) + " entries");
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = x[i];
      if (!inst.domain.in_closure(v)) throw ConfigError("sim.x0 must lie in the domain");
      cfg.x0 = v;
    }
    cfg.checkpoints = s.list("checkpoints", cfg.checkpoints);
    if (cfg.checkpoints.empty()) throw ConfigError("sim.checkpoints must not be empty");
    for (double t : cfg.checkpoints) {
      if (!(t >= 0.0)) throw ConfigError("sim.checkpoints must be nonnegative");
      if (t > cfg.sim.horizon) throw ConfigError("sim.checkpoints must not exceed sim.horizon");
    }
    cfg.z = s.positive("z", cfg.z);
    cfg.per_path = s.flag("per_path", cfg.per_path);
    cfg.calibrate = s.flag("calibrate", cfg.calibrate);
    s.finish();
  }
  {
    const ParamMap m = values_of(section("verify"));
    ParamReader v(m, "verify");
    if (v.has("tol")) cfg.verify_tol = v.positive("tol", 0.0);
    cfg.pass_fraction = v.positive("pass_fraction", cfg.pass_fraction);
    if (cfg.pass_fraction > 1.0) throw ConfigError("verify.pass_fraction must lie in (0, 1]");
    cfg.boundary_samples =
        static_cast<std::size_t>(v.integer("boundary_samples", static_cast<long long>(cfg.boundary_samples), 10'000'000));
    cfg.delta_strict = v.positive("delta_strict", cfg.delta_strict);
    cfg.tol_b = v.nonnegative("tol_b", cfg.tol_b);
    cfg.sandwich_tol = v.nonnegative("sandwich_tol", cfg.sandwich_tol);
    v.finish();
  }
  {
    const ParamMap m = values_of(section("output"));
    ParamReader o(m, "output");
    const char* env = std::getenv(kOutDirEnv);
    cfg.out_dir = o.text("directory", env && *env ? env : "schjb-out");
    if (cfg.out_dir.empty()) throw ConfigError("output.directory must not be empty");
    o.finish();
  }

  // Effective configuration (defaults filled in); [output] does not affect
  // results and is left out so that relocating outputs keeps the hash.
  std::ostringstream c;
  c << "problem.name = \"" << cfg.problem_name << "\"\n";
  for (const auto& [k, v] : cfg.problem_params) c << "problem." << k << " = " << render(v) << "\n";
  if (cfg.domain) {
    c << "domain.kind = \"" << cfg.domain->kind << "\"\n";
    for (const auto& [k, v] : cfg.domain->params) c << "domain." << k << " = " << render(v) << "\n";
  }
  c << "grid.h = " << format_double(cfg.h) << "\n";
  if (cfg.band) c << "grid.band = " << format_double(*cfg.band) << "\n";
  c << "sim.calibrate = " << (cfg.calibrate ? "true" : "false") << "\n";
  c << "sim.checkpoints = " << render_list(cfg.checkpoints) << "\n";
  c << "sim.dt = " << format_double(cfg.sim.dt) << "\n";
  c << "sim.horizon = " << format_double(cfg.sim.horizon) << "\n";
  c << "sim.n_paths = " << cfg.sim.n_paths << "\n";
  c << "sim.per_path = " << (cfg.per_path ? "true" : "false") << "\n";
  c << "sim.projection = \"" << (cfg.sim.projection == ProjectionMode::kProject ? "project" : "resample") << "\"\n";
  c << "sim.seed = " << cfg.sim.seed << "\n";
  if (cfg.x0) c << "sim.x0 = " << render_list(std::vector<double>(cfg.x0->data(), cfg.x0->data() + d)) << "\n";
  c << "sim.z = " << format_double(cfg.z) << "\n";
  c << "solver.max_iter = " << cfg.max_iter << "\n";
  c << "solver.method = \"" << cfg.method << "\"\n";
  c << "solver.tol = " << format_double(cfg.tol) << "\n";
  c << "solver.tol_sigma = " << format_double(cfg.tol_sigma) << "\n";
  c << "verify.boundary_samples = " << cfg.boundary_samples << "\n";
  c << "verify.delta_strict = " << format_double(cfg.delta_strict) << "\n";
  c << "verify.pass_fraction = " << format_double(cfg.pass_fraction) << "\n";
  c << "verify.sandwich_tol = " << format_double(cfg.sandwich_tol) << "\n";
  c << "verify.tol = " << format_double(cfg.effective_verify_tol()) << "\n";
  c << "verify.tol_b = " << format_double(cfg.tol_b) << "\n";
  cfg.canonical = c.str();
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  ConfigTable table = parse_config_table(text);
  for (const auto& o : overrides) apply_override(table, o);
  return build_config(table);
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigTable table = parse_config_table(ss.str(), path);
  for (const auto& o : overrides) apply_override(table, o);
  return build_config(table);
}

}  // namespace schjb
