#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "schjb/catalog.hpp"
#include "schjb/params.hpp"
#include "schjb/simulate.hpp"

namespace schjb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "SCHJB_OUT_DIR";

/// One parsed `key = value` entry. `literal` keeps the source text so that
/// 64-bit integers (seeds) survive without a round trip through double.
struct ConfigEntry {
  ParamValue value;
  std::string literal;
};

using ConfigSection = std::map<std::string, ConfigEntry>;
using ConfigTable = std::map<std::string, ConfigSection>;

/// TOML subset: `[section]` headers, `key = value` with value a quoted string,
/// number, true/false or a flat list of numbers; `#` comments.
ConfigTable parse_config_table(const std::string& text, const std::string& origin = "<config>");

/// Parses one override of the form `section.key=value`. Bare words are taken
/// as strings.
void apply_override(ConfigTable& table, const std::string& assignment);

struct RunConfig {
  // problem / domain
  std::string problem_name;
  ParamMap problem_params;
  std::optional<DomainSpec> domain;

  // grid
  double h = 0.05;
  std::optional<double> band;

  // solver
  std::string method = "policy";  // "policy" or "value"
  double tol = 1e-8;
  std::size_t max_iter = 1'000'000;
  double tol_sigma = 1e-8;

  // sim
  SimParams sim;
  std::optional<Vector> x0;  // default: center + (upper - center) / 4
  std::vector<double> checkpoints{0.5, 1.0, 2.0, 5.0};
  double z = 2.576;
  bool per_path = false;
  bool calibrate = true;  // dt-halving run for the weak-error allowance

  // verify
  std::optional<double> verify_tol;  // default 10 * solver tol
  double pass_fraction = 0.99;
  std::size_t boundary_samples = 1000;
  double delta_strict = 1e-6;
  double tol_b = 0.0;
  double sandwich_tol = 1e-9;

  // output
  std::string out_dir;

  /// `section.key = value` lines in sorted order, excluding [output].
  std::string canonical;
  std::uint64_t hash = 0;

  double effective_verify_tol() const { return verify_tol.value_or(10.0 * tol); }
  std::string hash_hex() const;
};

/// Validates a table into a RunConfig. Unknown sections or keys and range
/// violations raise ConfigError naming the key path.
RunConfig build_config(const ConfigTable& table);

/// Reads `path`, applies the overrides in order, validates.
RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Same, from in-memory text.
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

/// %.17g: 17 significant digits, enough to read back the same double.
std::string format_double(double v);

}  // namespace schjb
