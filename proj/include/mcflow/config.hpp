#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcflow/geometry.hpp"
#include "mcflow/simulator.hpp"

namespace mcflow {

using Json = nlohmann::ordered_json;

// Strict mode rejects duplicate keys while parsing and unknown keys while
// reading records. Errors: config.parse_error, config.duplicate_key.
Json parse_json(const std::string& text, bool strict = true);
// config.missing_file when the path does not exist.
Json load_json(const std::filesystem::path& path, bool strict = true);

// Consumes keys of one JSON object; finish() reports leftovers as
// config.unknown_key (strict) and every lookup checks the value type.
class Record {
 public:
  Record(const Json& object, std::string path, bool strict = true);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  const Json& raw(const std::string& key);
  Record child(const std::string& key);
  const std::string& path() const { return path_; }
  void finish() const;

 private:
  const Json& at(const std::string& key, Json::value_t type, const char* type_name);
  const Json* object_;
  std::string path_;
  bool strict_;
  std::vector<std::string> used_;
};

// Domain file: {"outer": {"center": [x, y], "radius": r}, "holes": [...]} for
// circular domains, or {"curves": [c0, c1, ...]} with c0 the outer curve and
// each c either {"samples": [[x, y], ...]}, {"circle": {"center", "radius"}} or
// {"ellipse": {"center", "axes": [a, b], "rotation"}}.
using DomainSpec = std::variant<CircularDomain, SmoothDomain>;
DomainSpec parse_domain(const Json& j, bool strict = true);
// Named presets (annulus, annulus:<r>, eccentric, symmetric, three-holes,
// four-connected, disc) or a domain file.
DomainSpec resolve_domain(const std::string& name_or_path, bool strict = true);
CircularDomain require_circular(const DomainSpec& d);
Json domain_to_json(const DomainSpec& d);

struct SimulateConfig {
  SimulationConfig polar;
  bool masked = false;  // any circular domain other than the concentric annulus
  MaskedConfig masked_config;
  std::string snapshots = "none";  // none, csv, binary
  std::uint64_t seed = 1;
};

// Validates before any compute: beta > 4/3 and gamma > 1 unless
// "allow_parameter_override" is set (config.invalid_parameters), positive
// times and resolution, a domain file that exists.
SimulateConfig parse_simulate_config(const Json& j, const std::filesystem::path& base_dir, bool strict = true);
Json to_json(const SimulateConfig& c);

// FNV-1a over the compact dump.
std::uint64_t config_hash(const Json& resolved);
std::string hex64(std::uint64_t v);

struct Column {
  std::string name, unit, definition;
};

// "# name [unit]: definition" per column, then the bare header row; values in
// %.17g so reruns are byte identical.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns);
  void row(const std::vector<double>& values);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::size_t width_;
  std::ofstream out_;
};

std::string format_double(double v);

// Little endian: 8-byte magic "MCFLOWG1", uint32 rows, uint32 cols, then
// rows * cols float64 values row-major.
void write_grid_binary(const std::filesystem::path& path, const Eigen::ArrayXXd& values);
Eigen::ArrayXXd read_grid_binary(const std::filesystem::path& path);

struct RunMetadata {
  std::string command;
  Json resolved;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::string> outputs;
  int exit_code = 0;
};

// Writes <dir>/<stem>.meta.json (hash, versions, seed, timestamp) and the
// resolved config echo <dir>/<stem>.config.json.
void write_sidecar(const std::filesystem::path& dir, const std::string& stem, const RunMetadata& meta);

std::string library_version();

}  // namespace mcflow
