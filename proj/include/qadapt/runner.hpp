#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qadapt/csv.hpp"

namespace qadapt {

// Flat key = value configuration. Blank lines and lines starting with '#'
// are ignored. Throws ConfigError on a malformed line or a repeated key.
std::map<std::string, std::string> parse_config(std::istream& is);
std::map<std::string, std::string> read_config_file(const std::string& path);

const std::vector<std::string>& experiment_ids();
bool is_experiment_id(const std::string& id);
// Keys understood by an experiment, with their default values.
std::map<std::string, std::string> experiment_defaults(const std::string& id);

struct RunSpec {
  std::string id;
  std::uint64_t seed = 1;
  std::size_t trials = 0;  // 0 keeps the experiment's default
  std::map<std::string, std::string> overrides;
};

struct Criterion {
  std::string name;
  double value = 0.0;
  std::string relation;  // ">=", "<=", "==" or "<"
  double threshold = 0.0;
  bool pass = false;
};

struct RunResult {
  CsvTable data;  // every row ends with seed, build_id, config_hash
  nlohmann::ordered_json summary;
  std::vector<Criterion> criteria;
  bool pass = false;
};

// FNV-1a over "id" and the sorted effective "key=value" lines.
std::string config_hash(const std::string& id, const std::map<std::string, std::string>& effective);

// Validates the whole spec before any work; ConfigError on an unknown id,
// an unknown key or an unparsable value.
RunResult run_experiment(const RunSpec& spec);

// Writes <dir>/<id>.csv and <dir>/<id>_summary.json through temporary files
// renamed into place, so a failure never leaves partial outputs behind.
void write_outputs(const RunResult& result, const std::string& id, const std::string& dir);

}  // namespace qadapt
