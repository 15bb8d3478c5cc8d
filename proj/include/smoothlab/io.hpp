#pragma once

// Model files (JSON), pool snapshots (CSV, 17 significant digits) and run
// manifests.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smoothlab/cascade.hpp"
#include "smoothlab/model.hpp"

namespace smoothlab {

/// Throws InvalidModel on malformed documents.
ModelSpec parse_model(const std::string& json_text);
/// Throws Io("model file not found") when the path does not exist.
ModelSpec load_model(const std::string& path);
std::string model_to_json(const ModelSpec& spec);

std::string pool_to_csv(const SamplePool& pool);
SamplePool parse_pool_csv(const std::string& text);
void write_pool_csv(const SamplePool& pool, const std::string& path);
SamplePool read_pool_csv(const std::string& path);

/// %.17g; the one number format used in every CSV.
std::string format_number(double x);

struct RunManifest {
  std::string model_path;
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> output_paths;
  std::string tool_version;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace smoothlab
