#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/trajectory.hpp"

namespace tableforge::app {

inline constexpr const char* kTrajectoryFile = "trajectories.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kFlagsFile = "flags.jsonl";
inline constexpr const char* kAuditLogFile = "audit_log.jsonl";
inline constexpr const char* kAuditSampleFile = "audit_sample.json";

// A spec path may be one file or a directory of *.json files (sorted).
std::vector<std::string> spec_files(const std::string& path);

// Specs plus the render outputs {table_id}.png / {table_id}.regions.json
// found in assets_dir. Throws Error{kIoError | kSchemaError | ...}.
std::map<std::string, TableAsset> load_tables(const std::string& specs, const std::string& assets_dir);

struct Corpus {
  std::string dir;
  std::string specs;
  std::string assets;
  nlohmann::json meta = nlohmann::json::object();  // manifest fields kept verbatim
  DatasetManifest manifest;
  std::map<std::string, TableAsset> tables;
};

// Reads trajectories.jsonl and manifest.json from dir. Empty overrides fall
// back to the paths recorded in the manifest.
Corpus load_corpus(const std::string& dir, const std::string& specs_override = "",
                   const std::string& assets_override = "");

nlohmann::json manifest_json(const Corpus& corpus);

// Rewrites trajectories.jsonl and manifest.json.
void save_corpus(const Corpus& corpus);

void write_text(const std::string& path, const std::string& text);

}  // namespace tableforge::app
