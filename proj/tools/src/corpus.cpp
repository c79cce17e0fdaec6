#include "tableforge/app/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tableforge/error.hpp"

namespace tableforge::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> spec_files(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kIoError, "no such spec path " + path);
  if (!fs::is_directory(path)) return {path};
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(path)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".json" && name.find(".regions.") == std::string::npos) {
      out.push_back(e.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, TableAsset> load_tables(const std::string& specs, const std::string& assets_dir) {
  std::map<std::string, TableAsset> out;
  for (const auto& file : spec_files(specs)) {
    TableSpec spec = load_spec_file(file);
    const std::string stem = (fs::path(assets_dir) / spec.table_id).string();
    RegionMap map = region_map_from_json(read_json(stem + ".regions.json"));
    const std::string image = stem + ".png";
    if (!fs::exists(image)) throw Error(ErrorCode::kIoError, "missing rendered image " + image);
    const std::string id = spec.table_id;
    if (out.count(id)) throw Error(ErrorCode::kSchemaError, "duplicate table_id " + id + " in " + file);
    out.emplace(id, TableAsset{std::move(spec), std::move(map), image});
  }
  return out;
}

Corpus load_corpus(const std::string& dir, const std::string& specs_override, const std::string& assets_override) {
  Corpus c;
  c.dir = dir;
  c.meta = read_json((fs::path(dir) / kManifestFile).string());
  c.specs = !specs_override.empty() ? specs_override : c.meta.value("specs", std::string());
  c.assets = !assets_override.empty() ? assets_override : c.meta.value("assets", std::string());
  if (c.specs.empty() || c.assets.empty()) {
    throw Error(ErrorCode::kSchemaError, "manifest names no specs/assets location and none was given");
  }
  c.manifest.instances = read_jsonl((fs::path(dir) / kTrajectoryFile).string());
  const json splits = c.meta.value("split", json::object());
  for (const auto& [id, split] : splits.items()) {
    c.manifest.split[id] = split.get<std::string>() == "test" ? Split::kTest : Split::kTrain;
  }
  c.tables = load_tables(c.specs, c.assets);
  return c;
}

json manifest_json(const Corpus& c) {
  json j = c.meta;
  j["specs"] = c.specs;
  j["assets"] = c.assets;
  json ids = json::array();
  json split = json::object();
  for (const auto& in : c.manifest.instances) {
    ids.push_back(in.id);
    if (auto it = c.manifest.split.find(in.id); it != c.manifest.split.end()) {
      split[in.id] = std::string(to_string(it->second));
    }
  }
  j["instances"] = ids;
  j["split"] = split;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

void save_corpus(const Corpus& c) {
  fs::create_directories(c.dir);
  write_jsonl((fs::path(c.dir) / kTrajectoryFile).string(), c.manifest.instances);
  write_text((fs::path(c.dir) / kManifestFile).string(), manifest_json(c).dump(2) + "\n");
}

}  // namespace tableforge::app
