#include "tableforge/resolver.hpp"

#include <algorithm>
#include <set>

#include "tableforge/error.hpp"

namespace tableforge {
namespace {

bool ends_with(const Path& path, const Path& suffix) {
  if (suffix.size() > path.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), path.rbegin());
}

Path trimmed(const Path& path) {
  Path out;
  out.reserve(path.size());
  for (const auto& s : path) out.push_back(trim(s));
  return out;
}

Path unique_suffix(const Path& suffix, const std::vector<Path>& candidates, const char* what) {
  const Path* match = nullptr;
  std::size_t count = 0;
  for (const auto& p : candidates) {
    if (ends_with(p, suffix)) {
      match = &p;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kPathNotFound, std::string(what) + " '" + join_path(suffix) + "' not found");
  if (count > 1) {
    throw Error(ErrorCode::kAmbiguousPath,
                std::string(what) + " '" + join_path(suffix) + "' matches " + std::to_string(count) + " headers");
  }
  return *match;
}

// Leaf index on one axis for a row/col/cell tag.
std::size_t leaf_index(const Path& raw, const HeaderTree& tree, const GridIndex& index, bool rows) {
  const Path path = trimmed(raw);
  Path full;
  if (const HeaderNode* node = find_node(tree, path)) {
    if (!node->is_leaf()) {
      throw Error(ErrorCode::kPathNotLeaf, "'" + join_path(path) + "' is an internal header");
    }
    full = path;
  } else {
    try {
      full = resolve_suffix(path, tree);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPathNotFound) throw;
      // A suffix that only names internal headers is a leaf error, not a miss.
      for (const auto& p : node_paths(tree)) {
        if (ends_with(p, path)) throw Error(ErrorCode::kPathNotLeaf, "'" + join_path(path) + "' is an internal header");
      }
      throw;
    }
  }
  return rows ? *index.row(full) : *index.col(full);
}

}  // namespace

std::vector<EvidenceBox> SpatialEvidenceSet::distinct() const {
  std::vector<EvidenceBox> out;
  std::set<BBox> seen;
  for (std::size_t t = 0; t < items.size(); ++t) {
    for (const auto& region : items[t].regions) {
      if (seen.insert(region.bbox).second) out.push_back({t, region});
    }
  }
  return out;
}

Path resolve_suffix(const Path& suffix, const HeaderTree& tree) {
  const Path path = trimmed(suffix);
  if (path.empty()) throw Error(ErrorCode::kPathNotFound, "empty path");
  if (const HeaderNode* node = find_node(tree, path); node != nullptr && node->is_leaf()) return path;
  return unique_suffix(path, leaf_paths(tree), "leaf path");
}

Path resolve_node_suffix(const Path& suffix, const HeaderTree& tree) {
  const Path path = trimmed(suffix);
  if (path.empty()) throw Error(ErrorCode::kPathNotFound, "empty path");
  if (find_node(tree, path) != nullptr) return path;
  return unique_suffix(path, node_paths(tree), "header path");
}

SpatialEvidence resolve_tag(const SemanticTag& tag, const TableSpec& spec, const RegionMap& map) {
  SpatialEvidence ev;
  ev.tag = tag;
  switch (tag.kind) {
    case TagKind::kCellIntersect: {
      const std::size_t col = leaf_index(*tag.col_path, spec.col_tree, spec.index, false);
      const std::size_t row = leaf_index(*tag.row_path, spec.row_tree, spec.index, true);
      ev.regions.push_back(map.cell(row, col));
      break;
    }
    case TagKind::kRowExtract: {
      const std::size_t row = leaf_index(*tag.row_path, spec.row_tree, spec.index, true);
      ev.regions.push_back(region_of(map, LabelType::kRowHead, {std::nullopt, std::nullopt, spec.index.row_paths()[row]}));
      for (std::size_t j = 0; j < spec.n_cols(); ++j) ev.regions.push_back(map.cell(row, j));
      break;
    }
    case TagKind::kColExtract: {
      const std::size_t col = leaf_index(*tag.col_path, spec.col_tree, spec.index, false);
      ev.regions.push_back(region_of(map, LabelType::kColHead, {std::nullopt, std::nullopt, spec.index.col_paths()[col]}));
      for (std::size_t i = 0; i < spec.n_rows(); ++i) ev.regions.push_back(map.cell(i, col));
      break;
    }
    case TagKind::kColHeadRef: {
      const Path full = resolve_node_suffix(*tag.col_path, spec.col_tree);
      ev.regions.push_back(region_of(map, LabelType::kColHead, {std::nullopt, std::nullopt, full}));
      break;
    }
    case TagKind::kRowHeadRef: {
      const Path full = resolve_node_suffix(*tag.row_path, spec.row_tree);
      ev.regions.push_back(region_of(map, LabelType::kRowHead, {std::nullopt, std::nullopt, full}));
      break;
    }
  }
  for (const auto& r : ev.regions) ev.bboxes_px.push_back(r.bbox);
  return ev;
}

std::vector<BBox> resolve_legacy(const std::vector<std::pair<std::size_t, std::size_t>>& cells, const RegionMap& map) {
  std::vector<BBox> out;
  out.reserve(cells.size());
  for (const auto& [row, col] : cells) {
    if (row >= map.n_rows() || col >= map.n_cols()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                      std::to_string(map.n_rows()) + "x" + std::to_string(map.n_cols()) + " grid");
    }
    out.push_back(map.cell(row, col).bbox);
  }
  return out;
}

SpatialEvidenceSet resolve_evidence_set(const std::vector<SemanticTag>& tags, const TableSpec& spec,
                                        const RegionMap& map) {
  SpatialEvidenceSet set;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    try {
      set.items.push_back(resolve_tag(tags[i], spec, map));
    } catch (const Error& e) {
      throw Error(e.code(), "tag " + std::to_string(i) + " (" + format_tag(tags[i]) + "): " + e.what(), i);
    }
  }
  std::set<BBox> distinct;
  for (const auto& item : set.items) distinct.insert(item.bboxes_px.begin(), item.bboxes_px.end());
  set.total_boxes = distinct.size();
  return set;
}

}  // namespace tableforge
