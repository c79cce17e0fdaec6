#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tableforge/layout.hpp"
#include "tableforge/tag.hpp"

namespace tableforge {

struct SpatialEvidence {
  SemanticTag tag;
  std::vector<Region> regions;  // reading order
  std::vector<BBox> bboxes_px;  // bboxes_px[i] == regions[i].bbox
};

// One deduplicated box of an evidence set, attributed to the first tag that
// produced it.
struct EvidenceBox {
  std::size_t tag_index = 0;
  Region region;
};

struct SpatialEvidenceSet {
  std::vector<SpatialEvidence> items;
  std::size_t total_boxes = 0;

  // Distinct boxes in stable order (tag order, then reading order).
  std::vector<EvidenceBox> distinct() const;
};

// Unique leaf path ending with `suffix` (an exact full path wins).
// Throws Error{kPathNotFound | kAmbiguousPath}.
Path resolve_suffix(const Path& suffix, const HeaderTree& tree);

// Same, over all nodes (internal included); used by header references.
Path resolve_node_suffix(const Path& suffix, const HeaderTree& tree);

// Throws Error{kPathNotFound | kAmbiguousPath | kPathNotLeaf}.
SpatialEvidence resolve_tag(const SemanticTag& tag, const TableSpec& spec, const RegionMap& map);

// Boxes of the addressed cells, input order. Throws Error{kIndexOutOfRange}.
std::vector<BBox> resolve_legacy(const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                                 const RegionMap& map);

// Resolution errors are rethrown with Error::offset() = tag index.
SpatialEvidenceSet resolve_evidence_set(const std::vector<SemanticTag>& tags, const TableSpec& spec,
                                        const RegionMap& map);

}  // namespace tableforge
