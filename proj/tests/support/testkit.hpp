#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/eval.hpp"
#include "tableforge/layout.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/tag.hpp"
#include "tableforge/trajectory.hpp"

namespace testkit {

using tableforge::BBox;
using tableforge::LayoutMetrics;
using tableforge::Path;
using tableforge::RegionMap;
using tableforge::Rng;
using tableforge::TableAsset;
using tableforge::TableSpec;

nlohmann::json fixture_a_document();
TableSpec fixture_a();
// cell 120x40, stub 160, head 40, border 1
LayoutMetrics golden_metrics();
TableAsset make_asset(const TableSpec& spec, const LayoutMetrics& metrics = golden_metrics(),
                      const std::string& image = "");
TableAsset fixture_a_asset();

// Table-spec document with random header trees (depth <= max_depth, leaves
// within the bounds) and a mix of numeric and text cells. Sibling labels are
// unique, but labels repeat across parents so suffix paths can be ambiguous.
struct TableShape {
  std::size_t max_rows = 20;
  std::size_t max_cols = 12;
  std::size_t max_depth = 3;
  double text_cell_rate = 0.1;
  bool metachar_labels = true;
};
nlohmann::json random_table_document(Rng& rng, const TableShape& shape, const std::string& table_id);
TableSpec random_table(Rng& rng, const TableShape& shape = {}, const std::string& table_id = "t");

// Leaf and node paths recomputed straight from the document JSON, without
// going through the library's header tree.
struct DocPaths {
  std::vector<Path> col_leaves, row_leaves, col_nodes, row_nodes;
  std::size_t col_depth = 0, row_depth = 0;
};
DocPaths doc_paths(const nlohmann::json& document);

// Brute-force expectation for one tag: region list in reading order, or
// nullopt when resolution must fail.
std::optional<std::vector<tableforge::Region>> brute_force_resolve(const tableforge::SemanticTag& tag,
                                                                  const DocPaths& paths, const RegionMap& map);

// Tag drawn from the table's own paths (full or suffix), with occasional misses.
tableforge::SemanticTag tag_from_paths(Rng& rng, const DocPaths& paths);

// Pixel-membership IoU over [x1, x2) x [y1, y2).
double pixel_iou(const BBox& a, const BBox& b);

// Nearest n in [0, 999] to v * 999 / dim, ties upward, found by scanning.
int scan_normalize(int v, int dim);

// Best total IoU over every one-to-one assignment (zero IoU pairs excluded).
double brute_force_assignment(const std::vector<std::vector<double>>& iou_matrix, std::size_t n_gt);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

// Directory holding the checked-in test data (tests/data).
std::filesystem::path data_dir();

}  // namespace testkit

namespace testkit {

// Geometry invariants of a fixed-metric layout, checked against positions
// computed from the document alone. Returns one message per violation.
std::vector<std::string> geometry_violations(const nlohmann::json& document, const tableforge::RegionMap& map,
                                             const tableforge::LayoutMetrics& metrics);

}  // namespace testkit

namespace testkit {

// Valid tag whose segments are printable ASCII, metacharacters included.
tableforge::SemanticTag random_tag(Rng& rng);

// Model-style grounding output with a known expected parse.
struct GeneratedGrounding {
  std::string text;
  std::string reason;
  std::vector<tableforge::GroundingLine> valid;
  std::size_t invalid = 0;
};
GeneratedGrounding random_grounding_output(Rng& rng);

}  // namespace testkit

namespace testkit {

// Per-category counts (train + test), Avg Bbox and Avg Steps as published,
// Avg values in hundredths.
struct PublishedRow {
  tableforge::Category category;
  std::size_t count;
  long long bbox_x100;
  long long steps_x100;
};
const std::vector<PublishedRow>& published_rows();
std::vector<tableforge::CategoryRow> to_category_rows(const std::vector<PublishedRow>& rows);

}  // namespace testkit

namespace testkit {

enum class Corruption { kBoxShift, kNumberSwap, kAnswerTamper };

// Applies one seeded corruption that must make the instance wrong. Box shifts
// move one coordinate by 1 .. (smallest metric - 1) px; number swaps replace a
// step literal with a value no cell or computed quantity takes. Returns false
// when the kind does not apply (no literal to swap).
bool corrupt(tableforge::TrajectoryInstance& instance, const TableAsset& asset, const LayoutMetrics& metrics,
             Corruption kind, Rng& rng);

}  // namespace testkit
