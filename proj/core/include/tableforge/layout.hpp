#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/geometry.hpp"
#include "tableforge/table.hpp"

namespace tableforge {

struct LayoutMetrics {
  int cell_w = 120;
  int cell_h = 40;
  int stub_w = 160;  // per row-header level
  int head_h = 40;   // per column-header level
  int border = 1;
  int font_size = 14;
  // Content-fitted column widths: max(60, widest text + 16). Off for all
  // golden geometry.
  bool fit_content = false;

  void validate() const;  // throws Error{kMetricsInvalid}
};

LayoutMetrics metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LayoutMetrics& m);

// Cells carry row+col; "row"/"column" strips carry one index; headers carry a path.
struct GridRef {
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  Path path;

  friend bool operator==(const GridRef&, const GridRef&) = default;
};

struct Region {
  std::string id;
  LabelType label = LabelType::kCell;
  BBox bbox;
  GridRef grid;

  friend bool operator==(const Region&, const Region&) = default;
};

class RegionMap {
 public:
  RegionMap() = default;
  RegionMap(int image_w, int image_h, std::size_t n_rows, std::size_t n_cols, std::vector<Region> regions);

  int image_w() const { return image_w_; }
  int image_h() const { return image_h_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  // Layout order: colheads and rowheads (pre-order), columns, rows, cells row-major.
  const std::vector<Region>& regions() const { return regions_; }
  const Region* find(const std::string& id) const;
  const Region& cell(std::size_t row, std::size_t col) const;  // throws kRegionNotFound
  // First region with exactly this box and label type.
  const Region* find_box(const BBox& box, LabelType label) const;

  friend bool operator==(const RegionMap& a, const RegionMap& b) {
    return a.image_w_ == b.image_w_ && a.image_h_ == b.image_h_ && a.regions_ == b.regions_;
  }

 private:
  int image_w_ = 0;
  int image_h_ = 0;
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<Region> regions_;
  std::map<std::string, std::size_t> by_id_;
};

std::string cell_region_id(std::size_t row, std::size_t col);

// Deterministic layout; throws Error{kMetricsInvalid}.
RegionMap compute_layout(const TableSpec& spec, const LayoutMetrics& metrics);

// The unique region with this label type and grid reference; throws kRegionNotFound.
const Region& region_of(const RegionMap& map, LabelType label, const GridRef& grid);

nlohmann::json to_json(const RegionMap& map);
RegionMap region_map_from_json(const nlohmann::json& j);

// Vector image document. Every primitive derives from the region map.
struct DocRect {
  BBox box;
  std::string fill;    // empty = none
  std::string stroke;  // empty = none
  int stroke_width = 0;
};

struct DocText {
  int x = 0;         // anchor (horizontal centre)
  int baseline = 0;
  std::string text;
  BBox clip;         // text never renders outside this box
};

struct ImageDocument {
  int width = 0;
  int height = 0;
  int font_size = 14;
  std::optional<std::string> title;
  std::vector<DocRect> rects;
  std::vector<DocText> texts;

  // SVG 1.1, UTF-8, no external references.
  std::string to_svg() const;
};

ImageDocument render_image(const TableSpec& spec, const RegionMap& layout, const LayoutMetrics& metrics);

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

// Throws Error{kScaleInvalid} for scale < 1.
Raster rasterize(const ImageDocument& doc, int scale);

// 8-bit RGB PNG bytes.
std::vector<std::uint8_t> encode_png(const Raster& raster);

}  // namespace tableforge
