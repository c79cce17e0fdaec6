#include "tableforge/layout.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tableforge/error.hpp"
#include "text_metrics.hpp"

namespace tableforge {
namespace {

using nlohmann::json;

std::string index_path_id(const char* prefix, const std::vector<std::size_t>& idx) {
  std::string id = prefix;
  id += ':';
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) id += '.';
    id += std::to_string(idx[i]);
  }
  return id;
}

struct AxisLayout {
  // Leaf boundaries along the data axis: edges[k]..edges[k+1] is leaf k.
  std::vector<int> edges;
  int band = 0;  // header band thickness per level
  std::size_t depth = 0;
};

// Emits one header region per node. `horizontal` = column headers.
void place_headers(const std::vector<HeaderNode>& nodes, const AxisLayout& axis, bool horizontal,
                   std::size_t level, std::size_t& leaf_cursor, Path& path,
                   std::vector<std::size_t>& idx, std::vector<Region>& out) {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const HeaderNode& node = nodes[k];
    path.push_back(node.label);
    idx.push_back(k);
    const std::size_t first = leaf_cursor;
    const std::size_t last = first + node.leaf_span;
    const int lo = static_cast<int>(level) * axis.band;
    const int hi = node.is_leaf() ? static_cast<int>(axis.depth) * axis.band
                                  : static_cast<int>(level + 1) * axis.band;
    Region r;
    r.label = horizontal ? LabelType::kColHead : LabelType::kRowHead;
    r.id = index_path_id(horizontal ? "colhead" : "rowhead", idx);
    r.grid.path = path;
    if (horizontal) {
      r.bbox = {axis.edges[first], lo, axis.edges[last], hi};
    } else {
      r.bbox = {lo, axis.edges[first], hi, axis.edges[last]};
    }
    out.push_back(std::move(r));
    if (node.is_leaf()) {
      ++leaf_cursor;
    } else {
      place_headers(node.children, axis, horizontal, level + 1, leaf_cursor, path, idx, out);
    }
    idx.pop_back();
    path.pop_back();
  }
}

std::vector<int> column_widths(const TableSpec& spec, const LayoutMetrics& m) {
  std::vector<int> widths(spec.n_cols(), m.cell_w);
  if (!m.fit_content) return widths;
  const auto col_paths = leaf_paths(spec.col_tree);
  for (std::size_t j = 0; j < widths.size(); ++j) {
    int widest = text_width(col_paths[j].back(), m.font_size);
    for (const auto& row : spec.cells) widest = std::max(widest, text_width(row[j].raw, m.font_size));
    widths[j] = std::max(kMinFittedWidth, widest + kFitPadding);
  }
  return widths;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

json grid_json(const GridRef& g) {
  json j = json::object();
  if (g.row) j["row"] = *g.row;
  if (g.col) j["col"] = *g.col;
  if (!g.path.empty()) j["path"] = g.path;
  return j;
}

}  // namespace

std::string_view to_string(LabelType label) {
  switch (label) {
    case LabelType::kColumn: return "column";
    case LabelType::kRow: return "row";
    case LabelType::kCell: return "cell";
    case LabelType::kColHead: return "colhead";
    case LabelType::kRowHead: return "rowhead";
  }
  return "cell";
}

std::optional<LabelType> parse_label_type(std::string_view text) {
  if (text == "column") return LabelType::kColumn;
  if (text == "row") return LabelType::kRow;
  if (text == "cell") return LabelType::kCell;
  if (text == "colhead") return LabelType::kColHead;
  if (text == "rowhead") return LabelType::kRowHead;
  return std::nullopt;
}

void LayoutMetrics::validate() const {
  if (cell_w <= 0 || cell_h <= 0 || stub_w <= 0 || head_h <= 0 || border <= 0 || font_size <= 0) {
    throw Error(ErrorCode::kMetricsInvalid, "all layout metrics must be positive");
  }
}

LayoutMetrics metrics_from_json(const json& j) {
  LayoutMetrics m;
  m.cell_w = j.value("cell_w", m.cell_w);
  m.cell_h = j.value("cell_h", m.cell_h);
  m.stub_w = j.value("stub_w", m.stub_w);
  m.head_h = j.value("head_h", m.head_h);
  m.border = j.value("border", m.border);
  m.font_size = j.value("font_size", m.font_size);
  m.fit_content = j.value("fit_content", m.fit_content);
  return m;
}

json to_json(const LayoutMetrics& m) {
  return {{"cell_w", m.cell_w}, {"cell_h", m.cell_h}, {"stub_w", m.stub_w}, {"head_h", m.head_h},
          {"border", m.border}, {"font_size", m.font_size}, {"fit_content", m.fit_content}};
}

RegionMap::RegionMap(int image_w, int image_h, std::size_t n_rows, std::size_t n_cols,
                     std::vector<Region> regions)
    : image_w_(image_w), image_h_(image_h), n_rows_(n_rows), n_cols_(n_cols), regions_(std::move(regions)) {
  for (std::size_t i = 0; i < regions_.size(); ++i) by_id_.emplace(regions_[i].id, i);
}

const Region* RegionMap::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &regions_[it->second];
}

const Region& RegionMap::cell(std::size_t row, std::size_t col) const {
  const Region* r = find(cell_region_id(row, col));
  if (r == nullptr) {
    throw Error(ErrorCode::kRegionNotFound,
                "no cell region at (" + std::to_string(row) + "," + std::to_string(col) + ")");
  }
  return *r;
}

const Region* RegionMap::find_box(const BBox& box, LabelType label) const {
  for (const auto& r : regions_) {
    if (r.label == label && r.bbox == box) return &r;
  }
  return nullptr;
}

std::string cell_region_id(std::size_t row, std::size_t col) {
  return "cell:" + std::to_string(row) + ":" + std::to_string(col);
}

RegionMap compute_layout(const TableSpec& spec, const LayoutMetrics& metrics) {
  metrics.validate();
  const std::size_t n_rows = spec.n_rows();
  const std::size_t n_cols = spec.n_cols();
  const int data_x = metrics.stub_w * static_cast<int>(spec.row_tree.depth);
  const int data_y = metrics.head_h * static_cast<int>(spec.col_tree.depth);

  AxisLayout cols{{data_x}, metrics.head_h, spec.col_tree.depth};
  for (int w : column_widths(spec, metrics)) cols.edges.push_back(cols.edges.back() + w);
  AxisLayout rows{{data_y}, metrics.stub_w, spec.row_tree.depth};
  for (std::size_t i = 0; i < n_rows; ++i) rows.edges.push_back(rows.edges.back() + metrics.cell_h);

  const int image_w = cols.edges.back();
  const int image_h = rows.edges.back();

  std::vector<Region> regions;
  {
    Path path;
    std::vector<std::size_t> idx;
    std::size_t cursor = 0;
    place_headers(spec.col_tree.roots, cols, true, 0, cursor, path, idx, regions);
    cursor = 0;
    place_headers(spec.row_tree.roots, rows, false, 0, cursor, path, idx, regions);
  }
  for (std::size_t j = 0; j < n_cols; ++j) {
    regions.push_back({"column:" + std::to_string(j), LabelType::kColumn,
                       {cols.edges[j], data_y, cols.edges[j + 1], image_h}, {std::nullopt, j, {}}});
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    regions.push_back({"row:" + std::to_string(i), LabelType::kRow,
                       {data_x, rows.edges[i], image_w, rows.edges[i + 1]}, {i, std::nullopt, {}}});
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      regions.push_back({cell_region_id(i, j), LabelType::kCell,
                         {cols.edges[j], rows.edges[i], cols.edges[j + 1], rows.edges[i + 1]},
                         {i, j, {}}});
    }
  }
  return RegionMap(image_w, image_h, n_rows, n_cols, std::move(regions));
}

const Region& region_of(const RegionMap& map, LabelType label, const GridRef& grid) {
  if (label == LabelType::kCell && grid.row && grid.col) {
    if (const Region* r = map.find(cell_region_id(*grid.row, *grid.col))) return *r;
  } else {
    for (const auto& r : map.regions()) {
      if (r.label == label && r.grid == grid) return r;
    }
  }
  throw Error(ErrorCode::kRegionNotFound, std::string("no ") + std::string(to_string(label)) + " region for the given reference");
}

json to_json(const RegionMap& map) {
  json regions = json::array();
  for (const auto& r : map.regions()) {
    regions.push_back({{"id", r.id},
                       {"label", std::string(to_string(r.label))},
                       {"bbox", r.bbox.as_array()},
                       {"grid", grid_json(r.grid)}});
  }
  return {{"image_w", map.image_w()},
          {"image_h", map.image_h()},
          {"n_rows", map.n_rows()},
          {"n_cols", map.n_cols()},
          {"regions", regions}};
}

RegionMap region_map_from_json(const json& j) {
  try {
    std::vector<Region> regions;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    for (const auto& rj : j.at("regions")) {
      Region r;
      r.id = rj.at("id").get<std::string>();
      auto label = parse_label_type(rj.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::kSchemaError, "unknown region label in " + r.id);
      r.label = *label;
      auto b = rj.at("bbox").get<std::array<int, 4>>();
      r.bbox = {b[0], b[1], b[2], b[3]};
      const auto& g = rj.at("grid");
      if (g.contains("row")) r.grid.row = g["row"].get<std::size_t>();
      if (g.contains("col")) r.grid.col = g["col"].get<std::size_t>();
      if (g.contains("path")) r.grid.path = g["path"].get<Path>();
      if (r.label == LabelType::kCell) {
        n_rows = std::max(n_rows, *r.grid.row + 1);
        n_cols = std::max(n_cols, *r.grid.col + 1);
      }
      regions.push_back(std::move(r));
    }
    return RegionMap(j.at("image_w").get<int>(), j.at("image_h").get<int>(), j.value("n_rows", n_rows),
                     j.value("n_cols", n_cols), std::move(regions));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("region map: ") + e.what());
  }
}

ImageDocument render_image(const TableSpec& spec, const RegionMap& layout, const LayoutMetrics& metrics) {
  metrics.validate();
  ImageDocument doc;
  doc.width = layout.image_w();
  doc.height = layout.image_h();
  doc.font_size = metrics.font_size;
  doc.title = spec.title;
  doc.rects.push_back({{0, 0, doc.width, doc.height}, "#ffffff", "", 0});

  const int stub_w = metrics.stub_w * static_cast<int>(spec.row_tree.depth);
  const int head_h = metrics.head_h * static_cast<int>(spec.col_tree.depth);
  doc.rects.push_back({{0, 0, stub_w, head_h}, "#e6e6e6", "#000000", metrics.border});

  auto add_text = [&](const BBox& box, const std::string& text) {
    if (text.empty()) return;
    const int baseline = box.y1 + (box.height() + glyph_height(metrics.font_size)) / 2;
    doc.texts.push_back({box.x1 + box.width() / 2, baseline, text, box});
  };

  for (const auto& r : layout.regions()) {
    switch (r.label) {
      case LabelType::kColHead:
      case LabelType::kRowHead:
        doc.rects.push_back({r.bbox, "#f2f2f2", "#000000", metrics.border});
        add_text(r.bbox, r.grid.path.back());
        break;
      case LabelType::kCell:
        doc.rects.push_back({r.bbox, "", "#000000", metrics.border});
        add_text(r.bbox, spec.cells[*r.grid.row][*r.grid.col].raw);
        break;
      case LabelType::kColumn:
      case LabelType::kRow:
        break;  // strips are covered by their cells
    }
  }
  return doc;
}

std::string ImageDocument::to_svg() const {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  if (title) os << "<title>" << xml_escape(*title) << "</title>\n";
  if (!texts.empty()) {
    os << "<defs>\n";
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const BBox& c = texts[i].clip;
      os << "<clipPath id=\"k" << i << "\"><rect x=\"" << c.x1 << "\" y=\"" << c.y1 << "\" width=\""
         << c.width() << "\" height=\"" << c.height() << "\"/></clipPath>\n";
    }
    os << "</defs>\n";
  }
  for (const auto& r : rects) {
    os << "<rect x=\"" << r.box.x1 << "\" y=\"" << r.box.y1 << "\" width=\"" << r.box.width()
       << "\" height=\"" << r.box.height() << "\" fill=\"" << (r.fill.empty() ? "none" : r.fill) << '"';
    if (!r.stroke.empty()) os << " stroke=\"" << r.stroke << "\" stroke-width=\"" << r.stroke_width << '"';
    os << "/>\n";
  }
  if (!texts.empty()) {
    os << "<g font-family=\"monospace\" font-size=\"" << font_size << "\" fill=\"#000000\" text-anchor=\"middle\">\n";
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto& t = texts[i];
      os << "<text x=\"" << t.x << "\" y=\"" << t.baseline << "\" clip-path=\"url(#k" << i << ")\">"
         << xml_escape(t.text) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace tableforge
