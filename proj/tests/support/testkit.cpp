#include "testkit.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "tableforge/resolver.hpp"

#ifndef TABLEFORGE_TEST_DATA
#define TABLEFORGE_TEST_DATA "tests/data"
#endif

namespace testkit {

using nlohmann::json;
using tableforge::LabelType;
using tableforge::Region;
using tableforge::SemanticTag;
using tableforge::TagKind;

json fixture_a_document() {
  return json::parse(R"({
    "table_id": "fixture_a",
    "columns": [
      {"label": "Revenue", "children": [{"label": "Q1"}, {"label": "Q2"}]},
      {"label": "Cost", "children": [{"label": "Q1"}, {"label": "Q2"}]}
    ],
    "rows": [{"label": "2020"}, {"label": "2021"}],
    "cells": [["10", "20", "5", "8"], ["30", "40", "12", "16"]]
  })");
}

TableSpec fixture_a() { return tableforge::load_spec(fixture_a_document()); }

LayoutMetrics golden_metrics() {
  LayoutMetrics m;
  m.cell_w = 120;
  m.cell_h = 40;
  m.stub_w = 160;
  m.head_h = 40;
  m.border = 1;
  return m;
}

TableAsset make_asset(const TableSpec& spec, const LayoutMetrics& metrics, const std::string& image) {
  TableAsset asset;
  asset.spec = spec;
  asset.map = tableforge::compute_layout(spec, metrics);
  asset.image = image.empty() ? spec.table_id + ".png" : image;
  return asset;
}

TableAsset fixture_a_asset() { return make_asset(fixture_a()); }

namespace {

const std::vector<std::string> kPlainLabels = {"A", "B", "C", "Q1", "Q2", "Total", "North", "South",
                                               "2019", "2020", "Male", "Female", "x"};
const std::vector<std::string> kMetaLabels = {"a>b", "x@y", "k:v", "say \"hi\"", "p > q"};

std::string random_label(Rng& rng, const TableShape& shape) {
  if (shape.metachar_labels && rng.below(12) == 0) return rng.pick(kMetaLabels);
  return rng.pick(kPlainLabels);
}

std::size_t leaves_of(const json& nodes) {
  std::size_t n = 0;
  for (const auto& node : nodes) {
    n += node.contains("children") ? leaves_of(node["children"]) : 1;
  }
  return n;
}

json random_nodes(Rng& rng, const TableShape& shape, std::size_t levels_left, std::size_t max_fanout) {
  const std::size_t count = 1 + rng.below(max_fanout);
  std::vector<std::string> used;
  json nodes = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    std::string label;
    do {
      label = random_label(rng, shape);
    } while (std::find(used.begin(), used.end(), label) != used.end());
    used.push_back(label);
    json node = {{"label", label}};
    if (levels_left > 1 && rng.below(3) != 0) {
      node["children"] = random_nodes(rng, shape, levels_left - 1, 3);
    }
    nodes.push_back(node);
  }
  return nodes;
}

json random_tree(Rng& rng, const TableShape& shape, std::size_t max_leaves) {
  const std::size_t depth = 1 + rng.below(shape.max_depth);
  for (;;) {
    json nodes = random_nodes(rng, shape, depth, std::min<std::size_t>(6, max_leaves));
    if (leaves_of(nodes) <= max_leaves) return nodes;
  }
}

std::string random_cell(Rng& rng, const TableShape& shape) {
  const double roll = static_cast<double>(rng.below(1000)) / 1000.0;
  if (roll < shape.text_cell_rate) {
    static const std::vector<std::string> words = {"n/a", "-", "Paris", "yes", "pending"};
    return rng.pick(words);
  }
  const long long v = static_cast<long long>(rng.below(20000)) - 2000;
  switch (rng.below(5)) {
    case 0: {
      std::ostringstream s;
      s << v / 10 << "." << (v < 0 ? -v : v) % 10;
      return v < 0 && v / 10 == 0 ? "-" + s.str() : s.str();
    }
    case 1:
      return std::to_string(rng.below(100)) + "%";
    case 2:
      if (v >= 1000) return std::to_string(v / 1000) + "," + std::to_string(1000 + v % 1000).substr(1);
      return std::to_string(v);
    default:
      return std::to_string(v);
  }
}

void collect(const json& nodes, Path& prefix, std::size_t level, std::vector<Path>& leaves, std::vector<Path>& all,
             std::size_t& depth) {
  for (const auto& node : nodes) {
    prefix.push_back(node["label"].get<std::string>());
    all.push_back(prefix);
    depth = std::max(depth, level);
    if (node.contains("children") && !node["children"].empty()) {
      collect(node["children"], prefix, level + 1, leaves, all, depth);
    } else {
      leaves.push_back(prefix);
    }
    prefix.pop_back();
  }
}

bool ends_with(const Path& path, const Path& suffix) {
  return suffix.size() <= path.size() && std::equal(suffix.rbegin(), suffix.rend(), path.rbegin());
}

std::optional<std::size_t> leaf_position(const Path& query, const std::vector<Path>& leaves,
                                         const std::vector<Path>& nodes) {
  if (std::find(nodes.begin(), nodes.end(), query) != nodes.end()) {
    auto it = std::find(leaves.begin(), leaves.end(), query);
    if (it == leaves.end()) return std::nullopt;
    return static_cast<std::size_t>(it - leaves.begin());
  }
  std::optional<std::size_t> found;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (ends_with(leaves[i], query)) {
      found = i;
      ++hits;
    }
  }
  if (hits != 1) return std::nullopt;
  return found;
}

std::optional<Path> node_match(const Path& query, const std::vector<Path>& nodes) {
  if (std::find(nodes.begin(), nodes.end(), query) != nodes.end()) return query;
  std::optional<Path> found;
  std::size_t hits = 0;
  for (const auto& p : nodes) {
    if (ends_with(p, query)) {
      found = p;
      ++hits;
    }
  }
  if (hits != 1) return std::nullopt;
  return found;
}

std::vector<Region> scan(const RegionMap& map, const std::function<bool(const Region&)>& keep) {
  std::vector<Region> out;
  for (const auto& r : map.regions()) {
    if (keep(r)) out.push_back(r);
  }
  return out;
}

}  // namespace

json random_table_document(Rng& rng, const TableShape& shape, const std::string& table_id) {
  json doc;
  doc["table_id"] = table_id;
  doc["columns"] = random_tree(rng, shape, shape.max_cols);
  doc["rows"] = random_tree(rng, shape, shape.max_rows);
  const std::size_t nr = leaves_of(doc["rows"]);
  const std::size_t nc = leaves_of(doc["columns"]);
  json cells = json::array();
  for (std::size_t i = 0; i < nr; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < nc; ++j) row.push_back(random_cell(rng, shape));
    cells.push_back(row);
  }
  doc["cells"] = cells;
  return doc;
}

TableSpec random_table(Rng& rng, const TableShape& shape, const std::string& table_id) {
  return tableforge::load_spec(random_table_document(rng, shape, table_id));
}

DocPaths doc_paths(const json& document) {
  DocPaths out;
  Path prefix;
  collect(document["columns"], prefix, 1, out.col_leaves, out.col_nodes, out.col_depth);
  collect(document["rows"], prefix, 1, out.row_leaves, out.row_nodes, out.row_depth);
  return out;
}

std::optional<std::vector<Region>> brute_force_resolve(const SemanticTag& tag, const DocPaths& paths,
                                                      const RegionMap& map) {
  auto trimmed = [](const Path& p) {
    Path out;
    for (const auto& s : p) out.push_back(tableforge::trim(s));
    return out;
  };
  auto by_col = [](const Region& a, const Region& b) { return *a.grid.col < *b.grid.col; };
  auto by_row = [](const Region& a, const Region& b) { return *a.grid.row < *b.grid.row; };

  switch (tag.kind) {
    case TagKind::kCellIntersect: {
      auto c = leaf_position(trimmed(*tag.col_path), paths.col_leaves, paths.col_nodes);
      auto r = leaf_position(trimmed(*tag.row_path), paths.row_leaves, paths.row_nodes);
      if (!c || !r) return std::nullopt;
      return scan(map, [&](const Region& x) {
        return x.label == LabelType::kCell && x.grid.row == *r && x.grid.col == *c;
      });
    }
    case TagKind::kRowExtract: {
      auto r = leaf_position(trimmed(*tag.row_path), paths.row_leaves, paths.row_nodes);
      if (!r) return std::nullopt;
      const Path& full = paths.row_leaves[*r];
      auto out = scan(map, [&](const Region& x) { return x.label == LabelType::kRowHead && x.grid.path == full; });
      auto cells = scan(map, [&](const Region& x) { return x.label == LabelType::kCell && x.grid.row == *r; });
      std::sort(cells.begin(), cells.end(), by_col);
      out.insert(out.end(), cells.begin(), cells.end());
      return out;
    }
    case TagKind::kColExtract: {
      auto c = leaf_position(trimmed(*tag.col_path), paths.col_leaves, paths.col_nodes);
      if (!c) return std::nullopt;
      const Path& full = paths.col_leaves[*c];
      auto out = scan(map, [&](const Region& x) { return x.label == LabelType::kColHead && x.grid.path == full; });
      auto cells = scan(map, [&](const Region& x) { return x.label == LabelType::kCell && x.grid.col == *c; });
      std::sort(cells.begin(), cells.end(), by_row);
      out.insert(out.end(), cells.begin(), cells.end());
      return out;
    }
    case TagKind::kColHeadRef: {
      auto p = node_match(trimmed(*tag.col_path), paths.col_nodes);
      if (!p) return std::nullopt;
      return scan(map, [&](const Region& x) { return x.label == LabelType::kColHead && x.grid.path == *p; });
    }
    case TagKind::kRowHeadRef: {
      auto p = node_match(trimmed(*tag.row_path), paths.row_nodes);
      if (!p) return std::nullopt;
      return scan(map, [&](const Region& x) { return x.label == LabelType::kRowHead && x.grid.path == *p; });
    }
  }
  return std::nullopt;
}

tableforge::SemanticTag tag_from_paths(Rng& rng, const DocPaths& p) {
  auto pick_path = [&](const std::vector<Path>& from) {
    Path path = rng.pick(from);
    if (rng.below(3) == 0 && path.size() > 1) path.erase(path.begin(), path.begin() + 1 + rng.below(path.size() - 1));
    if (rng.below(25) == 0) path.back() = "missing";
    return path;
  };
  tableforge::SemanticTag t;
  t.kind = static_cast<tableforge::TagKind>(rng.below(5));
  switch (t.kind) {
    case tableforge::TagKind::kCellIntersect:
      t.col_path = pick_path(p.col_leaves);
      t.row_path = pick_path(p.row_leaves);
      break;
    case tableforge::TagKind::kColExtract:
      t.col_path = pick_path(p.col_leaves);
      break;
    case tableforge::TagKind::kRowExtract:
      t.row_path = pick_path(p.row_leaves);
      break;
    case tableforge::TagKind::kColHeadRef:
      t.col_path = pick_path(p.col_nodes);
      break;
    case tableforge::TagKind::kRowHeadRef:
      t.row_path = pick_path(p.row_nodes);
      break;
  }
  return t;
}

double pixel_iou(const BBox& a, const BBox& b) {
  const int x0 = std::min(a.x1, b.x1), x1 = std::max(a.x2, b.x2);
  const int y0 = std::min(a.y1, b.y1), y1 = std::max(a.y2, b.y2);
  long long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

int scan_normalize(int v, int dim) {
  // Compare |n * dim - v * 999| across n; on a tie the larger n wins.
  int best = 0;
  long long best_err = std::numeric_limits<long long>::max();
  for (int n = 0; n <= 999; ++n) {
    const long long err = std::llabs(static_cast<long long>(n) * dim - static_cast<long long>(v) * 999);
    if (err <= best_err) {
      best_err = err;
      best = n;
    }
  }
  return best;
}

double brute_force_assignment(const std::vector<std::vector<double>>& m, std::size_t n_gt) {
  const std::size_t n_pred = m.size();
  std::vector<bool> used(n_gt, false);
  std::function<double(std::size_t)> best = [&](std::size_t i) -> double {
    if (i == n_pred) return 0.0;
    double top = best(i + 1);  // leave pred i unmatched
    for (std::size_t j = 0; j < n_gt; ++j) {
      if (used[j] || m[i][j] <= 0.0) continue;
      used[j] = true;
      top = std::max(top, m[i][j] + best(i + 1));
      used[j] = false;
    }
    return top;
  };
  return best(0);
}

std::filesystem::path temp_dir(const std::string& name) {
  static std::size_t counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("tableforge-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path data_dir() { return TABLEFORGE_TEST_DATA; }

}  // namespace testkit

namespace testkit {

std::vector<std::string> geometry_violations(const json& document, const RegionMap& map,
                                             const LayoutMetrics& m) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& what) { out.push_back(what); };
  const DocPaths paths = doc_paths(document);
  const int n_rows = static_cast<int>(paths.row_leaves.size());
  const int n_cols = static_cast<int>(paths.col_leaves.size());
  const int left = m.stub_w * static_cast<int>(paths.row_depth);
  const int top = m.head_h * static_cast<int>(paths.col_depth);

  if (map.image_w() != left + m.cell_w * n_cols) fail("image_w");
  if (map.image_h() != top + m.cell_h * n_rows) fail("image_h");

  std::size_t n_cells = 0, n_colhead = 0, n_rowhead = 0, n_column = 0, n_row = 0;
  std::vector<BBox> cells;
  for (const auto& r : map.regions()) {
    if (!r.bbox.valid() || !r.bbox.within(map.image_w(), map.image_h())) fail("containment " + r.id);
    switch (r.label) {
      case LabelType::kCell: {
        ++n_cells;
        cells.push_back(r.bbox);
        const int i = static_cast<int>(*r.grid.row), j = static_cast<int>(*r.grid.col);
        const BBox expect{left + j * m.cell_w, top + i * m.cell_h, left + (j + 1) * m.cell_w, top + (i + 1) * m.cell_h};
        if (r.bbox != expect) fail("cell position " + r.id);
        break;
      }
      case LabelType::kColHead: ++n_colhead; break;
      case LabelType::kRowHead: ++n_rowhead; break;
      case LabelType::kColumn: ++n_column; break;
      case LabelType::kRow: ++n_row; break;
    }
  }
  if (n_cells != static_cast<std::size_t>(n_rows * n_cols)) fail("cell count");
  if (n_colhead != paths.col_nodes.size()) fail("colhead count");
  if (n_rowhead != paths.row_nodes.size()) fail("rowhead count");
  if (n_column != paths.col_leaves.size()) fail("column count");
  if (n_row != paths.row_leaves.size()) fail("row count");

  // Tiling: areas add up to the data area and no two interiors overlap.
  long long area = 0;
  for (const auto& c : cells) area += c.area();
  if (area != static_cast<long long>(map.image_w() - left) * (map.image_h() - top)) fail("tiling area");
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const BBox& p = cells[a];
      const BBox& q = cells[b];
      if (std::max(p.x1, q.x1) < std::min(p.x2, q.x2) && std::max(p.y1, q.y1) < std::min(p.y2, q.y2)) {
        fail("overlap");
      }
    }
  }

  // Header spans: a header covers exactly the leaves below it.
  auto span_check = [&](LabelType label, const std::vector<Path>& nodes, const std::vector<Path>& leaves, bool cols) {
    for (const auto& node : nodes) {
      int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        if (leaves[k].size() < node.size() || !std::equal(node.begin(), node.end(), leaves[k].begin())) continue;
        const int a = cols ? left + static_cast<int>(k) * m.cell_w : top + static_cast<int>(k) * m.cell_h;
        lo = std::min(lo, a);
        hi = std::max(hi, a + (cols ? m.cell_w : m.cell_h));
      }
      const Region* found = nullptr;
      for (const auto& r : map.regions()) {
        if (r.label == label && r.grid.path == node) found = &r;
      }
      if (found == nullptr) {
        fail("missing header " + tableforge::join_path(node));
        continue;
      }
      const int got_lo = cols ? found->bbox.x1 : found->bbox.y1;
      const int got_hi = cols ? found->bbox.x2 : found->bbox.y2;
      if (got_lo != lo || got_hi != hi) fail("header span " + tableforge::join_path(node));
    }
  };
  span_check(LabelType::kColHead, paths.col_nodes, paths.col_leaves, true);
  span_check(LabelType::kRowHead, paths.row_nodes, paths.row_leaves, false);
  return out;
}

}  // namespace testkit

namespace testkit {

namespace {

Path random_path(Rng& rng) {
  Path p(1 + rng.below(3));
  for (auto& seg : p) {
    const std::size_t len = 1 + rng.below(8);
    for (std::size_t i = 0; i < len; ++i) {
      // Bias towards the characters the grammar treats specially.
      static const std::string special = ">@:\" ";
      seg += rng.below(4) == 0 ? special[rng.below(special.size())] : static_cast<char>(32 + rng.below(95));
    }
  }
  return p;
}

}  // namespace

SemanticTag random_tag(Rng& rng) {
  SemanticTag t;
  t.kind = static_cast<TagKind>(rng.below(5));
  switch (t.kind) {
    case TagKind::kCellIntersect:
      t.col_path = random_path(rng);
      t.row_path = random_path(rng);
      break;
    case TagKind::kColExtract:
    case TagKind::kColHeadRef:
      t.col_path = random_path(rng);
      break;
    case TagKind::kRowExtract:
    case TagKind::kRowHeadRef:
      t.row_path = random_path(rng);
      break;
  }
  return t;
}

GeneratedGrounding random_grounding_output(Rng& rng) {
  static const std::vector<std::string> good = {"column", "row", "cell", "colhead", "rowhead"};
  static const std::vector<std::string> bad = {"blob", "Cell", "header", "", "cells", "region"};
  GeneratedGrounding g;
  if (rng.below(2) == 0) {
    g.reason = "Step " + std::to_string(rng.below(100)) + ": the value sits under the first header.";
    g.text = g.reason + "\n";
  }
  auto ws = [&] { return std::string(rng.below(3), ' '); };
  const std::size_t n = rng.below(6);
  for (std::size_t i = 0; i < n; ++i) {
    int v[4];
    for (int& x : v) x = static_cast<int>(rng.below(1000));
    if (v[0] > v[2]) std::swap(v[0], v[2]);
    if (v[1] > v[3]) std::swap(v[1], v[3]);
    const bool valid_label = rng.below(4) != 0;
    const std::string label = valid_label ? rng.pick(good) : rng.pick(bad);
    bool out_of_range = false;
    if (rng.below(10) == 0) {
      v[2] = 1000 + static_cast<int>(rng.below(50));
      out_of_range = true;
    }
    g.text += ws() + "[" + label + "]" + ws() + "(" + ws() + std::to_string(v[0]) + ws() + "," + ws() +
              std::to_string(v[1]) + ws() + ")" + ws() + "(" + std::to_string(v[2]) + "," + ws() +
              std::to_string(v[3]) + ")" + ws() + "\n";
    if (valid_label && !out_of_range) {
      g.valid.push_back({*tableforge::parse_label_type(label), {v[0], v[1], v[2], v[3]}});
    } else {
      ++g.invalid;
    }
  }
  return g;
}

}  // namespace testkit

namespace testkit {

const std::vector<PublishedRow>& published_rows() {
  using tableforge::Category;
  static const std::vector<PublishedRow> rows = {
      {Category::kRetrieval, 2184, 310, 433},      {Category::kListing, 137, 372, 544},
      {Category::kStructure, 508, 412, 261},       {Category::kComparison, 607, 333, 458},
      {Category::kArithmetic, 441, 452, 454},      {Category::kRanking, 391, 466, 478},
      {Category::kCounting, 402, 807, 479},        {Category::kCondFiltering, 63, 763, 422},
      {Category::kVerification, 475, 657, 445},    {Category::kCompArithmetic, 470, 712, 442},
      {Category::kMultiHop, 454, 1711, 451},       {Category::kTemporal, 376, 1002, 437},
      {Category::kCrossHierAgg, 291, 829, 404},
  };
  return rows;
}

std::vector<tableforge::CategoryRow> to_category_rows(const std::vector<PublishedRow>& rows) {
  std::vector<tableforge::CategoryRow> out;
  for (const auto& r : rows) {
    auto hundredths = [](long long v) {
      return *tableforge::Decimal::parse(std::to_string(v / 100) + "." + std::to_string(100 + v % 100).substr(1));
    };
    out.push_back({r.category, r.count, hundredths(r.bbox_x100), hundredths(r.steps_x100)});
  }
  return out;
}

}  // namespace testkit

#include "tableforge/verifier.hpp"

namespace testkit {

bool corrupt(tableforge::TrajectoryInstance& inst, const TableAsset& asset, const LayoutMetrics& m, Corruption kind,
             Rng& rng) {
  using tableforge::Decimal;
  switch (kind) {
    case Corruption::kBoxShift: {
      auto& e = inst.evidence[rng.below(inst.evidence.size())];
      const int limit = std::min({m.cell_w, m.cell_h, m.stub_w, m.head_h}) - 1;
      const int delta = (1 + static_cast<int>(rng.below(static_cast<std::size_t>(limit)))) * (rng.below(2) ? 1 : -1);
      int* coords[4] = {&e.bbox_px.x1, &e.bbox_px.y1, &e.bbox_px.x2, &e.bbox_px.y2};
      *coords[rng.below(4)] += delta;
      if (e.bbox_px.valid() && e.bbox_px.within(asset.map.image_w(), asset.map.image_h())) {
        e.bbox_norm = tableforge::normalize_bbox(e.bbox_px, asset.map.image_w(), asset.map.image_h());
      }
      return true;
    }
    case Corruption::kNumberSwap: {
      std::vector<std::pair<std::size_t, tableforge::NumericLiteral>> sites;
      for (std::size_t s = 0; s < inst.steps.size(); ++s) {
        for (const auto& lit : tableforge::numeric_literals(inst.steps[s].text)) sites.emplace_back(s, lit);
      }
      if (sites.empty()) return false;
      // Values that would still be legitimate somewhere in the instance.
      std::vector<Decimal> taken;
      for (const auto& row : asset.spec.cells) {
        for (const auto& c : row) {
          if (c.numeric) taken.push_back(*c.numeric);
        }
      }
      const auto trace =
          tableforge::compute_answer(inst.category, tableforge::selection_from_evidence(inst, asset.spec, asset.map));
      taken.insert(taken.end(), trace.derived.begin(), trace.derived.end());
      Decimal replacement;
      do {
        replacement = Decimal(static_cast<long long>(rng.below(900000)) + 100000);
      } while (std::find(taken.begin(), taken.end(), replacement) != taken.end());
      const auto& [step, lit] = sites[rng.below(sites.size())];
      inst.steps[step].text.replace(lit.offset, lit.text.size(), replacement.to_string());
      return true;
    }
    case Corruption::kAnswerTamper: {
      const auto value = Decimal::parse(inst.answer);
      inst.answer = value ? (*value + Decimal(1 + static_cast<long long>(rng.below(9)))).to_string()
                          : inst.answer + " (revised)";
      return true;
    }
  }
  return false;
}

}  // namespace testkit
