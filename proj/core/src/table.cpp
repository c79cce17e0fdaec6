#include "tableforge/table.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "tableforge/error.hpp"

namespace tableforge {
namespace {

using nlohmann::json;

std::size_t finish_node(HeaderNode& node, const std::string& where) {
  node.label = trim(node.label);
  if (node.label.empty()) throw Error(ErrorCode::kSchemaError, "empty header label under " + where);
  std::set<std::string> seen;
  std::size_t span = 0;
  std::size_t depth = 0;
  for (auto& child : node.children) {
    child.label = trim(child.label);
    if (!seen.insert(child.label).second) {
      throw Error(ErrorCode::kDuplicateSibling,
                  "duplicate label '" + child.label + "' under '" + node.label + "'");
    }
    depth = std::max(depth, finish_node(child, where + ">" + node.label));
    span += child.leaf_span;
  }
  node.leaf_span = node.children.empty() ? 1 : span;
  return depth + 1;
}

void collect_leaves(const HeaderNode& node, Path& prefix, std::vector<Path>& out) {
  prefix.push_back(node.label);
  if (node.is_leaf()) {
    out.push_back(prefix);
  } else {
    for (const auto& child : node.children) collect_leaves(child, prefix, out);
  }
  prefix.pop_back();
}

void collect_nodes(const HeaderNode& node, Path& prefix, std::vector<Path>& out) {
  prefix.push_back(node.label);
  out.push_back(prefix);
  for (const auto& child : node.children) collect_nodes(child, prefix, out);
  prefix.pop_back();
}

HeaderNode parse_node(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, where + ": header node must be an object");
  auto label = j.find("label");
  if (label == j.end() || !label->is_string()) {
    throw Error(ErrorCode::kSchemaError, where + ": header node needs a string \"label\"");
  }
  HeaderNode node;
  node.label = label->get<std::string>();
  if (auto children = j.find("children"); children != j.end() && !children->is_null()) {
    if (!children->is_array()) throw Error(ErrorCode::kSchemaError, where + ": \"children\" must be an array");
    for (std::size_t i = 0; i < children->size(); ++i) {
      node.children.push_back(parse_node((*children)[i], where + ".children[" + std::to_string(i) + "]"));
    }
  }
  return node;
}

HeaderTree parse_tree(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array() || it->empty()) {
    throw Error(ErrorCode::kSchemaError, std::string("\"") + key + "\" must be a non-empty array");
  }
  std::vector<HeaderNode> roots;
  for (std::size_t i = 0; i < it->size(); ++i) {
    roots.push_back(parse_node((*it)[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return make_header_tree(std::move(roots));
}

json node_json(const HeaderNode& node) {
  json j = {{"label", node.label}};
  if (!node.children.empty()) {
    json kids = json::array();
    for (const auto& c : node.children) kids.push_back(node_json(c));
    j["children"] = std::move(kids);
  }
  return j;
}

}  // namespace

std::string join_path(const Path& path, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += sep;
    out += path[i];
  }
  return out;
}

std::string trim(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::size_t HeaderTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& r : roots) n += r.leaf_span;
  return n;
}

HeaderTree make_header_tree(std::vector<HeaderNode> roots) {
  if (roots.empty()) throw Error(ErrorCode::kSchemaError, "header tree has no roots");
  HeaderTree tree;
  std::set<std::string> seen;
  for (auto& root : roots) {
    root.label = trim(root.label);
    if (!seen.insert(root.label).second) {
      throw Error(ErrorCode::kDuplicateSibling, "duplicate root label '" + root.label + "'");
    }
    tree.depth = std::max(tree.depth, finish_node(root, "<root>"));
  }
  tree.roots = std::move(roots);
  return tree;
}

std::vector<Path> leaf_paths(const HeaderTree& tree) {
  std::vector<Path> out;
  Path prefix;
  for (const auto& root : tree.roots) collect_leaves(root, prefix, out);
  return out;
}

std::vector<Path> node_paths(const HeaderTree& tree) {
  std::vector<Path> out;
  Path prefix;
  for (const auto& root : tree.roots) collect_nodes(root, prefix, out);
  return out;
}

const HeaderNode* find_node(const HeaderTree& tree, const Path& path) {
  const std::vector<HeaderNode>* level = &tree.roots;
  const HeaderNode* node = nullptr;
  for (const auto& label : path) {
    auto it = std::find_if(level->begin(), level->end(),
                           [&](const HeaderNode& n) { return n.label == label; });
    if (it == level->end()) return nullptr;
    node = &*it;
    level = &node->children;
  }
  return node;
}

CellValue CellValue::from_raw(std::string raw) {
  CellValue v;
  v.numeric = Decimal::parse(raw);
  v.raw = std::move(raw);
  return v;
}

GridIndex::GridIndex(const HeaderTree& rows, const HeaderTree& cols)
    : row_paths_(leaf_paths(rows)), col_paths_(leaf_paths(cols)) {
  for (std::size_t i = 0; i < row_paths_.size(); ++i) row_index_.emplace(row_paths_[i], i);
  for (std::size_t j = 0; j < col_paths_.size(); ++j) col_index_.emplace(col_paths_[j], j);
}

std::optional<std::size_t> GridIndex::row(const Path& path) const {
  auto it = row_index_.find(path);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> GridIndex::col(const Path& path) const {
  auto it = col_index_.find(path);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

TableSpec load_spec(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kSchemaError, "table spec must be a JSON object");
  TableSpec spec;
  auto id = doc.find("table_id");
  if (id == doc.end() || !id->is_string() || trim(id->get<std::string>()).empty()) {
    throw Error(ErrorCode::kSchemaError, "\"table_id\" must be a non-empty string");
  }
  spec.table_id = id->get<std::string>();
  if (auto title = doc.find("title"); title != doc.end() && !title->is_null()) {
    if (!title->is_string()) throw Error(ErrorCode::kSchemaError, "\"title\" must be a string");
    if (!title->get<std::string>().empty()) spec.title = title->get<std::string>();
  }
  spec.col_tree = parse_tree(doc, "columns");
  spec.row_tree = parse_tree(doc, "rows");

  auto cells = doc.find("cells");
  if (cells == doc.end() || !cells->is_array()) {
    throw Error(ErrorCode::kSchemaError, "\"cells\" must be an array of rows");
  }
  const std::size_t n_rows = spec.row_tree.leaf_count();
  const std::size_t n_cols = spec.col_tree.leaf_count();
  if (cells->size() != n_rows) {
    throw Error(ErrorCode::kDimensionMismatch, "grid has " + std::to_string(cells->size()) +
                                                   " rows but the row tree has " +
                                                   std::to_string(n_rows) + " leaves");
  }
  for (std::size_t i = 0; i < cells->size(); ++i) {
    const auto& row = (*cells)[i];
    if (!row.is_array()) throw Error(ErrorCode::kSchemaError, "cells[" + std::to_string(i) + "] must be an array");
    if (row.size() != n_cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cells[" + std::to_string(i) + "] has " + std::to_string(row.size()) +
                      " columns but the column tree has " + std::to_string(n_cols) + " leaves");
    }
    std::vector<CellValue> values;
    values.reserve(n_cols);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j].is_string()) {
        values.push_back(CellValue::from_raw(row[j].get<std::string>()));
      } else {
        throw Error(ErrorCode::kSchemaError,
                    "cells[" + std::to_string(i) + "][" + std::to_string(j) + "] must be a string");
      }
    }
    spec.cells.push_back(std::move(values));
  }
  spec.index = GridIndex(spec.row_tree, spec.col_tree);
  return spec;
}

TableSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path + ": " + e.what());
  }
  return load_spec(doc);
}

json to_json(const TableSpec& spec) {
  json cols = json::array();
  for (const auto& n : spec.col_tree.roots) cols.push_back(node_json(n));
  json rows = json::array();
  for (const auto& n : spec.row_tree.roots) rows.push_back(node_json(n));
  json cells = json::array();
  for (const auto& row : spec.cells) {
    json r = json::array();
    for (const auto& c : row) r.push_back(c.raw);
    cells.push_back(std::move(r));
  }
  json doc = {{"table_id", spec.table_id}, {"columns", cols}, {"rows", rows}, {"cells", cells}};
  if (spec.title) doc["title"] = *spec.title;
  return doc;
}

const CellValue& grid_lookup(const TableSpec& spec, const Path& row_path, const Path& col_path) {
  auto check = [](const HeaderTree& tree, const Path& path, const char* axis) {
    const HeaderNode* node = find_node(tree, path);
    if (node == nullptr) {
      throw Error(ErrorCode::kPathNotFound, std::string(axis) + " path '" + join_path(path) + "' not found");
    }
    if (!node->is_leaf()) {
      throw Error(ErrorCode::kPathNotLeaf, std::string(axis) + " path '" + join_path(path) + "' is not a leaf");
    }
  };
  check(spec.row_tree, row_path, "row");
  check(spec.col_tree, col_path, "column");
  return spec.cells[*spec.index.row(row_path)][*spec.index.col(col_path)];
}

}  // namespace tableforge
