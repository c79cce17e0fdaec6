#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/decimal.hpp"

namespace tableforge {

// Root-to-node label sequence. Labels are stored trimmed.
using Path = std::vector<std::string>;

// Display form "A>B>C" (no quoting; see format_tag for the quoted form).
std::string join_path(const Path& path, std::string_view sep = ">");

struct HeaderNode {
  std::string label;
  std::vector<HeaderNode> children;
  std::size_t leaf_span = 1;

  bool is_leaf() const { return children.empty(); }
  friend bool operator==(const HeaderNode&, const HeaderNode&) = default;
};

struct HeaderTree {
  std::vector<HeaderNode> roots;
  std::size_t depth = 0;

  std::size_t leaf_count() const;
  friend bool operator==(const HeaderTree&, const HeaderTree&) = default;
};

// Validates labels/sibling uniqueness and fills leaf_span and depth.
// Throws Error{kSchemaError | kDuplicateSibling}.
HeaderTree make_header_tree(std::vector<HeaderNode> roots);

// Left-to-right leaf paths; order matches the grid axis.
std::vector<Path> leaf_paths(const HeaderTree& tree);

// Every node path in pre-order (parents before children).
std::vector<Path> node_paths(const HeaderTree& tree);

// Node addressed by an exact root path, or nullptr.
const HeaderNode* find_node(const HeaderTree& tree, const Path& path);

struct CellValue {
  std::string raw;
  std::optional<Decimal> numeric;

  static CellValue from_raw(std::string raw);
  friend bool operator==(const CellValue&, const CellValue&) = default;
};

class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(const HeaderTree& rows, const HeaderTree& cols);

  std::optional<std::size_t> row(const Path& path) const;
  std::optional<std::size_t> col(const Path& path) const;
  const std::vector<Path>& row_paths() const { return row_paths_; }
  const std::vector<Path>& col_paths() const { return col_paths_; }

 private:
  std::vector<Path> row_paths_;
  std::vector<Path> col_paths_;
  std::map<Path, std::size_t> row_index_;
  std::map<Path, std::size_t> col_index_;
};

struct TableSpec {
  std::string table_id;
  std::optional<std::string> title;
  HeaderTree col_tree;
  HeaderTree row_tree;
  std::vector<std::vector<CellValue>> cells;  // row-major, rows x cols
  GridIndex index;

  std::size_t n_rows() const { return cells.size(); }
  std::size_t n_cols() const { return cells.empty() ? 0 : cells.front().size(); }

  friend bool operator==(const TableSpec& a, const TableSpec& b) {
    return a.table_id == b.table_id && a.title == b.title && a.col_tree == b.col_tree &&
           a.row_tree == b.row_tree && a.cells == b.cells;
  }
};

// Validates a table-spec document. Throws Error{kSchemaError |
// kDimensionMismatch | kDuplicateSibling}.
TableSpec load_spec(const nlohmann::json& document);
TableSpec load_spec_file(const std::string& path);
nlohmann::json to_json(const TableSpec& spec);

// Throws Error{kPathNotFound | kPathNotLeaf}.
const CellValue& grid_lookup(const TableSpec& spec, const Path& row_path, const Path& col_path);

std::string trim(std::string_view text);

}  // namespace tableforge
