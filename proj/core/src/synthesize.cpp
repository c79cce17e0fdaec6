#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tableforge/error.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/trajectory.hpp"
#include "trajectory_internal.hpp"

namespace tableforge {
namespace {

using Cell = std::pair<std::size_t, std::size_t>;  // (row, col)

// A full data row or column. Members are the cells along it, in reading order.
struct Line {
  Axis axis = Axis::kCol;  // kCol: a column whose members are rows
  Path path;
  std::vector<Cell> cells;
};

Axis member_axis(const Line& l) { return l.axis == Axis::kCol ? Axis::kRow : Axis::kCol; }

std::string words(const Path& p) { return join_path(p, " "); }
std::string display(const Path& p) { return join_path(p, " > "); }

std::string ordinal(int k) {
  const int tail = k % 100;
  const char* suffix = "th";
  if (tail < 11 || tail > 13) {
    if (k % 10 == 1) suffix = "st";
    if (k % 10 == 2) suffix = "nd";
    if (k % 10 == 3) suffix = "rd";
  }
  return std::to_string(k) + suffix;
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Years 1000-2999, or YYYY-MM / YYYY-MM-DD.
bool is_date_label(std::string_view s) {
  if (s.size() < 4 || !is_digits(s.substr(0, 4)) || (s[0] != '1' && s[0] != '2')) return false;
  if (s.size() == 4) return true;
  if (s.size() != 7 && s.size() != 10) return false;
  if (s[4] != '-' || !is_digits(s.substr(5, 2))) return false;
  if (s.size() == 10 && (s[7] != '-' || !is_digits(s.substr(8, 2)))) return false;
  return true;
}

bool axis_is_temporal(const std::vector<Path>& paths) {
  return !paths.empty() &&
         std::all_of(paths.begin(), paths.end(), [](const Path& p) { return is_date_label(p.back()); });
}

bool has_prefix(const Path& p, const Path& prefix) {
  return p.size() > prefix.size() && std::equal(prefix.begin(), prefix.end(), p.begin());
}

std::vector<std::size_t> leaves_under(const std::vector<Path>& leaves, const Path& node) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    if (has_prefix(leaves[k], node)) out.push_back(k);
  }
  return out;
}

std::vector<Path> internal_nodes(const HeaderTree& tree) {
  std::vector<Path> out;
  for (auto& p : node_paths(tree)) {
    if (!find_node(tree, p)->is_leaf()) out.push_back(std::move(p));
  }
  return out;
}

bool related(const Path& a, const Path& b) { return a == b || has_prefix(a, b) || has_prefix(b, a); }

std::string sum_expr(const std::vector<Decimal>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += " + ";
    out += x.to_string();
  }
  return out;
}

Decimal total(const std::vector<Decimal>& xs) {
  Decimal s;
  for (const auto& x : xs) s = s + x;
  return s;
}

class Builder {
 public:
  Builder(const TableAsset& asset, Category category, std::uint64_t seed) : asset_(asset), spec_(asset.spec) {
    inst_.id = spec_.table_id + "-" + std::string(slug(category)) + "-" + std::to_string(seed);
    inst_.table_id = spec_.table_id;
    inst_.image = asset.image;
    inst_.category = category;
  }

  const TableSpec& spec() const { return spec_; }
  const Path& row_path(std::size_t i) const { return spec_.index.row_paths()[i]; }
  const Path& col_path(std::size_t j) const { return spec_.index.col_paths()[j]; }
  const CellValue& value(Cell c) const { return spec_.cells[c.first][c.second]; }
  Decimal number(Cell c) const { return *value(c).numeric; }
  bool numeric(Cell c) const { return value(c).numeric.has_value(); }

  const Path& member_path(const Line& l, Cell c) const {
    return l.axis == Axis::kCol ? row_path(c.first) : col_path(c.second);
  }

  std::vector<Line> lines() const {
    std::vector<Line> out;
    for (std::size_t j = 0; j < spec_.n_cols(); ++j) {
      Line l{Axis::kCol, col_path(j), {}};
      for (std::size_t i = 0; i < spec_.n_rows(); ++i) l.cells.emplace_back(i, j);
      out.push_back(std::move(l));
    }
    for (std::size_t i = 0; i < spec_.n_rows(); ++i) {
      Line l{Axis::kRow, row_path(i), {}};
      for (std::size_t j = 0; j < spec_.n_cols(); ++j) l.cells.emplace_back(i, j);
      out.push_back(std::move(l));
    }
    return out;
  }

  std::vector<Cell> numeric_members(const Line& l) const {
    std::vector<Cell> out;
    for (const auto& c : l.cells) {
      if (numeric(c)) out.push_back(c);
    }
    return out;
  }

  std::vector<std::size_t> add(const SemanticTag& tag) {
    const SpatialEvidence ev = resolve_tag(tag, spec_, asset_.map);
    const std::string text = format_tag(tag);
    inst_.tags.push_back(text);
    std::vector<std::size_t> idx;
    for (const auto& r : ev.regions) idx.push_back(intern(r, text));
    return idx;
  }

  std::size_t cell(Cell c) {
    return add({TagKind::kCellIntersect, col_path(c.second), row_path(c.first)}).front();
  }
  std::size_t colhead(const Path& p) { return add({TagKind::kColHeadRef, p, std::nullopt}).front(); }
  std::size_t rowhead(const Path& p) { return add({TagKind::kRowHeadRef, std::nullopt, p}).front(); }

  // Header of the line itself.
  std::size_t line_header(const Line& l) { return l.axis == Axis::kCol ? colhead(l.path) : rowhead(l.path); }
  // Header naming one member of the line.
  std::size_t member_header(const Line& l, Cell c) {
    return l.axis == Axis::kCol ? rowhead(row_path(c.first)) : colhead(col_path(c.second));
  }
  // Extract tag: header box first, then every cell.
  std::vector<std::size_t> whole_line(const Line& l) {
    if (l.axis == Axis::kCol) return add({TagKind::kColExtract, l.path, std::nullopt});
    return add({TagKind::kRowExtract, std::nullopt, l.path});
  }

  // Evidence index of a cell already added by some tag.
  std::size_t box(Cell c) const { return seen_.at({LabelType::kCell, asset_.map.cell(c.first, c.second).bbox}); }
  std::vector<std::size_t> boxes(const std::vector<Cell>& cs) const {
    std::vector<std::size_t> out;
    for (const auto& c : cs) out.push_back(box(c));
    return out;
  }

  void step(std::string text, std::vector<std::size_t> cited) {
    std::sort(cited.begin(), cited.end());
    cited.erase(std::unique(cited.begin(), cited.end()), cited.end());
    inst_.steps.push_back({inst_.steps.size(), std::move(text), std::move(cited)});
  }

  std::string values_text(const std::vector<Cell>& cs) const {
    std::string out;
    for (const auto& c : cs) {
      if (!out.empty()) out += ", ";
      out += value_text(value(c));
    }
    return out;
  }

  std::vector<Decimal> numbers(const std::vector<Cell>& cs) const {
    std::vector<Decimal> out;
    for (const auto& c : cs) out.push_back(number(c));
    return out;
  }

  TrajectoryInstance finish(std::string question, AnswerProgram program) {
    inst_.question = std::move(question);
    inst_.program = std::move(program);
    const Selection sel = selection_from_evidence(inst_, spec_, asset_.map);
    inst_.answer = compute_answer(inst_.category, sel).answer;
    validate_instance(inst_);
    return std::move(inst_);
  }

 private:
  std::size_t intern(const Region& r, const std::string& tag) {
    const auto key = std::make_pair(r.label, r.bbox);
    if (auto it = seen_.find(key); it != seen_.end()) return it->second;
    EvidenceEntry e;
    e.tag = tag;
    e.label = r.label;
    e.bbox_px = r.bbox;
    e.bbox_norm = normalize_bbox(r.bbox, asset_.map.image_w(), asset_.map.image_h());
    inst_.evidence.push_back(e);
    seen_.emplace(key, inst_.evidence.size() - 1);
    return inst_.evidence.size() - 1;
  }

  const TableAsset& asset_;
  const TableSpec& spec_;
  TrajectoryInstance inst_;
  std::map<std::pair<LabelType, BBox>, std::size_t> seen_;
};

[[noreturn]] void inapplicable(Category c, const std::string& why) {
  throw Error(ErrorCode::kCategoryInapplicable, std::string(to_string(c)) + ": " + why);
}

template <class T>
const T& choose(Rng& rng, const std::vector<T>& options, Category c, const char* why) {
  if (options.empty()) inapplicable(c, why);
  return rng.pick(options);
}

std::string member_noun(const Line& l) { return l.axis == Axis::kCol ? "row" : "column"; }
std::string line_noun(const Line& l) { return l.axis == Axis::kCol ? "column" : "row"; }

AnswerProgram program_of(OpKind op, std::vector<std::vector<std::size_t>> groups, Axis axis) {
  AnswerProgram p;
  p.op = op;
  p.groups = std::move(groups);
  p.label_axis = axis;
  return p;
}

TrajectoryInstance retrieval(Builder& b, Rng& rng, Category c) {
  std::vector<Cell> options;
  for (std::size_t i = 0; i < b.spec().n_rows(); ++i) {
    for (std::size_t j = 0; j < b.spec().n_cols(); ++j) {
      if (!trim(b.value({i, j}).raw).empty()) options.emplace_back(i, j);
    }
  }
  const Cell cell = choose(rng, options, c, "no non-empty cell");
  const Path& row = b.row_path(cell.first);
  const Path& col = b.col_path(cell.second);
  const auto rh = b.rowhead(row);
  const auto ch = b.colhead(col);
  const auto cb = b.cell(cell);
  b.step("Locate the row " + quoted(display(row)) + ".", {rh});
  b.step("Locate the column " + quoted(display(col)) + ".", {ch});
  b.step("Read the intersecting cell: " + value_text(b.value(cell)) + ".", {cb});
  return b.finish("What is the " + words(col) + " value for " + words(row) + "?",
                  program_of(OpKind::kLookup, {{cb}}, Axis::kRow));
}

TrajectoryInstance listing(Builder& b, Rng& rng, Category c) {
  std::vector<Line> options;
  for (auto& l : b.lines()) {
    const bool filled = std::all_of(l.cells.begin(), l.cells.end(),
                                    [&](Cell x) { return !trim(b.value(x).raw).empty(); });
    if (l.cells.size() >= 2 && filled) options.push_back(std::move(l));
  }
  const Line l = choose(rng, options, c, "no fully populated line with two or more cells");
  const auto ev = b.whole_line(l);
  const std::vector<std::size_t> cells(ev.begin() + 1, ev.end());
  const std::string noun = line_noun(l);
  b.step("Locate the " + noun + " " + quoted(display(l.path)) + ".", {ev.front()});
  b.step(std::string("Scan its cells ") + (l.axis == Axis::kCol ? "from top to bottom." : "from left to right."),
         cells);
  b.step("The values are " + b.values_text(l.cells) + ".", cells);
  return b.finish("List the " + words(l.path) + " values " +
                      (l.axis == Axis::kCol ? "from top to bottom." : "from left to right."),
                  program_of(OpKind::kList, {cells}, member_axis(l)));
}

TrajectoryInstance structure(Builder& b, Rng& rng, Category c) {
  struct Option {
    bool column;
    Path node;
  };
  std::vector<Option> options;
  for (auto& p : internal_nodes(b.spec().col_tree)) options.push_back({true, std::move(p)});
  for (auto& p : internal_nodes(b.spec().row_tree)) options.push_back({false, std::move(p)});
  const Option o = choose(rng, options, c, "no hierarchical header");
  const HeaderTree& tree = o.column ? b.spec().col_tree : b.spec().row_tree;
  const std::size_t node = o.column ? b.colhead(o.node) : b.rowhead(o.node);
  std::vector<std::size_t> children;
  for (const auto& child : find_node(tree, o.node)->children) {
    Path p = o.node;
    p.push_back(child.label);
    children.push_back(o.column ? b.colhead(p) : b.rowhead(p));
  }
  const std::string kind = o.column ? "column" : "row";
  b.step("Locate the " + kind + " header " + quoted(display(o.node)) + ".", {node});
  b.step("Inspect the sub-headers directly beneath it.", children);
  b.step("Count them: " + std::to_string(children.size()) + ".", children);
  return b.finish("How many sub-" + kind + "s are grouped directly under " + words(o.node) + "?",
                  program_of(OpKind::kCount, {children}, Axis::kCol));
}

struct Pair {
  Line line;
  Cell a;
  Cell b;
};

std::vector<Pair> numeric_pairs(const Builder& b, bool distinct_values) {
  std::vector<Pair> out;
  for (const auto& l : b.lines()) {
    const auto members = b.numeric_members(l);
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = 0; y < members.size(); ++y) {
        if (x == y) continue;
        if (distinct_values && b.number(members[x]) == b.number(members[y])) continue;
        out.push_back({l, members[x], members[y]});
      }
    }
  }
  return out;
}

TrajectoryInstance comparison(Builder& b, Rng& rng, Category c) {
  const Pair p = choose(rng, numeric_pairs(b, true), c, "no two distinct numeric cells on a line");
  const auto h = b.line_header(p.line);
  const auto ca = b.cell(p.a);
  const auto cb = b.cell(p.b);
  const Path& la = b.member_path(p.line, p.a);
  const Path& lb = b.member_path(p.line, p.b);
  const Cell winner = b.number(p.a) > b.number(p.b) ? p.a : p.b;
  b.step("Locate the " + line_noun(p.line) + " " + quoted(display(p.line.path)) + ".", {h});
  b.step("Read " + quoted(display(la)) + ": " + value_text(b.value(p.a)) + ".", {ca});
  b.step("Read " + quoted(display(lb)) + ": " + value_text(b.value(p.b)) + ".", {cb});
  b.step("The larger value belongs to " + quoted(display(b.member_path(p.line, winner))) + ".", {ca, cb});
  return b.finish("Which has the higher " + words(p.line.path) + " value, " + words(la) + " or " + words(lb) + "?",
                  program_of(OpKind::kArgMax, {{ca, cb}}, member_axis(p.line)));
}

// A run of cells on one line under a shared internal header.
struct Segment {
  Line line;
  Path node;
  std::vector<Cell> cells;
};

std::vector<Segment> numeric_segments(const Builder& b) {
  std::vector<Segment> out;
  const auto& cols = b.spec().index.col_paths();
  const auto& rows = b.spec().index.row_paths();
  const auto col_nodes = internal_nodes(b.spec().col_tree);
  const auto row_nodes = internal_nodes(b.spec().row_tree);
  for (const auto& l : b.lines()) {
    const bool column = l.axis == Axis::kCol;
    for (const auto& node : column ? row_nodes : col_nodes) {
      Segment s{l, node, {}};
      for (std::size_t k : leaves_under(column ? rows : cols, node)) {
        s.cells.push_back(column ? Cell{k, l.cells.front().second} : Cell{l.cells.front().first, k});
      }
      const bool all_numeric = std::all_of(s.cells.begin(), s.cells.end(), [&](Cell x) { return b.numeric(x); });
      if (s.cells.size() >= 2 && all_numeric) out.push_back(std::move(s));
    }
  }
  return out;
}

TrajectoryInstance segment_sum(Builder& b, const Segment& s) {
  const auto h = b.line_header(s.line);
  const bool column = s.line.axis == Axis::kCol;
  const auto g = column ? b.rowhead(s.node) : b.colhead(s.node);
  std::vector<std::size_t> cells;
  for (const auto& x : s.cells) cells.push_back(b.cell(x));
  const auto xs = b.numbers(s.cells);
  b.step("Locate the " + line_noun(s.line) + " " + quoted(display(s.line.path)) + ".", {h});
  b.step("Locate the " + member_noun(s.line) + " group " + quoted(display(s.node)) + ".", {g});
  b.step("Read its cells: " + b.values_text(s.cells) + ".", cells);
  b.step("Add them: " + sum_expr(xs) + " = " + total(xs).to_string() + ".", cells);
  return b.finish("What is the total " + words(s.node) + " for " + words(s.line.path) + "?",
                  program_of(OpKind::kSum, {cells}, member_axis(s.line)));
}

TrajectoryInstance arithmetic(Builder& b, Rng& rng, Category c) {
  const auto segments = numeric_segments(b);
  const auto pairs = numeric_pairs(b, false);
  std::vector<Line> full;
  for (auto& l : b.lines()) {
    if (l.cells.size() >= 2 && b.numeric_members(l).size() == l.cells.size()) full.push_back(std::move(l));
  }
  std::vector<OpKind> variants;
  if (!segments.empty()) variants.push_back(OpKind::kSum);
  if (!pairs.empty()) variants.push_back(OpKind::kDifference);
  if (!full.empty()) variants.push_back(OpKind::kMean);
  const OpKind op = choose(rng, variants, c, "no two numeric cells on a line");
  if (op == OpKind::kSum) return segment_sum(b, rng.pick(segments));
  if (op == OpKind::kDifference) {
    const Pair& p = rng.pick(pairs);
    const auto h = b.line_header(p.line);
    const auto ca = b.cell(p.a);
    const auto cb = b.cell(p.b);
    const Path& la = b.member_path(p.line, p.a);
    const Path& lb = b.member_path(p.line, p.b);
    b.step("Locate the " + line_noun(p.line) + " " + quoted(display(p.line.path)) + ".", {h});
    b.step("Read " + quoted(display(la)) + ": " + value_text(b.value(p.a)) + ".", {ca});
    b.step("Read " + quoted(display(lb)) + ": " + value_text(b.value(p.b)) + ".", {cb});
    b.step("Subtract: " + b.number(p.a).to_string() + " - " + b.number(p.b).to_string() + " = " +
               (b.number(p.a) - b.number(p.b)).to_string() + ".",
           {ca, cb});
    return b.finish("What is the " + words(p.line.path) + " value of " + words(la) + " minus that of " + words(lb) +
                        "?",
                    program_of(OpKind::kDifference, {{ca, cb}}, member_axis(p.line)));
  }
  const Line& l = rng.pick(full);
  const auto ev = b.whole_line(l);
  const std::vector<std::size_t> cells(ev.begin() + 1, ev.end());
  const auto xs = b.numbers(l.cells);
  const Decimal s = total(xs);
  const Decimal n(static_cast<long long>(xs.size()));
  b.step("Locate the " + line_noun(l) + " " + quoted(display(l.path)) + ".", {ev.front()});
  b.step("Read its cells: " + b.values_text(l.cells) + ".", cells);
  b.step("Sum: " + s.to_string() + "; count: " + n.to_string() + "; mean: " + Decimal::divide(s, n, 4)->to_string() +
             ".",
         cells);
  return b.finish("What is the average of the " + words(l.path) + " values?",
                  program_of(OpKind::kMean, {cells}, member_axis(l)));
}

TrajectoryInstance ranking(Builder& b, Rng& rng, Category c) {
  std::vector<std::pair<Line, int>> options;
  for (const auto& l : b.lines()) {
    const auto members = b.numeric_members(l);
    if (members.size() < 3) continue;
    auto xs = b.numbers(members);
    std::sort(xs.begin(), xs.end(), std::greater<>());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (std::count(xs.begin(), xs.end(), xs[k]) == 1) options.emplace_back(l, static_cast<int>(k + 1));
    }
  }
  const auto& [l, k] = choose(rng, options, c, "no line with three or more numeric cells");
  const auto ev = b.whole_line(l);
  const auto members = b.numeric_members(l);
  const auto cells = b.boxes(members);
  std::vector<Cell> order = members;
  std::stable_sort(order.begin(), order.end(), [&](Cell x, Cell y) { return b.number(x) > b.number(y); });
  const Cell pick = order[static_cast<std::size_t>(k - 1)];
  std::string listed;
  for (const auto& x : members) {
    if (!listed.empty()) listed += ", ";
    listed += quoted(display(b.member_path(l, x))) + " " + b.number(x).to_string();
  }
  b.step("Locate the " + line_noun(l) + " " + quoted(display(l.path)) + ".", {ev.front()});
  b.step("Read the numeric values: " + listed + ".", cells);
  b.step("Sort them from highest to lowest: " + b.values_text(order) + ".", cells);
  b.step("The value ranked " + std::to_string(k) + " is " + b.number(pick).to_string() + ", in " +
             quoted(display(b.member_path(l, pick))) + ".",
         {b.box(pick)});
  AnswerProgram prog = program_of(OpKind::kRank, {cells}, member_axis(l));
  prog.k = k;
  return b.finish("Which " + member_noun(l) + " has the " + ordinal(k) + " highest " + words(l.path) + " value?",
                  std::move(prog));
}

std::vector<std::pair<Line, Decimal>> threshold_options(const Builder& b) {
  std::vector<std::pair<Line, Decimal>> out;
  for (const auto& l : b.lines()) {
    const auto members = b.numeric_members(l);
    if (members.size() < 2) continue;
    auto xs = b.numbers(members);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) out.emplace_back(l, xs[k]);
  }
  return out;
}

TrajectoryInstance threshold_task(Builder& b, Rng& rng, Category c) {
  const bool counting = c == Category::kCounting;
  const auto [l, t] = choose(rng, threshold_options(b), c, "no line with two distinct numeric values");
  const auto ev = b.whole_line(l);
  const auto members = b.numeric_members(l);
  std::vector<Cell> kept;
  for (const auto& x : members) {
    if (b.number(x) > t) kept.push_back(x);
  }
  b.step("Locate the " + line_noun(l) + " " + quoted(display(l.path)) + ".", {ev.front()});
  b.step("Read the numeric values: " + b.values_text(members) + ".", b.boxes(members));
  b.step("Keep the values greater than " + t.to_string() + ": " + b.values_text(kept) + ".", b.boxes(kept));
  AnswerProgram prog = program_of(counting ? OpKind::kCountAbove : OpKind::kFilterAbove, {b.boxes(members)},
                                  member_axis(l));
  prog.threshold = t;
  if (counting) {
    b.step("Count them: " + std::to_string(kept.size()) + ".", b.boxes(kept));
    return b.finish("How many " + words(l.path) + " values are greater than " + t.to_string() + "?",
                    std::move(prog));
  }
  std::vector<std::size_t> heads;
  std::string names;
  for (const auto& x : kept) {
    heads.push_back(b.member_header(l, x));
    if (!names.empty()) names += ", ";
    names += quoted(display(b.member_path(l, x)));
  }
  b.step("They belong to " + names + ".", heads);
  return b.finish("Which " + member_noun(l) + "s have a " + words(l.path) + " value greater than " + t.to_string() +
                      "?",
                  std::move(prog));
}

TrajectoryInstance verification(Builder& b, Rng& rng, Category c) {
  const Pair p = choose(rng, numeric_pairs(b, false), c, "no two numeric cells on a line");
  const auto h = b.line_header(p.line);
  const auto ha = b.member_header(p.line, p.a);
  const auto hb = b.member_header(p.line, p.b);
  const auto ca = b.cell(p.a);
  const auto cb = b.cell(p.b);
  const Path& la = b.member_path(p.line, p.a);
  const Path& lb = b.member_path(p.line, p.b);
  const bool greater = b.number(p.a) > b.number(p.b);
  b.step("Locate the " + line_noun(p.line) + " " + quoted(display(p.line.path)) + ".", {h});
  b.step("Read " + quoted(display(la)) + ": " + b.number(p.a).to_string() + ".", {ha, ca});
  b.step("Read " + quoted(display(lb)) + ": " + b.number(p.b).to_string() + ".", {hb, cb});
  b.step(b.number(p.a).to_string() + (greater ? " is greater than " : " is not greater than ") +
             b.number(p.b).to_string() + ", so the answer is " + (greater ? "yes." : "no."),
         {ca, cb});
  return b.finish("Is the " + words(p.line.path) + " value of " + words(la) + " greater than that of " + words(lb) +
                      "?",
                  program_of(OpKind::kVerifyGreater, {{ca, cb}}, member_axis(p.line)));
}

TrajectoryInstance comp_arithmetic(Builder& b, Rng& rng, Category c) {
  struct Option {
    Line line;
    std::optional<Path> node_a, node_b;
    std::vector<Cell> a, b;
  };
  std::vector<Option> options;
  const auto segments = numeric_segments(b);
  for (const auto& x : segments) {
    for (const auto& y : segments) {
      if (x.line.axis != y.line.axis || x.line.path != y.line.path || related(x.node, y.node)) continue;
      options.push_back({x.line, x.node, y.node, x.cells, y.cells});
    }
  }
  if (options.empty()) {
    for (const auto& l : b.lines()) {
      const auto members = b.numeric_members(l);
      if (members.size() < 4) continue;
      const auto half = static_cast<std::ptrdiff_t>(members.size() / 2);
      options.push_back({l, std::nullopt, std::nullopt, {members.begin(), members.begin() + half},
                         {members.begin() + half, members.end()}});
    }
  }
  const Option o = choose(rng, options, c, "no two disjoint numeric groups on a line");
  const bool column = o.line.axis == Axis::kCol;
  const auto h = b.line_header(o.line);
  b.step("Locate the " + line_noun(o.line) + " " + quoted(display(o.line.path)) + ".", {h});
  std::vector<std::vector<std::size_t>> groups;
  std::vector<Decimal> sums;
  for (int g = 0; g < 2; ++g) {
    const auto& node = g == 0 ? o.node_a : o.node_b;
    const auto& members = g == 0 ? o.a : o.b;
    std::vector<std::size_t> cited;
    if (node) cited.push_back(column ? b.rowhead(*node) : b.colhead(*node));
    std::vector<std::size_t> cells;
    for (const auto& x : members) cells.push_back(b.cell(x));
    cited.insert(cited.end(), cells.begin(), cells.end());
    const auto xs = b.numbers(members);
    sums.push_back(total(xs));
    const std::string what = node ? "the " + quoted(display(*node)) + " cells" : (g == 0 ? "the first group" : "the second group");
    b.step("Sum " + what + ": " + sum_expr(xs) + " = " + sums.back().to_string() + ".", cited);
    groups.push_back(std::move(cells));
  }
  std::vector<std::size_t> all = groups[0];
  all.insert(all.end(), groups[1].begin(), groups[1].end());
  b.step("Subtract: " + sums[0].to_string() + " - " + sums[1].to_string() + " = " + (sums[0] - sums[1]).to_string() +
             ".",
         all);
  std::string question;
  if (o.node_a) {
    question = "For " + words(o.line.path) + ", what is the total " + words(*o.node_a) + " minus the total " +
               words(*o.node_b) + "?";
  } else {
    std::string first, second;
    for (const auto& x : o.a) first += (first.empty() ? "" : ", ") + words(b.member_path(o.line, x));
    for (const auto& x : o.b) second += (second.empty() ? "" : ", ") + words(b.member_path(o.line, x));
    question = "For " + words(o.line.path) + ", what is the sum over " + first + " minus the sum over " + second + "?";
  }
  return b.finish(question, program_of(OpKind::kDiffOfSums, std::move(groups), member_axis(o.line)));
}

TrajectoryInstance multi_hop(Builder& b, Rng& rng, Category c) {
  struct Option {
    Line key;
    Line target;
    std::size_t at;
  };
  std::vector<Option> options;
  const auto lines = b.lines();
  for (const auto& key : lines) {
    if (key.cells.size() < 2 || b.numeric_members(key).size() != key.cells.size()) continue;
    const auto xs = b.numbers(key.cells);
    const auto top = std::max_element(xs.begin(), xs.end());
    if (std::count(xs.begin(), xs.end(), *top) != 1) continue;
    const auto at = static_cast<std::size_t>(top - xs.begin());
    for (const auto& target : lines) {
      if (target.axis != key.axis || target.path == key.path) continue;
      if (trim(b.value(target.cells[at]).raw).empty()) continue;
      options.push_back({key, target, at});
    }
  }
  const Option o = choose(rng, options, c, "no numeric line with a unique maximum and a second line");
  const auto k = b.whole_line(o.key);
  const auto t = b.whole_line(o.target);
  const Cell top = o.key.cells[o.at];
  const Cell hit = o.target.cells[o.at];
  const Path& member = b.member_path(o.key, top);
  const auto mh = b.member_header(o.key, top);
  const std::vector<std::size_t> key_cells(k.begin() + 1, k.end());
  const std::vector<std::size_t> target_cells(t.begin() + 1, t.end());
  b.step("Locate the " + line_noun(o.key) + " " + quoted(display(o.key.path)) + ".", {k.front()});
  b.step("Read its values: " + b.values_text(o.key.cells) + ".", key_cells);
  b.step("The highest is " + b.number(top).to_string() + ", in " + quoted(display(member)) + ".", {b.box(top), mh});
  b.step("Locate the " + line_noun(o.target) + " " + quoted(display(o.target.path)) + ".", {t.front()});
  b.step("Read the cell in " + quoted(display(member)) + ": " + value_text(b.value(hit)) + ".", {b.box(hit)});
  return b.finish("What is the " + words(o.target.path) + " value for the " + member_noun(o.key) +
                      " with the highest " + words(o.key.path) + " value?",
                  program_of(OpKind::kArgMaxLookup, {key_cells, target_cells}, member_axis(o.key)));
}

TrajectoryInstance temporal(Builder& b, Rng& rng, Category c) {
  const bool rows_dated = axis_is_temporal(b.spec().index.row_paths());
  const bool cols_dated = axis_is_temporal(b.spec().index.col_paths());
  if (!rows_dated && !cols_dated) inapplicable(c, "no header axis labelled with years or dates");
  std::vector<Pair> options;
  for (const auto& p : numeric_pairs(b, false)) {
    const bool dated = p.line.axis == Axis::kCol ? rows_dated : cols_dated;
    if (!dated) continue;
    // a is the later period.
    if (b.member_path(p.line, p.a).back() > b.member_path(p.line, p.b).back()) options.push_back(p);
  }
  const Pair p = choose(rng, options, c, "no two dated numeric cells on a line");
  const auto h = b.line_header(p.line);
  const auto hl = b.member_header(p.line, p.a);
  const auto he = b.member_header(p.line, p.b);
  const auto cl = b.cell(p.a);
  const auto ce = b.cell(p.b);
  const Path& later = b.member_path(p.line, p.a);
  const Path& earlier = b.member_path(p.line, p.b);
  b.step("Locate the " + line_noun(p.line) + " " + quoted(display(p.line.path)) + ".", {h});
  b.step("Read the later period " + quoted(display(later)) + ": " + b.number(p.a).to_string() + ".", {hl, cl});
  b.step("Read the earlier period " + quoted(display(earlier)) + ": " + b.number(p.b).to_string() + ".", {he, ce});
  b.step("Change: " + b.number(p.a).to_string() + " - " + b.number(p.b).to_string() + " = " +
             (b.number(p.a) - b.number(p.b)).to_string() + ".",
         {cl, ce});
  return b.finish("By how much did " + words(p.line.path) + " change from " + words(earlier) + " to " + words(later) +
                      "?",
                  program_of(OpKind::kDifference, {{cl, ce}}, member_axis(p.line)));
}

TrajectoryInstance cross_hier(Builder& b, Rng& rng, Category c) {
  struct Option {
    Line line;
    std::string leaf;
    std::vector<Cell> cells;
  };
  std::vector<Option> options;
  for (const auto& l : b.lines()) {
    std::map<std::string, std::vector<Cell>> by_leaf;
    for (const auto& x : l.cells) {
      const Path& m = b.member_path(l, x);
      if (m.size() >= 2) by_leaf[m.back()].push_back(x);
    }
    for (auto& [leaf, cells] : by_leaf) {
      const bool all_numeric = std::all_of(cells.begin(), cells.end(), [&](Cell x) { return b.numeric(x); });
      if (cells.size() >= 2 && all_numeric) options.push_back({l, leaf, cells});
    }
  }
  if (!options.empty()) {
    const Option o = rng.pick(options);
    const auto h = b.line_header(o.line);
    std::vector<std::size_t> heads;
    std::vector<std::size_t> cells;
    std::string names;
    for (const auto& x : o.cells) {
      heads.push_back(b.member_header(o.line, x));
      cells.push_back(b.cell(x));
      names += (names.empty() ? "" : ", ") + quoted(display(b.member_path(o.line, x)));
    }
    const auto xs = b.numbers(o.cells);
    b.step("Locate the " + line_noun(o.line) + " " + quoted(display(o.line.path)) + ".", {h});
    b.step("Find every " + quoted(o.leaf) + " " + member_noun(o.line) + " across the header groups: " + names + ".",
           heads);
    b.step("Read them: " + b.values_text(o.cells) + ".", cells);
    b.step("Add them: " + sum_expr(xs) + " = " + total(xs).to_string() + ".", cells);
    return b.finish("What is the combined " + o.leaf + " value across all " + member_noun(o.line) + " groups for " +
                        words(o.line.path) + "?",
                    program_of(OpKind::kSum, {cells}, member_axis(o.line)));
  }
  // Fallback: the whole block of cells beneath one internal header.
  struct Block {
    bool column;
    Path node;
    std::vector<std::size_t> leaves;
  };
  std::vector<Block> blocks;
  const auto& cols = b.spec().index.col_paths();
  const auto& rows = b.spec().index.row_paths();
  auto block_numeric = [&](bool column, const std::vector<std::size_t>& leaves) {
    const std::size_t across = column ? b.spec().n_rows() : b.spec().n_cols();
    for (std::size_t k : leaves) {
      for (std::size_t m = 0; m < across; ++m) {
        if (!b.numeric(column ? Cell{m, k} : Cell{k, m})) return false;
      }
    }
    return leaves.size() * across >= 2;
  };
  for (auto& p : internal_nodes(b.spec().col_tree)) {
    auto leaves = leaves_under(cols, p);
    if (block_numeric(true, leaves)) blocks.push_back({true, std::move(p), std::move(leaves)});
  }
  for (auto& p : internal_nodes(b.spec().row_tree)) {
    auto leaves = leaves_under(rows, p);
    if (block_numeric(false, leaves)) blocks.push_back({false, std::move(p), std::move(leaves)});
  }
  const Block blk = choose(rng, blocks, c, "no repeated sub-header and no numeric header block");
  const auto h = blk.column ? b.colhead(blk.node) : b.rowhead(blk.node);
  std::vector<Cell> members;
  for (std::size_t k : blk.leaves) {
    const Line l = blk.column ? Line{Axis::kCol, cols[k], {}} : Line{Axis::kRow, rows[k], {}};
    b.whole_line(l);
    const std::size_t across = blk.column ? b.spec().n_rows() : b.spec().n_cols();
    for (std::size_t m = 0; m < across; ++m) members.push_back(blk.column ? Cell{m, k} : Cell{k, m});
  }
  const auto cells = b.boxes(members);
  const auto xs = b.numbers(members);
  const std::string kind = blk.column ? "column" : "row";
  b.step("Locate the " + kind + " group " + quoted(display(blk.node)) + ".", {h});
  b.step("Read every cell beneath it: " + b.values_text(members) + ".", cells);
  b.step("Add them: " + sum_expr(xs) + " = " + total(xs).to_string() + ".", cells);
  return b.finish("What is the total of all values under " + words(blk.node) + "?",
                  program_of(OpKind::kSum, {cells}, Axis::kRow));
}

}  // namespace

TrajectoryInstance synthesize_instance(const TableAsset& asset, Category category, std::uint64_t seed) {
  Rng rng(seed ^ stable_hash(slug(category)));
  Builder b(asset, category, seed);
  if (asset.spec.n_rows() == 0 || asset.spec.n_cols() == 0) inapplicable(category, "empty table");
  switch (category) {
    case Category::kRetrieval: return retrieval(b, rng, category);
    case Category::kListing: return listing(b, rng, category);
    case Category::kStructure: return structure(b, rng, category);
    case Category::kComparison: return comparison(b, rng, category);
    case Category::kArithmetic: return arithmetic(b, rng, category);
    case Category::kRanking: return ranking(b, rng, category);
    case Category::kCounting:
    case Category::kCondFiltering: return threshold_task(b, rng, category);
    case Category::kVerification: return verification(b, rng, category);
    case Category::kCompArithmetic: return comp_arithmetic(b, rng, category);
    case Category::kMultiHop: return multi_hop(b, rng, category);
    case Category::kTemporal: return temporal(b, rng, category);
    case Category::kCrossHierAgg: return cross_hier(b, rng, category);
  }
  inapplicable(category, "unknown category");
}

}  // namespace tableforge
