#include <algorithm>
#include <cmath>
#include <set>

#include "tableforge/error.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/trajectory.hpp"

namespace tableforge {

using nlohmann::json;

std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

const TrajectoryInstance* DatasetManifest::find(const std::string& id) const {
  for (const auto& in : instances) {
    if (in.id == id) return &in;
  }
  return nullptr;
}

DatasetManifest split_dataset(DatasetManifest manifest, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kRatioInvalid, "split ratio must lie strictly between 0 and 1");
  }
  manifest.split.clear();
  Rng rng(seed);
  for (Category c : kAllCategories) {
    std::vector<const TrajectoryInstance*> members;
    for (const auto& in : manifest.instances) {
      if (in.category == c) members.push_back(&in);
    }
    if (members.empty()) continue;
    // Shuffle first so equal box counts land in a seeded, not input-driven, order.
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->id < b->id; });
    rng.shuffle(members);
    std::stable_sort(members.begin(), members.end(),
                     [](auto* a, auto* b) { return a->total_boxes() < b->total_boxes(); });
    const std::size_t n = members.size();
    const auto n_train = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * ratio - 1e-9));
    for (std::size_t k = 0; k < n; ++k) {
      manifest.split[members[k]->id] = k < n_train ? Split::kTrain : Split::kTest;
    }
  }
  return manifest;
}

namespace {

Decimal ratio_of(const Decimal& num, std::size_t den) {
  return *Decimal::divide(num, Decimal(static_cast<long long>(den)), kStatsScale);
}

struct Totals {
  std::size_t count = 0;
  Decimal boxes;
  Decimal steps;

  void add(std::size_t n, const Decimal& b, const Decimal& s) {
    count += n;
    boxes = boxes + b;
    steps = steps + s;
  }
  Aggregate finish() const {
    if (count == 0) return {};
    return {count, ratio_of(boxes, count), ratio_of(steps, count)};
  }
};

double mean_of(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

StatsReport compute_stats(const std::vector<CategoryRow>& rows) {
  StatsReport r;
  Totals overall;
  std::map<Level, Totals> levels;
  for (const auto& row : rows) {
    const Decimal n(static_cast<long long>(row.count));
    overall.add(row.count, n * row.avg_bbox, n * row.avg_steps);
    levels[level_of(row.category)].add(row.count, n * row.avg_bbox, n * row.avg_steps);
  }
  if (overall.count == 0) throw Error(ErrorCode::kEmptyManifest, "no instances to summarize");
  r.rows = rows;
  for (const auto& [l, t] : levels) r.per_level[l] = t.finish();
  r.overall = overall.finish();
  return r;
}

StatsReport compute_stats(const DatasetManifest& manifest, const std::map<std::string, TableAsset>& tables) {
  if (manifest.instances.empty()) throw Error(ErrorCode::kEmptyManifest, "manifest has no instances");
  std::map<Category, Totals> cats;
  std::map<Level, Totals> levels;
  std::map<Split, Totals> splits;
  Totals overall;
  double question_words = 0;
  double rationale_words = 0;
  std::set<std::string> table_ids;
  for (const auto& in : manifest.instances) {
    const Decimal b(static_cast<long long>(in.total_boxes()));
    const Decimal s(static_cast<long long>(in.steps.size()));
    cats[in.category].add(1, b, s);
    levels[in.level()].add(1, b, s);
    overall.add(1, b, s);
    if (auto it = manifest.split.find(in.id); it != manifest.split.end()) splits[it->second].add(1, b, s);
    question_words += static_cast<double>(word_count(in.question));
    for (const auto& st : in.steps) rationale_words += static_cast<double>(word_count(st.text));
    table_ids.insert(in.table_id);
  }
  StatsReport r;
  for (Category c : kAllCategories) {
    auto it = cats.find(c);
    if (it == cats.end()) continue;
    const Aggregate a = it->second.finish();
    r.rows.push_back({c, a.count, a.avg_bbox, a.avg_steps});
  }
  for (const auto& [l, t] : levels) r.per_level[l] = t.finish();
  for (const auto& [s, t] : splits) r.per_split[s] = t.finish();
  r.overall = overall.finish();
  const std::size_t n = manifest.instances.size();
  r.avg_question_words = mean_of(question_words, n);
  r.avg_rationale_words = mean_of(rationale_words, n);
  double rows = 0, cols = 0, depth = 0;
  std::size_t known = 0;
  for (const auto& id : table_ids) {
    auto it = tables.find(id);
    if (it == tables.end()) continue;
    const TableSpec& spec = it->second.spec;
    rows += static_cast<double>(spec.n_rows());
    cols += static_cast<double>(spec.n_cols());
    depth += static_cast<double>(std::max(spec.col_tree.depth, spec.row_tree.depth));
    ++known;
  }
  if (known > 0) {
    r.avg_rows = mean_of(rows, known);
    r.avg_cols = mean_of(cols, known);
    r.avg_header_depth = mean_of(depth, known);
  }
  return r;
}

json to_json(const StatsReport& r) {
  auto agg = [](const Aggregate& a) {
    return json{{"count", a.count}, {"avg_bbox", a.avg_bbox.to_double()}, {"avg_steps", a.avg_steps.to_double()}};
  };
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"category", std::string(to_string(row.category))},
                    {"level", std::string(to_string(level_of(row.category)))},
                    {"count", row.count},
                    {"avg_bbox", row.avg_bbox.to_double()},
                    {"avg_steps", row.avg_steps.to_double()}});
  }
  json levels = json::object();
  for (const auto& [l, a] : r.per_level) levels[std::string(to_string(l))] = agg(a);
  json out = {{"categories", rows}, {"levels", levels}, {"overall", agg(r.overall)}};
  if (!r.per_split.empty()) {
    json splits = json::object();
    for (const auto& [s, a] : r.per_split) splits[std::string(to_string(s))] = agg(a);
    out["splits"] = splits;
  }
  if (r.avg_rows) {
    out["tables"] = {{"avg_rows", *r.avg_rows}, {"avg_cols", *r.avg_cols}, {"avg_header_depth", *r.avg_header_depth}};
  }
  if (r.avg_question_words) {
    out["text"] = {{"avg_question_words", *r.avg_question_words},
                   {"avg_rationale_words", *r.avg_rationale_words}};
  }
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

}  // namespace tableforge
