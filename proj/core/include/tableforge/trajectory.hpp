#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/decimal.hpp"
#include "tableforge/eval.hpp"
#include "tableforge/layout.hpp"
#include "tableforge/resolver.hpp"
#include "tableforge/taxonomy.hpp"

namespace tableforge {

// A rendered table: the inputs every instance of that table is built from.
struct TableAsset {
  TableSpec spec;
  RegionMap map;
  std::string image;  // path of the rendered PNG, as recorded in instances
};

enum class OpKind {
  kLookup,         // one cell
  kList,           // cells in order
  kCount,          // number of operands
  kArgMax,         // label of the larger value
  kSum,
  kDifference,     // first - second
  kMean,
  kRank,           // label of the k-th largest
  kCountAbove,     // values > threshold
  kFilterAbove,    // labels with value > threshold
  kVerifyGreater,  // first > second ? yes : no
  kDiffOfSums,     // sum(group 0) - sum(group 1)
  kArgMaxLookup,   // group 1 value at the position of group 0's maximum
};

std::string_view to_string(OpKind op);
std::optional<OpKind> parse_op(std::string_view name);

// Which header axis names an operand (for label-valued answers).
enum class Axis { kRow, kCol };

struct Operand {
  std::string label;
  CellValue value;
};

struct Selection {
  OpKind op = OpKind::kLookup;
  std::vector<std::vector<Operand>> groups;
  std::optional<Decimal> threshold;
  int k = 0;
};

struct AnswerTrace {
  std::string answer;
  // Parameters and every computed number a rationale may legitimately state.
  std::vector<Decimal> derived;
};

// Throws Error{kNonNumericOperand}, or kSchemaError when the operation does
// not belong to the category or the operand arity is wrong.
AnswerTrace compute_answer(Category category, const Selection& selection);

// Stored with each instance so answers can be re-derived from its evidence.
struct AnswerProgram {
  OpKind op = OpKind::kLookup;
  std::vector<std::vector<std::size_t>> groups;  // indices into evidence
  Axis label_axis = Axis::kRow;
  std::optional<Decimal> threshold;
  int k = 0;

  friend bool operator==(const AnswerProgram&, const AnswerProgram&) = default;
};

struct EvidenceEntry {
  std::string tag;
  LabelType label = LabelType::kCell;
  BBox bbox_px;
  NormBBox bbox_norm;

  friend bool operator==(const EvidenceEntry&, const EvidenceEntry&) = default;
};

struct ReasoningStep {
  std::size_t index = 0;
  std::string text;
  std::vector<std::size_t> boxes;  // indices into evidence

  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

// The {image, question, spatial evidence, answer} quadruplet plus the
// decoupled reasoning chain.
struct TrajectoryInstance {
  std::string id;
  std::string table_id;
  std::string image;
  std::string question;
  Category category = Category::kRetrieval;
  std::string answer;
  std::vector<std::string> tags;
  std::vector<EvidenceEntry> evidence;  // deduplicated boxes
  std::vector<ReasoningStep> steps;
  AnswerProgram program;

  Level level() const { return level_of(category); }
  std::size_t total_boxes() const { return evidence.size(); }

  friend bool operator==(const TrajectoryInstance&, const TrajectoryInstance&) = default;
};

// Throws Error{kSchemaError} when an invariant fails (empty evidence, no
// steps, empty answer, dangling box index, bad box).
void validate_instance(const TrajectoryInstance& instance);

// Deterministic for equal (asset, category, seed). Throws
// Error{kCategoryInapplicable}.
TrajectoryInstance synthesize_instance(const TableAsset& asset, Category category, std::uint64_t seed);

// Operands rebuilt from the instance's evidence boxes against the table.
// Throws Error{kRegionNotFound} when a program box matches no region.
Selection selection_from_evidence(const TrajectoryInstance& instance, const TableSpec& spec, const RegionMap& map);

nlohmann::json to_json(const TrajectoryInstance& instance);
TrajectoryInstance instance_from_json(const nlohmann::json& j);
std::string to_jsonl(const std::vector<TrajectoryInstance>& instances);
std::vector<TrajectoryInstance> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<TrajectoryInstance>& instances);

enum class Split { kTrain, kTest };
std::string_view to_string(Split s);

struct DatasetManifest {
  std::vector<TrajectoryInstance> instances;
  std::map<std::string, Split> split;  // id -> split

  const TrajectoryInstance* find(const std::string& id) const;
};

// Stratified by category; within a category the densest instances go to test.
// n_test = n - ceil(n * ratio). Throws Error{kRatioInvalid}.
DatasetManifest split_dataset(DatasetManifest manifest, double ratio, std::uint64_t seed);

struct CategoryRow {
  Category category = Category::kRetrieval;
  std::size_t count = 0;
  Decimal avg_bbox;
  Decimal avg_steps;
};

struct Aggregate {
  std::size_t count = 0;
  Decimal avg_bbox;
  Decimal avg_steps;
};

struct StatsReport {
  std::vector<CategoryRow> rows;
  std::map<Level, Aggregate> per_level;
  Aggregate overall;
  // Only for manifest input.
  std::optional<double> avg_rows, avg_cols, avg_header_depth;
  std::optional<double> avg_question_words, avg_rationale_words;
  std::map<Split, Aggregate> per_split;
};

inline constexpr int kStatsScale = 6;

// Weighted aggregates sum(count * avg) / sum(count), rounded to kStatsScale
// places. Throws Error{kEmptyManifest}.
StatsReport compute_stats(const std::vector<CategoryRow>& rows);
StatsReport compute_stats(const DatasetManifest& manifest, const std::map<std::string, TableAsset>& tables);
nlohmann::json to_json(const StatsReport& report);

std::size_t word_count(std::string_view text);

}  // namespace tableforge
