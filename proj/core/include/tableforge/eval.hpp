#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/geometry.hpp"
#include "tableforge/taxonomy.hpp"

namespace tableforge {

inline constexpr int kNormMax = 999;

// Box on the 1000-level grid, inclusive range [0, 999] per coordinate.
struct NormBBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  bool valid() const {
    return 0 <= x1 && x1 <= x2 && x2 <= kNormMax && 0 <= y1 && y1 <= y2 && y2 <= kNormMax;
  }
  std::array<int, 4> as_array() const { return {x1, y1, x2, y2}; }
  friend auto operator<=>(const NormBBox&, const NormBBox&) = default;
};

// n = clamp(round_half_up(v / dim * 999), 0, 999), per axis.
// Throws Error{kOutOfBounds} if the box leaves the image.
NormBBox normalize_bbox(const BBox& box, int image_w, int image_h);
int normalize_coord(int v, int dim);

// v = round_half_up(n / 999 * dim).
BBox denormalize_bbox(const NormBBox& box, int image_w, int image_h);
int denormalize_coord(int n, int dim);

struct GroundingLine {
  LabelType label = LabelType::kCell;
  NormBBox bbox;
  friend bool operator==(const GroundingLine&, const GroundingLine&) = default;
};

struct RejectedLine {
  std::size_t line_no = 0;  // 1-based
  std::string text;
  std::string reason;
};

struct GroundingParse {
  std::string reason;
  std::vector<GroundingLine> lines;
  std::vector<RejectedLine> rejected;
};

// Reason text, then "[label] (x1,y1)(x2,y2)" lines. Bad lines are collected in
// `rejected`; zero valid lines throws Error{kNoValidLines}.
GroundingParse parse_grounding_output(std::string_view text);
// Never throws; `lines` may be empty.
GroundingParse scan_grounding_output(std::string_view text);

std::string format_grounding_line(const GroundingLine& line);
// Lines joined by '\n', no trailing newline.
std::string format_grounding_lines(const std::vector<GroundingLine>& lines);

// Intersection over union for any box type with x1..y2 members. Zero-area
// boxes score 0 against everything.
template <class A, class B>
double iou(const A& a, const B& b) {
  const long long area_a = static_cast<long long>(a.x2 - a.x1) * (a.y2 - a.y1);
  const long long area_b = static_cast<long long>(b.x2 - b.x1) * (b.y2 - b.y1);
  if (a.x2 <= a.x1 || a.y2 <= a.y1 || b.x2 <= b.x1 || b.y2 <= b.y1) return 0.0;
  const long long iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const long long ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const long long inter = iw * ih;
  const long long uni = area_a + area_b - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct MatchedPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;  // sorted by pred index
  std::size_t unmatched_pred = 0;
  std::size_t unmatched_gt = 0;
  double total_iou = 0.0;
};

// One-to-one assignment maximising total IoU (Hungarian); zero-IoU pairs are
// dropped and counted as unmatched.
MatchResult match_boxes(const std::vector<NormBBox>& preds, const std::vector<NormBBox>& gts);
MatchResult match_iou_matrix(const std::vector<std::vector<double>>& iou_matrix, std::size_t n_gt);

struct IoUSummary {
  std::size_t pairs = 0;
  double mean = 0.0;
  double median = 0.0;
  double frac_ge_50 = 0.0;
  double frac_ge_75 = 0.0;
  double frac_ge_90 = 0.0;
};

// Throws Error{kEmptyInput}.
IoUSummary iou_summary(const std::vector<double>& pair_ious);
nlohmann::json to_json(const IoUSummary& s);

// Trim, ASCII case-fold, collapse whitespace; numbers in shortest decimal form.
std::string canonicalize_answer(std::string_view text);
bool answers_match(std::string_view pred, std::string_view gold);

struct ScoredItem {
  std::string id;
  Category category = Category::kRetrieval;
  Level level = Level::kL1;
  std::size_t n_gt_boxes = 0;
  bool correct = false;
};

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

enum class DensityBucket { kSparse, kMedium, kDense };  // 1-5, 6-10, >10 boxes
DensityBucket density_bucket(std::size_t n_boxes);
std::string_view to_string(DensityBucket b);

struct AccuracyReport {
  std::map<Category, Accuracy> per_category;
  std::map<Level, Accuracy> per_level;
  std::map<DensityBucket, Accuracy> per_density;
  Accuracy overall;
};

// Throws Error{kEmptyInput}, or kSchemaError when level and category disagree.
AccuracyReport aggregate(const std::vector<ScoredItem>& results);
nlohmann::json to_json(const AccuracyReport& r);

}  // namespace tableforge
