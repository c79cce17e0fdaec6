#include "tableforge/eval.hpp"

#include <cctype>
#include <limits>
#include <numeric>

#include "tableforge/decimal.hpp"
#include "tableforge/error.hpp"

namespace tableforge {
namespace {

using nlohmann::json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

class LineScanner {
 public:
  explicit LineScanner(std::string_view s) : s_(s) {}

  void space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool eat(char c) {
    space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::optional<int> number() {
    space();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])) && pos_ - start < 6) ++pos_;
    if (pos_ == start || (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))) return std::nullopt;
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }
  std::string_view until(char c) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != c) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  bool done() {
    space();
    return pos_ == s_.size();
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Returns an error message, or nullopt on success.
std::optional<std::string> parse_line(std::string_view text, GroundingLine& out) {
  LineScanner sc(text);
  if (!sc.eat('[')) return "expected '['";
  const std::string label(trim_view(sc.until(']')));
  if (!sc.eat(']')) return "unterminated label";
  auto type = parse_label_type(label);
  if (!type) return "unknown label '" + label + "'";
  int v[4];
  for (int k = 0; k < 2; ++k) {
    if (!sc.eat('(')) return "expected '('";
    auto a = sc.number();
    if (!a) return "expected coordinate";
    if (!sc.eat(',')) return "expected ','";
    auto b = sc.number();
    if (!b) return "expected coordinate";
    if (!sc.eat(')')) return "expected ')'";
    v[2 * k] = *a;
    v[2 * k + 1] = *b;
  }
  if (!sc.done()) return "trailing text";
  NormBBox box{v[0], v[1], v[2], v[3]};
  if (!box.valid()) return "coordinates outside [0, 999] or inverted";
  out = {*type, box};
  return std::nullopt;
}

}  // namespace

int normalize_coord(int v, int dim) {
  if (dim <= 0 || v < 0 || v > dim) {
    throw Error(ErrorCode::kOutOfBounds, "coordinate " + std::to_string(v) + " outside [0, " + std::to_string(dim) + "]");
  }
  const long long n = (2LL * v * kNormMax + dim) / (2LL * dim);
  return static_cast<int>(std::clamp<long long>(n, 0, kNormMax));
}

int denormalize_coord(int n, int dim) {
  return static_cast<int>((2LL * n * dim + kNormMax) / (2LL * kNormMax));
}

NormBBox normalize_bbox(const BBox& b, int image_w, int image_h) {
  return {normalize_coord(b.x1, image_w), normalize_coord(b.y1, image_h), normalize_coord(b.x2, image_w),
          normalize_coord(b.y2, image_h)};
}

BBox denormalize_bbox(const NormBBox& b, int image_w, int image_h) {
  return {denormalize_coord(b.x1, image_w), denormalize_coord(b.y1, image_h), denormalize_coord(b.x2, image_w),
          denormalize_coord(b.y2, image_h)};
}

GroundingParse scan_grounding_output(std::string_view text) {
  GroundingParse out;
  std::vector<std::string_view> reason_lines;
  bool in_boxes = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const std::string_view t = trim_view(line);
    if (!in_boxes && !t.empty() && t.front() == '[') in_boxes = true;
    if (!in_boxes) {
      reason_lines.push_back(line);
    } else if (!t.empty()) {
      GroundingLine parsed;
      if (auto err = parse_line(t, parsed)) {
        out.rejected.push_back({line_no, std::string(t), *err});
      } else {
        out.lines.push_back(parsed);
      }
    }
    start = end + 1;
  }
  std::string reason;
  for (std::size_t i = 0; i < reason_lines.size(); ++i) {
    if (i) reason += '\n';
    reason += reason_lines[i];
  }
  out.reason = std::string(trim_view(reason));
  return out;
}

GroundingParse parse_grounding_output(std::string_view text) {
  GroundingParse out = scan_grounding_output(text);
  if (out.lines.empty()) {
    throw Error(ErrorCode::kNoValidLines,
                "no parseable grounding line (" + std::to_string(out.rejected.size()) + " rejected)");
  }
  return out;
}

std::string format_grounding_line(const GroundingLine& line) {
  const auto& b = line.bbox;
  return "[" + std::string(to_string(line.label)) + "] (" + std::to_string(b.x1) + "," + std::to_string(b.y1) +
         ")(" + std::to_string(b.x2) + "," + std::to_string(b.y2) + ")";
}

std::string format_grounding_lines(const std::vector<GroundingLine>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += format_grounding_line(lines[i]);
  }
  return out;
}

MatchResult match_iou_matrix(const std::vector<std::vector<double>>& m, std::size_t n_gt) {
  const std::size_t n_pred = m.size();
  MatchResult result;
  const std::size_t n = std::max(n_pred, n_gt);
  if (n == 0) return result;

  // Hungarian algorithm (minimisation of -IoU) on the zero-padded square matrix.
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i <= n_pred && j <= n_gt) ? -m[i - 1][j - 1] : 0.0;
  };
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n_gt; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= n_pred && m[i - 1][j - 1] > 0.0) {
      result.pairs.push_back({i - 1, j - 1, m[i - 1][j - 1]});
      result.total_iou += m[i - 1][j - 1];
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.pred < b.pred; });
  result.unmatched_pred = n_pred - result.pairs.size();
  result.unmatched_gt = n_gt - result.pairs.size();
  return result;
}

MatchResult match_boxes(const std::vector<NormBBox>& preds, const std::vector<NormBBox>& gts) {
  std::vector<std::vector<double>> m(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) m[i][j] = iou(preds[i], gts[j]);
  }
  return match_iou_matrix(m, gts.size());
}

IoUSummary iou_summary(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "no IoU pairs to summarise");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  IoUSummary s;
  s.pairs = n;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  s.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  auto frac_at_least = [&](double t) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(sorted.end() - first) / static_cast<double>(n);
  };
  s.frac_ge_50 = frac_at_least(0.5);
  s.frac_ge_75 = frac_at_least(0.75);
  s.frac_ge_90 = frac_at_least(0.9);
  return s;
}

json to_json(const IoUSummary& s) {
  return {{"pairs", s.pairs},         {"mean", s.mean},           {"median", s.median},
          {"frac_ge_50", s.frac_ge_50}, {"frac_ge_75", s.frac_ge_75}, {"frac_ge_90", s.frac_ge_90}};
}

std::string canonicalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : trim_view(text)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (auto number = Decimal::parse(out)) return number->to_string();
  return out;
}

bool answers_match(std::string_view pred, std::string_view gold) {
  return canonicalize_answer(pred) == canonicalize_answer(gold);
}

DensityBucket density_bucket(std::size_t n) {
  if (n <= 5) return DensityBucket::kSparse;
  if (n <= 10) return DensityBucket::kMedium;
  return DensityBucket::kDense;
}

std::string_view to_string(DensityBucket b) {
  switch (b) {
    case DensityBucket::kSparse: return "1-5";
    case DensityBucket::kMedium: return "6-10";
    case DensityBucket::kDense: return ">10";
  }
  return "";
}

AccuracyReport aggregate(const std::vector<ScoredItem>& results) {
  if (results.empty()) throw Error(ErrorCode::kEmptyInput, "no results to aggregate");
  AccuracyReport r;
  for (const auto& item : results) {
    if (level_of(item.category) != item.level) {
      throw Error(ErrorCode::kSchemaError, item.id + ": category " + std::string(to_string(item.category)) +
                                               " is not in level " + std::string(to_string(item.level)));
    }
    const std::size_t hit = item.correct ? 1 : 0;
    for (Accuracy* a : {&r.per_category[item.category], &r.per_level[item.level],
                        &r.per_density[density_bucket(item.n_gt_boxes)], &r.overall}) {
      a->correct += hit;
      a->total += 1;
    }
  }
  return r;
}

json to_json(const AccuracyReport& r) {
  auto acc = [](const Accuracy& a) {
    return json{{"correct", a.correct}, {"total", a.total}, {"accuracy", a.value()}};
  };
  json cats = json::object();
  for (const auto& [c, a] : r.per_category) cats[std::string(to_string(c))] = acc(a);
  json levels = json::object();
  for (const auto& [l, a] : r.per_level) levels[std::string(to_string(l))] = acc(a);
  json density = json::object();
  for (const auto& [b, a] : r.per_density) density[std::string(to_string(b))] = acc(a);
  return {{"overall", acc(r.overall)}, {"per_level", levels}, {"per_category", cats}, {"per_density", density}};
}

}  // namespace tableforge
