#include <algorithm>

#include "tableforge/error.hpp"
#include "tableforge/trajectory.hpp"
#include "trajectory_internal.hpp"

namespace tableforge {
namespace {

constexpr int kMeanScale = 4;

Decimal number_of(const Operand& o) {
  if (!o.value.numeric) {
    throw Error(ErrorCode::kNonNumericOperand, "'" + o.value.raw + "' (" + o.label + ") is not numeric");
  }
  return *o.value.numeric;
}

std::vector<Decimal> numbers_of(const std::vector<Operand>& ops) {
  if (ops.empty()) throw Error(ErrorCode::kNonNumericOperand, "empty selection");
  std::vector<Decimal> out;
  out.reserve(ops.size());
  for (const auto& o : ops) out.push_back(number_of(o));
  return out;
}

Decimal sum_of(const std::vector<Decimal>& xs) {
  Decimal s;
  for (const auto& x : xs) s = s + x;
  return s;
}

const std::vector<Operand>& group(const Selection& sel, std::size_t g, std::size_t min_size = 1) {
  if (sel.groups.size() <= g || sel.groups[g].size() < min_size) {
    throw Error(ErrorCode::kSchemaError, std::string(to_string(sel.op)) + " needs operand group " +
                                             std::to_string(g) + " with at least " + std::to_string(min_size) +
                                             " operands");
  }
  return sel.groups[g];
}

std::size_t argmax(const std::vector<Decimal>& xs) {
  return static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

bool op_allowed(Category c, OpKind op) {
  switch (c) {
    case Category::kRetrieval: return op == OpKind::kLookup;
    case Category::kListing: return op == OpKind::kList;
    case Category::kStructure: return op == OpKind::kCount;
    case Category::kComparison: return op == OpKind::kArgMax;
    case Category::kArithmetic: return op == OpKind::kSum || op == OpKind::kDifference || op == OpKind::kMean;
    case Category::kRanking: return op == OpKind::kRank;
    case Category::kCounting: return op == OpKind::kCountAbove;
    case Category::kCondFiltering: return op == OpKind::kFilterAbove;
    case Category::kVerification: return op == OpKind::kVerifyGreater;
    case Category::kCompArithmetic: return op == OpKind::kDiffOfSums;
    case Category::kMultiHop: return op == OpKind::kArgMaxLookup;
    case Category::kTemporal: return op == OpKind::kDifference;
    case Category::kCrossHierAgg: return op == OpKind::kSum;
  }
  return false;
}

}  // namespace

std::string value_answer(const CellValue& v) {
  if (v.numeric) return v.numeric->to_string();
  return trim(v.raw);
}

std::string quoted(const std::string& label) {
  std::string out = "\"";
  for (char c : label) out += c == '"' ? '\'' : c;
  return out + "\"";
}

std::string value_text(const CellValue& v) {
  if (v.numeric) return v.numeric->to_string();
  return quoted(trim(v.raw));
}

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::kLookup: return "lookup";
    case OpKind::kList: return "list";
    case OpKind::kCount: return "count";
    case OpKind::kArgMax: return "argmax";
    case OpKind::kSum: return "sum";
    case OpKind::kDifference: return "difference";
    case OpKind::kMean: return "mean";
    case OpKind::kRank: return "rank";
    case OpKind::kCountAbove: return "count_above";
    case OpKind::kFilterAbove: return "filter_above";
    case OpKind::kVerifyGreater: return "verify_greater";
    case OpKind::kDiffOfSums: return "diff_of_sums";
    case OpKind::kArgMaxLookup: return "argmax_lookup";
  }
  return "";
}

std::optional<OpKind> parse_op(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(OpKind::kArgMaxLookup); ++i) {
    auto op = static_cast<OpKind>(i);
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

AnswerTrace compute_answer(Category category, const Selection& sel) {
  if (!op_allowed(category, sel.op)) {
    throw Error(ErrorCode::kSchemaError, std::string(to_string(sel.op)) + " is not an operation of category " +
                                             std::string(to_string(category)));
  }
  AnswerTrace t;
  switch (sel.op) {
    case OpKind::kLookup: {
      const auto& g = group(sel, 0);
      if (g.size() != 1) throw Error(ErrorCode::kSchemaError, "lookup takes exactly one operand");
      t.answer = value_answer(g[0].value);
      break;
    }
    case OpKind::kList: {
      for (const auto& o : group(sel, 0)) {
        if (!t.answer.empty()) t.answer += ", ";
        t.answer += value_answer(o.value);
      }
      break;
    }
    case OpKind::kCount: {
      const Decimal n(static_cast<long long>(group(sel, 0).size()));
      t.answer = n.to_string();
      t.derived.push_back(n);
      break;
    }
    case OpKind::kArgMax: {
      const auto& g = group(sel, 0, 2);
      t.answer = g[argmax(numbers_of(g))].label;
      break;
    }
    case OpKind::kSum: {
      const Decimal s = sum_of(numbers_of(sel.groups.empty() ? std::vector<Operand>{} : sel.groups[0]));
      t.answer = s.to_string();
      t.derived.push_back(s);
      break;
    }
    case OpKind::kDifference: {
      const auto& g = group(sel, 0, 2);
      if (g.size() != 2) throw Error(ErrorCode::kSchemaError, "difference takes exactly two operands");
      const Decimal d = number_of(g[0]) - number_of(g[1]);
      t.answer = d.to_string();
      t.derived.push_back(d);
      break;
    }
    case OpKind::kMean: {
      const auto xs = numbers_of(sel.groups.empty() ? std::vector<Operand>{} : sel.groups[0]);
      const Decimal s = sum_of(xs);
      const Decimal n(static_cast<long long>(xs.size()));
      const Decimal m = *Decimal::divide(s, n, kMeanScale);
      t.answer = m.to_string();
      t.derived = {s, n, m};
      break;
    }
    case OpKind::kRank: {
      const auto& g = group(sel, 0);
      if (sel.k < 1 || static_cast<std::size_t>(sel.k) > g.size()) {
        throw Error(ErrorCode::kSchemaError, "rank k=" + std::to_string(sel.k) + " out of range");
      }
      const auto xs = numbers_of(g);
      std::vector<std::size_t> order(xs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] > xs[b]; });
      t.answer = g[order[static_cast<std::size_t>(sel.k - 1)]].label;
      t.derived.push_back(Decimal(sel.k));
      break;
    }
    case OpKind::kCountAbove:
    case OpKind::kFilterAbove: {
      if (!sel.threshold) throw Error(ErrorCode::kSchemaError, "threshold required");
      const auto& g = group(sel, 0);
      const auto xs = numbers_of(g);
      long long n = 0;
      std::string labels;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > *sel.threshold) {
          ++n;
          if (!labels.empty()) labels += ", ";
          labels += g[i].label;
        }
      }
      t.derived.push_back(*sel.threshold);
      if (sel.op == OpKind::kCountAbove) {
        t.answer = Decimal(n).to_string();
        t.derived.push_back(Decimal(n));
      } else {
        t.answer = labels.empty() ? "none" : labels;
      }
      break;
    }
    case OpKind::kVerifyGreater: {
      const auto& g = group(sel, 0, 2);
      if (g.size() != 2) throw Error(ErrorCode::kSchemaError, "verification takes exactly two operands");
      t.answer = number_of(g[0]) > number_of(g[1]) ? "yes" : "no";
      break;
    }
    case OpKind::kDiffOfSums: {
      const Decimal a = sum_of(numbers_of(group(sel, 0)));
      const Decimal b = sum_of(numbers_of(group(sel, 1)));
      const Decimal d = a - b;
      t.answer = d.to_string();
      t.derived = {a, b, d};
      break;
    }
    case OpKind::kArgMaxLookup: {
      const auto& keys = group(sel, 0, 1);
      const auto& targets = group(sel, 1, 1);
      if (keys.size() != targets.size()) {
        throw Error(ErrorCode::kSchemaError, "key and target groups must align");
      }
      t.answer = value_answer(targets[argmax(numbers_of(keys))].value);
      break;
    }
  }
  return t;
}

}  // namespace tableforge
